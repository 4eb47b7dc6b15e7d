#include "fracgeo/errors.hpp"

namespace fracgeo {

std::string format_node(const std::vector<std::size_t>& node) {
  std::string s = "(";
  for (std::size_t k = 0; k < node.size(); ++k) {
    if (k) s += ",";
    s += std::to_string(node[k]);
  }
  return s + ")";
}

}  // namespace fracgeo
