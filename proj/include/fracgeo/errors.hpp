#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <vector>

namespace fracgeo {

/// Violated precondition on an operator argument (bad order, bad grid, ...).
class DomainError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

/// Result not representable in double precision.
class RangeError : public std::range_error {
 public:
  using std::range_error::range_error;
};

/// A metric block (or another per-node matrix) is numerically singular.
class SingularMetricError : public std::runtime_error {
 public:
  SingularMetricError(const std::string& what, std::vector<std::size_t> node)
      : std::runtime_error(what), node_(std::move(node)) {}
  const std::vector<std::size_t>& node() const { return node_; }

 private:
  std::vector<std::size_t> node_;
};

/// Iterative solver gave up; carries the residual of the last iterate.
class ConvergenceError : public std::runtime_error {
 public:
  ConvergenceError(const std::string& what, double last_residual, int iterations)
      : std::runtime_error(what), last_residual_(last_residual), iterations_(iterations) {}
  double last_residual() const { return last_residual_; }
  int iterations() const { return iterations_; }

 private:
  double last_residual_;
  int iterations_;
};

/// A precondition of the exact-solution recipe failed at a specific node.
class GenerationError : public std::runtime_error {
 public:
  GenerationError(const std::string& what, std::vector<std::size_t> node)
      : std::runtime_error(what), node_(std::move(node)) {}
  const std::vector<std::size_t>& node() const { return node_; }

 private:
  std::vector<std::size_t> node_;
};

std::string format_node(const std::vector<std::size_t>& node);

}  // namespace fracgeo
