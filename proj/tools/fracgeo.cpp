#include <exception>
#include <iostream>
#include <string>

#include "CLI11.hpp"
#include "fracgeo/commands.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Fractional nonholonomic geometry toolkit"};
  app.require_subcommand(1, 1);

  std::string config;
  bool refine = false;
  std::string out_dir = "fracgeo_out";
  for (const char* name : {"fracops", "geometry", "generate", "soliton"}) {
    CLI::App* sub = app.add_subcommand(name);
    sub->add_option("--config", config, "YAML run configuration")->required();
    sub->add_flag("--refine", refine, "Repeat on refined grids and report observed orders");
    sub->add_option("--out", out_dir, "Output directory");
  }

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : fracgeo::kExitConfigError;
  }

  const std::string command = app.get_subcommands().front()->get_name();
  fracgeo::RunConfig cfg;
  try {
    cfg = fracgeo::load_config(config, command);
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return fracgeo::kExitConfigError;
  }
  try {
    return fracgeo::run_command(cfg, refine, out_dir, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return fracgeo::kExitCheckFailed;
  }
}
