#include <cstdint>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "shortck/runner.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Numerical laboratory for non-autonomous basins, Short C^k potentials and "
               "boundary graphs"};
  app.name("shortck");

  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<std::string> out_dir;
  std::optional<std::string> threads;
  app.add_option("-c,--config", config_path, "INI run configuration")
      ->required()
      ->check(CLI::ExistingFile);
  app.add_option("--seed", seed, "override the config seed");
  app.add_option("--out-dir", out_dir, "override the output directory");
  app.add_option("--threads", threads, "worker threads: a positive integer or 'auto'");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e);
    return code == 0 ? 0 : 2;  // --help and --version exit cleanly
  }

  try {
    shortck::RunOverrides over{seed, out_dir, threads};
    return shortck::run_config_file(config_path, over, std::cout).exit_code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
}
