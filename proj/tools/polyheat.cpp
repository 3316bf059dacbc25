// Command line front end: `polyheat run <config>` and `polyheat bench <config>`.

#include <fstream>
#include <iostream>
#include <optional>

#include <CLI11.hpp>

#include "polyheat/app.hpp"

namespace {

polyheat::RunConfig load(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw polyheat::ConfigError("cannot open config '" + path + "'");
  try {
    return polyheat::parse_config(in);
  } catch (const polyheat::ConfigError& e) {
    throw polyheat::ConfigError(path + ": " + e.what());
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Potentials of the polyharmonic heat operator and the lateral Cauchy problem"};
  app.require_subcommand(1);
  std::string out;
  std::optional<std::uint64_t> seed;
  bool verbose = false;
  app.add_option("--out", out, "output directory (overrides run.out_dir)");
  app.add_option("--seed", seed, "RNG seed (overrides run.seed)");
  app.add_flag("--verbose", verbose, "print the report to stdout");
  std::string config;
  auto* run = app.add_subcommand("run", "execute the scenario named in the config");
  run->add_option("config", config, "config file")->required();
  run->fallthrough();
  auto* bench = app.add_subcommand("bench", "time kernel, layer and assembly kernels");
  bench->add_option("config", config, "config file")->required();
  bench->fallthrough();
  CLI11_PARSE(app, argc, argv);

  try {
    polyheat::RunConfig cfg = load(config);
    if (seed) cfg.seed = *seed;
    if (!out.empty()) cfg.out_dir = out;
    const polyheat::RunOutcome res =
        bench->parsed() ? polyheat::run_bench(cfg, cfg.out_dir) : polyheat::run_scenario(cfg, cfg.out_dir);
    if (verbose) std::cout << res.report.dump(2) << '\n';
    for (const auto& f : res.files) std::cerr << "wrote " << f.string() << '\n';
    if (res.exit_code == 3) std::cerr << "verdict incompatible (fail_on_incompatible is set)\n";
    return res.exit_code;
  } catch (const polyheat::ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return 2;
  } catch (const polyheat::CapabilityError& e) {
    std::cerr << "capability error: " << e.what() << '\n';
    return 4;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
}
