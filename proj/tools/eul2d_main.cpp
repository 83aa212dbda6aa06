#include <iostream>
#include <string>

#include <CLI11.hpp>

#include "eul2d/acceptance.hpp"
#include "eul2d/cli.hpp"

int main(int argc, char** argv) {
  using namespace eul2d;
  CLI::App app{"eul2d: stochastic 2D Euler / Navier-Stokes vorticity solver and estimate lab"};
  app.require_subcommand(1);

  cli::Options opt;
  std::string config, out;
  bool serial = false;
  auto common = [&](CLI::App* sub) {
    sub->add_option("--out", out, "output directory (relative paths resolve against $EUL2D_OUTPUT_ROOT)");
    sub->add_option("--threads", opt.threads, "parallel runs for ensembles and viscosity sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--serial", serial, "force one thread (bitwise-reproducible path)");
  };

  auto* sim = app.add_subcommand("simulate", "run the configured dynamics");
  sim->add_option("--config", config, "run configuration")->required();
  common(sim);

  std::string name;
  auto* exp = app.add_subcommand("experiment", "run one named estimate");
  exp->add_option("name", name, "experiment name")->required();
  exp->add_option("--config", config, "run configuration")->required();
  common(exp);

  std::string manifest;
  auto* rep = app.add_subcommand("replay", "re-execute a run and compare checksums");
  rep->add_option("manifest", manifest, "manifest file")->required();

  auto* val = app.add_subcommand("validate", "run the acceptance suite");
  common(val);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : cli::exit_config;
  }
  if (serial) opt.threads = 1;
  opt.out = out;

  cli::Outcome r;
  if (*sim) {
    r = cli::simulate(std::filesystem::path(config), opt);
  } else if (*exp) {
    if (!is_experiment_name(name)) {
      std::cerr << "error: unknown experiment '" << name << "'\n";
      return cli::exit_config;
    }
    r = cli::experiment(name, std::filesystem::path(config), opt);
    if (r.report) std::cout << r.report->to_text();
  } else if (*rep) {
    r = cli::replay(manifest, opt);
    if (r.code == cli::exit_pass) std::cout << "replay identical: " << r.directory.string() << "\n";
  } else {
    const std::filesystem::path root = out.empty() ? cli::output_root() / "acceptance" : std::filesystem::path(out);
    const auto results = acceptance::run_all(root, opt.threads, std::cout);
    return acceptance::all_passed(results) ? cli::exit_pass : cli::exit_fail;
  }
  if (r.code == cli::exit_pass && !r.directory.empty() && !*rep) std::cout << "wrote " << r.directory.string() << "\n";
  return r.code;
}
