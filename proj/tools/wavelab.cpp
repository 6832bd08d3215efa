// Command-line front end: validate | evolve | decay | spectrum | resolvent |
// rays | sweep | report. Exit codes: 0 ok, 1 check failed, 2 input error,
// 3 numerical failure.

#include <CLI11.hpp>

#include "wavelab/lab.hpp"

int main(int argc, char** argv) {
  CLI::App app{"wavelab: numerical laboratory for time-periodic wave problems"};
  app.require_subcommand(1);

  std::string scenario, config_path, out_dir = "wavelab-out";
  std::uint64_t seed = 1;
  int threads = 0;
  app.add_option("--scenario", scenario, "builtin scenario name");
  app.add_option("--config", config_path, "scenario/config file path");
  app.add_option("--out", out_dir, "output directory");
  app.add_option("--seed", seed, "ensemble seed");
  app.add_option("--threads", threads, "worker threads (0 = hardware)");

  std::vector<std::string> manifests;
  auto* c_validate = app.add_subcommand("validate", "check scenario invariants");
  auto* c_evolve = app.add_subcommand("evolve", "evolve a pulse, write energy trace");
  auto* c_decay = app.add_subcommand("decay", "local energy decay profile and rate fits");
  auto* c_spectrum = app.add_subcommand("spectrum", "Floquet spectrum / pole report");
  auto* c_resolvent = app.add_subcommand("resolvent", "series vs solve resolvent probes");
  auto* c_rays = app.add_subcommand("rays", "non-trapping ray scan");
  auto* c_sweep = app.add_subcommand("sweep", "glued-family period sweep");
  auto* c_report = app.add_subcommand("report", "merge run manifests into a summary");
  c_report->add_option("manifests", manifests, "manifest.json paths")->required();

  bool list_builtins = false;
  app.add_flag("--list-scenarios", list_builtins, "list builtin scenarios and exit");

  CLI11_PARSE(app, argc, argv);

  if (list_builtins) {
    for (const auto& n : wavelab::builtin_names()) std::printf("%s\n", n.c_str());
    return 0;
  }

  return wavelab::run_guarded([&]() -> int {
    if (c_report->parsed()) return wavelab::cmd_report(manifests, out_dir);
    auto cfg = wavelab::make_experiment_config(scenario, config_path, out_dir, seed, threads);
    if (c_validate->parsed()) return wavelab::cmd_validate(cfg);
    if (c_evolve->parsed()) return wavelab::cmd_evolve(cfg);
    if (c_decay->parsed()) return wavelab::cmd_decay(cfg);
    if (c_spectrum->parsed()) return wavelab::cmd_spectrum(cfg);
    if (c_resolvent->parsed()) return wavelab::cmd_resolvent(cfg);
    if (c_rays->parsed()) return wavelab::cmd_rays(cfg);
    if (c_sweep->parsed()) return wavelab::cmd_sweep(cfg);
    throw wavelab::ParameterError("no subcommand given");
  });
}
