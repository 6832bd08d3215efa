#pragma once

#include <memory>
#include <string>
#include <vector>

#include "wavelab/config.hpp"
#include "wavelab/decay.hpp"
#include "wavelab/evolve.hpp"
#include "wavelab/floquet.hpp"
#include "wavelab/radial.hpp"
#include "wavelab/rays.hpp"
#include "wavelab/scenario_library.hpp"

namespace wavelab {

inline constexpr const char* kVersion = "0.1.0";

struct ExperimentConfig {
  IniDoc doc;
  std::string out_dir = "wavelab-out";
  std::uint64_t seed = 1;
  int threads = 0;
};

// Builds the merged config: builtin scenario text (if any), then the config
// file (if any), then explicit overrides.
ExperimentConfig make_experiment_config(const std::string& scenario_name,
                                        const std::string& config_path,
                                        const std::string& out_dir, std::uint64_t seed,
                                        int threads);

// Scenario + stepper resolved from the [metric]/[obstacle]/[glue]/[plan]
// sections.
struct LabSetup {
  Scenario scenario;
  std::shared_ptr<const Grid> grid;
  StepPlan plan;
  std::shared_ptr<const Stepper> stepper;
};
LabSetup make_setup(const ExperimentConfig& cfg);

// Atomic text write (temp + rename); returns the FNV checksum of the bytes.
std::uint64_t write_file_atomic(const std::string& path, const std::string& content);

// Command entry points shared by the CLI and the python module. Each writes
// its report files plus a run manifest and returns the process exit code:
// 0 ok, 1 check failed, 2 input error, 3 numerical failure.
int cmd_validate(const ExperimentConfig& cfg);
int cmd_evolve(const ExperimentConfig& cfg);
int cmd_decay(const ExperimentConfig& cfg);
int cmd_spectrum(const ExperimentConfig& cfg);
int cmd_resolvent(const ExperimentConfig& cfg);
int cmd_rays(const ExperimentConfig& cfg);
int cmd_sweep(const ExperimentConfig& cfg);
int cmd_report(const std::vector<std::string>& manifest_paths, const std::string& out_dir);

// Maps exceptions from command bodies to exit codes.
int run_guarded(const std::function<int()>& body);

}  // namespace wavelab
