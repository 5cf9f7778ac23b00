#pragma once

// End-to-end runs: data, initial network, train, certify, fine-tune on
// counter-examples, certify again. Every run writes a manifest from which it
// can be replayed byte-for-byte.

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "lipvor/config.hpp"
#include "lipvor/heat.hpp"
#include "lipvor/training.hpp"

namespace lipvor {

struct DemoConfig {
  std::string demo = "heat";  // heat | tabular
  HeatScenario heat;
  std::string tabular_csv;  // empty: synthetic scores
  std::size_t tabular_rows = 488;
  std::uint64_t tabular_generator_seed = 0;
  std::uint64_t split_seed = 0;
  std::vector<int> hidden{10};
  Activation activation = Activation::Tanh;
  std::uint64_t init_seed = 0;
  TrainingConfig training;
  std::vector<MonotonicityConstraint> constraints;
  std::size_t max_rounds = 3;
  std::size_t initial_points = 0;  // 0: every training input
  std::size_t lipvor_budget = 2000;
  double exploration_p = 0.1;
  std::uint64_t lipvor_seed = 0;
  bool joint = true;
  std::size_t fraction_samples = 100000;
};

/// Recorded settings for the rod and the synthetic four-score table.
DemoConfig default_heat_demo();
DemoConfig default_tabular_demo();

/// Overrides `base` with the keys present; unknown keys are rejected.
DemoConfig demo_config_from(const KeyValueConfig& cfg, DemoConfig base);
KeyValueConfig to_key_values(const DemoConfig& config);

struct DemoOutcome {
  DemoConfig config;
  Dataset data;
  BoxDomain domain = BoxDomain::unit(1);
  Network initial;
  LoopResult loop;
  SplitMetrics test;
  nlohmann::json report;
  std::vector<std::string> files;
};

/// Loads the dataset a demo config describes, with its input domain.
std::pair<Dataset, BoxDomain> demo_dataset(const DemoConfig& config);
Network demo_initial_network(const DemoConfig& config, int input_dim);

/// Runs the demo; when `out_dir` is non-empty writes report.json,
/// training_round<k>.csv, points.csv, cells.csv, model.json, state.svg (2-D)
/// and manifest.json there.
DemoOutcome run_demo(const DemoConfig& config, const std::string& out_dir, std::ostream* log = nullptr);

/// Reruns the demo recorded in a manifest into `out_dir`.
DemoOutcome replay_manifest(const std::string& manifest_path, const std::string& out_dir,
                            std::ostream* log = nullptr);

}  // namespace lipvor
