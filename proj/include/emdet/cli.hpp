#ifndef EMDET_CLI_HPP_
#define EMDET_CLI_HPP_

#include <cstdint>
#include <map>
#include <string>

#include "emdet/budget.hpp"
#include "emdet/em_engine.hpp"
#include "emdet/scene.hpp"

namespace emdet::cli {

struct SynthOptions {
  int count = 100;
  std::uint64_t seed = 1;
  scene::SynthParams params;
  std::string out_path;
  bool force = false;
};

void cmd_synth(const SynthOptions& opts);

struct WeakenOptions {
  std::string in_path;
  std::string out_path;
  weak::WeakKind kind = weak::WeakKind::Tight;
  std::uint64_t seed = 1;
  bool force = false;
};

/// Replaces strong labels with weak ones of the given kind; the removed
/// strong labels go to a "<out>.truth.json" sidecar.
void cmd_weaken(const WeakenOptions& opts);

struct ExperimentConfig {
  std::string train_dataset;
  std::string eval_dataset;
  weak::WeakKind weak_kind = weak::WeakKind::Coarse;
  double strong_fraction = 0.1;
  std::string out_dir;
  em::EmConfig em;
  det::LossConfig loss;
  bool force = false;
  std::string config_text;  // canonical text used for the provenance hash
};

/// Parses a key=value config file (one pair per line, '#' comments).
ExperimentConfig load_experiment_config(const std::string& path);

/// Runs the EM experiment; writes rounds.json, rounds.csv and model.json
/// into out_dir. Returns the report list.
std::vector<em::EmRoundReport> cmd_em(const ExperimentConfig& cfg);

struct EvalOptions {
  std::string model_path;
  std::string dataset_path;
  std::string out_metrics;     // metrics JSON
  std::string out_detections;  // per-record detections JSON (optional, may be empty)
  double score_floor = 0.5;
  double iou_thresh = 0.5;
  bool force = false;
};

eval::Prf cmd_eval(const EvalOptions& opts);

struct BudgetOptions {
  budget::AnnotationPolicy policy;
  double budget_seconds = 43200.0;
  weak::AnnotationCost costs;
  long strong_base = 560;
  std::string out_path;  // allocation JSON (optional, may be empty)
  bool force = false;
};

budget::Allocation cmd_budget(const BudgetOptions& opts);

}  // namespace emdet::cli

#endif
