#pragma once

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "microgait/dynamics_eval.hpp"
#include "microgait/environment.hpp"
#include "microgait/gait_planner.hpp"
#include "microgait/robot_model.hpp"
#include "microgait/stats.hpp"
#include "microgait/whole_body.hpp"

namespace microgait {

constexpr int kConfigSchemaVersion = 1;

// A named single-parameter deviation from the baseline gait.
struct Variant {
  std::string name;
  std::string parameter;  // GaitParams field name
  std::string value;      // number or mode name, parsed per parameter
};

struct ExperimentConfig {
  int schema_version = kConfigSchemaVersion;
  EnvironmentSpec environment;
  std::vector<Morphology> morphologies{Morphology::YPP, Morphology::RPP};
  GaitParams baseline;
  std::vector<Variant> variants;
  int trial_count = 20;
  std::uint64_t seed = 1;
  std::string output_dir = "out";
  double playback_rate = 250.0;  // Hz
  bool monitor_enabled = true;
  double target_distance = 10.0;  // m
};

// The studied deviations: amble, trot, overlap opt, 50% overlap, short
// stride, slow base, low base height.
std::vector<Variant> default_variants();
ExperimentConfig default_experiment_config();

GaitParams apply_variant(const GaitParams& baseline, const Variant& variant);

std::string experiment_config_to_json(const ExperimentConfig& cfg);
ExperimentConfig experiment_config_from_json(const std::string& text);

// FNV-1a over the canonical config serialization (output_dir excluded), per
// condition: the variant label and morphology are folded in.
std::string condition_hash(const ExperimentConfig& cfg, const std::string& condition,
                           Morphology morphology);

struct TrialOptions {
  double rate = 250.0;
  double target_distance = 10.0;
  MonitorThresholds monitor;
  ContactModel contact_model;
  ScoreConfig score_config;
  bool monitor_enabled = true;
  int max_strides = 128;
  // Optional observer invoked with every executed stride trace (used by
  // validation harnesses; does not affect the trial outcome).
  std::function<void(const ExecutionTrace&)> stride_trace_sink;
};

struct TrialResult {
  TrialMetrics metrics;
  int strides = 0;
  double distance = 0.0;  // forward progress achieved, m
  std::string detail;     // human-readable failure context
};

// One traversal: stride planning/coordination/execution repeated until the
// target distance, a planning dead end, or a monitor pause.
TrialResult run_trial(const Environment& env, const RobotModel& model, const GaitParams& params,
                      const TrialOptions& options);

struct TrialRecord {
  int env_index = -1;
  std::uint64_t env_seed = 0;
  Morphology morphology = Morphology::YPP;
  std::string condition;  // "baseline" or a variant name
  std::string config_hash;
  TrialResult result;
};

std::string trial_record_to_json(const TrialRecord& rec, bool with_timestamp = true);
TrialRecord trial_record_from_json(const std::string& text);

struct SweepResult {
  std::vector<TrialRecord> records;  // deterministic order: condition-major
};

// Full factorial sweep (environment x morphology x condition). `parallel`
// selects the OpenMP path; both orderings of execution merge into the same
// record order. Per-trial JSON files in output_dir/trials make reruns
// resumable; MICROGAIT_THREADS caps the worker count.
SweepResult run_sweep(const ExperimentConfig& cfg, bool parallel);
SweepResult run_sweep_serial(const ExperimentConfig& cfg);  // reference path

// Success counts per (condition, morphology), CSV.
std::string success_table_csv(const ExperimentConfig& cfg, const SweepResult& sweep);

struct MetricAccessor {
  std::string name;
  double (*get)(const TrialMetrics&);
};
const std::vector<MetricAccessor>& comparison_metrics();

struct PairedComparison {
  std::string variant;
  Morphology morphology = Morphology::YPP;
  std::string metric;
  std::vector<double> deltas;  // variant - baseline over common successes
  double percent_change = 0.0;
  double t = 0.0;
  double p = 1.0;
  int n_pairs = 0;
  bool significant = false;
  bool available = false;  // false when no common-success terrain exists
};

// Pairs are drawn only from environments where both conditions succeeded,
// matched by environment seed within a morphology.
std::vector<PairedComparison> compare_results(const std::vector<TrialRecord>& records,
                                              const std::string& baseline_label);

// Rows = variants, columns = metrics; one block per morphology. Cells are
// percent change, with "(ns)" on p > 0.05 and "n/a" on empty intersections.
std::string percent_change_csv(const std::vector<PairedComparison>& comparisons);

// Records reloaded from output_dir/trials (for `compare`/`report` on disk).
std::vector<TrialRecord> load_trial_records(const std::string& trials_dir);

}  // namespace microgait
