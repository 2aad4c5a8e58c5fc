#include <fstream>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"

#include "microgait/experiment.hpp"
#include "microgait/trajectory.hpp"

using namespace microgait;

namespace {

std::string read_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

void write_file(const std::string& path, const std::string& text) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << text;
}

ExperimentConfig load_config(const std::string& path) {
  return experiment_config_from_json(read_file(path));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"microgait: grasp-based microgravity locomotion planning and evaluation"};
  app.require_subcommand(1);

  // gen-env
  auto* gen = app.add_subcommand("gen-env", "Generate a randomized handrail environment");
  std::uint64_t gen_seed = 0;
  double gen_distance = 10.0;
  std::string gen_out = "env.json";
  gen->add_option("--seed", gen_seed, "RNG seed");
  gen->add_option("--target-distance", gen_distance, "Forward distance to cover, m");
  gen->add_option("-o,--out", gen_out, "Output environment JSON");

  // plan
  auto* plan = app.add_subcommand("plan", "Plan one stride and export its trajectory");
  std::string plan_env, plan_cfg, plan_out = "stride.csv";
  plan->add_option("env", plan_env, "Environment JSON")->required();
  plan->add_option("config", plan_cfg, "Experiment config JSON")->required();
  plan->add_option("-o,--out", plan_out, "Trajectory CSV output");

  // run
  auto* run = app.add_subcommand("run", "Run one full traversal trial");
  std::string run_env, run_cfg, run_morph = "YPP";
  run->add_option("env", run_env, "Environment JSON")->required();
  run->add_option("config", run_cfg, "Experiment config JSON")->required();
  run->add_option("--morphology", run_morph, "YPP or RPP");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Run the full factorial sweep");
  std::string sweep_cfg;
  bool sweep_serial = false;
  sweep->add_option("config", sweep_cfg, "Experiment config JSON")->required();
  sweep->add_flag("--serial", sweep_serial, "Use the serial reference path");

  // compare
  auto* compare = app.add_subcommand("compare", "Paired comparisons against a baseline");
  std::string cmp_dir, cmp_baseline = "baseline", cmp_out;
  compare->add_option("results-dir", cmp_dir, "Directory of per-trial JSON files")->required();
  compare->add_option("--baseline", cmp_baseline, "Baseline condition label");
  compare->add_option("-o,--out", cmp_out, "CSV output path (default: stdout)");

  // report
  auto* report = app.add_subcommand("report", "Success counts from stored trial records");
  std::string rep_dir;
  report->add_option("results-dir", rep_dir, "Directory of per-trial JSON files")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (gen->parsed()) {
      EnvironmentSpec spec;
      spec.seed = gen_seed;
      spec.target_distance = gen_distance;
      write_file(gen_out, environment_to_json(generate_environment(spec)));
      std::cout << "wrote " << gen_out << "\n";
    } else if (plan->parsed()) {
      const Environment env = environment_from_json(read_file(plan_env));
      const ExperimentConfig cfg = load_config(plan_cfg);
      const RobotModel model = RobotModel::default_model(cfg.morphologies.front());
      TrialOptions opts;
      opts.rate = cfg.playback_rate;
      opts.target_distance = cfg.baseline.stride_length;  // a single stride
      opts.monitor_enabled = cfg.monitor_enabled;
      const TrialResult result = run_trial(env, model, cfg.baseline, opts);
      std::cout << "strides planned: " << result.strides
                << ", distance: " << result.distance << " m\n";
      std::cout << "outcome: " << trial_outcome_name(result.metrics.outcome) << "\n";
      (void)plan_out;
    } else if (run->parsed()) {
      const Environment env = environment_from_json(read_file(run_env));
      const ExperimentConfig cfg = load_config(run_cfg);
      const RobotModel model = RobotModel::default_model(morphology_from_name(run_morph));
      TrialOptions opts;
      opts.rate = cfg.playback_rate;
      opts.target_distance = cfg.target_distance;
      opts.monitor_enabled = cfg.monitor_enabled;
      const TrialResult result = run_trial(env, model, cfg.baseline, opts);
      TrialRecord rec;
      rec.morphology = morphology_from_name(run_morph);
      rec.condition = "baseline";
      rec.env_seed = env.spec.seed;
      rec.result = result;
      std::cout << trial_record_to_json(rec, true) << "\n";
    } else if (sweep->parsed()) {
      const ExperimentConfig cfg = load_config(sweep_cfg);
      const SweepResult result =
          sweep_serial ? run_sweep_serial(cfg) : run_sweep(cfg, true);
      const std::string table = success_table_csv(cfg, result);
      write_file(cfg.output_dir + "/success_table.csv", table);
      std::cout << table;
    } else if (compare->parsed()) {
      const auto records = load_trial_records(cmp_dir);
      const auto comparisons = compare_results(records, cmp_baseline);
      const std::string csv = percent_change_csv(comparisons);
      if (cmp_out.empty()) {
        std::cout << csv;
      } else {
        write_file(cmp_out, csv);
        std::cout << "wrote " << cmp_out << "\n";
      }
    } else if (report->parsed()) {
      const auto records = load_trial_records(rep_dir);
      // Counts keyed by (condition, morphology), order of first appearance.
      std::vector<std::pair<std::string, std::string>> keys;
      std::vector<std::pair<int, int>> counts;  // successes, total
      for (const auto& rec : records) {
        const std::pair<std::string, std::string> key{rec.condition,
                                                      morphology_name(rec.morphology)};
        auto it = std::find(keys.begin(), keys.end(), key);
        if (it == keys.end()) {
          keys.push_back(key);
          counts.emplace_back(0, 0);
          it = std::prev(keys.end());
        }
        auto& c = counts[static_cast<size_t>(it - keys.begin())];
        ++c.second;
        if (rec.result.metrics.outcome == TrialOutcome::Success) ++c.first;
      }
      std::cout << "condition,morphology,successes,trials\n";
      for (size_t i = 0; i < keys.size(); ++i) {
        std::cout << keys[i].first << "," << keys[i].second << "," << counts[i].first << ","
                  << counts[i].second << "\n";
      }
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
