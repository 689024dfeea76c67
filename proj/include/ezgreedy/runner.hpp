#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ezgreedy/analysis.hpp"
#include "ezgreedy/environment.hpp"
#include "ezgreedy/learners.hpp"

namespace ezg {

struct ExperimentConfig {
  EnvSpec env{};
  LearnerSpec learner{};
  ExplorationSpec exploration{};
  int episodes = 100;
  int trials = 1;
  std::uint64_t seed = 0;
  int greedy_eval_period = 0;  // > 0 -> greedy rollout every that many episodes
  std::string output_dir = "out";
  std::string preset;  // name the config was expanded from ("" = none)
};

// Named hyper-parameter bundles: deep_sea, grid_world, mountain_car, cartpole,
// chain.  See README for the full tables.
std::vector<std::string> run_preset_names();
ExperimentConfig run_preset(const std::string& name);

// Parses a JSON config.  A "preset" field expands first; every explicit field
// then overrides it.  The deep_sea preset keeps epsilon = 1/(size+1) in sync
// with an overridden size unless epsilon itself is given.
ExperimentConfig config_from_json(const std::string& text);
// Fully-resolved echo; feeding it back to config_from_json reproduces cfg.
std::string config_to_json(const ExperimentConfig& cfg);

struct ExperimentResult {
  std::vector<TrialLogs> trials;
};

// Deterministic in (cfg.seed, trial index); independent of the worker count.
ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers = 1);
// learning_curves.csv, summary.csv, greedy_eval.csv (when enabled), and
// resolved_config.json under out_dir.
void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::string& out_dir);

// Mean undiscounted return over the final max(1, round(fraction * episodes))
// episodes of one trial.
double final_window_mean(const TrialLogs& logs, double fraction);

struct SweepSpec {
  ExperimentConfig base{};
  std::string parameter = "mu";  // mu | n_max | lambda | k | epsilon
  std::vector<double> values;
  double final_fraction = 0.1;  // trailing episode window for the metric
  std::string preset;
};

// chain_zeta, chain_uniform, chain_geometric.
std::vector<std::string> sweep_preset_names();
SweepSpec sweep_preset(const std::string& name);
SweepSpec sweep_from_json(const std::string& text);
std::string sweep_to_json(const SweepSpec& spec);

struct SweepPoint {
  double value = 0.0;
  double mean_return = 0.0;  // across trials, of per-trial final-window means
  double std_error = 0.0;    // sample standard error across trials
};

// One sub-run per value; every value reuses the same (seed, trial) pairs so
// points are paired.  Returns one point per value, in input order.
std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int workers = 1);
void write_sweep_outputs(const SweepSpec& spec, const std::vector<SweepPoint>& points,
                         const std::string& out_dir);

struct FirstVisitJob {
  EnvSpec env{};
  FirstVisitConfig cfg{};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string preset;
};

// deep_sea, grid_world, mountain_car, cartpole, open_grid.  The deep_sea
// preset keeps steps = 500000 * size in sync with an overridden size unless
// steps itself is given.
std::vector<std::string> first_visit_preset_names();
FirstVisitJob first_visit_preset(const std::string& name);
FirstVisitJob first_visit_from_json(const std::string& text);
std::string first_visit_to_json(const FirstVisitJob& job);
// first_visit.csv (bare matrix), first_visit.pgm, first_visit.json metadata.
void write_first_visit_outputs(const FirstVisitJob& job, const FirstVisitGrid& grid,
                               const std::string& out_dir);

struct CoverTimeJob {
  EnvSpec env{};
  CoverTimeConfig cfg{};
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string preset;
};

// open_grid_repeat (temporally-extended probe), open_grid_plain.
std::vector<std::string> cover_time_preset_names();
CoverTimeJob cover_time_preset(const std::string& name);
CoverTimeJob cover_time_from_json(const std::string& text);
std::string cover_time_to_json(const CoverTimeJob& job);
void write_cover_time_outputs(const CoverTimeJob& job, const CoverTimeReport& report,
                              const std::string& out_dir);

// Option families for coverage configs: "primitive" is one single-step option
// per action; "repeat" is every (action, n) with n <= max_duration (0 -> the
// smaller of the default duration cap and the episode step limit); "fixed" is
// one option per action, each lasting exactly k steps; "single" repeats one
// chosen action for exactly k steps; "list" passes options verbatim.
struct CoverageJob {
  EnvSpec env{};
  std::string family = "repeat";
  int max_duration = 0;
  int action = 0;
  int k = 1;
  std::vector<OptionSpec> list;
  double epsilon = 1.0;
  GreedyModel greedy = GreedyModel::none;
  std::vector<int> fixed_greedy;
  int truncation = 0;
  long long mc_steps = 0;  // > 0 -> Monte-Carlo cross-check rollout
  std::uint64_t seed = 0;
  std::string output_dir = "out";
  std::string preset;
};

// chain_multiples, grid_world_primitive, grid_world_repeat, deep_sea_primitive,
// deep_sea_repeat.
std::vector<std::string> coverage_preset_names();
CoverageJob coverage_preset(const std::string& name);
CoverageJob coverage_from_json(const std::string& text);
std::string coverage_to_json(const CoverageJob& job);

struct CoverageRun {
  CoverageResult result;
  std::vector<OptionSpec> options;
  bool mc_ran = false;
  // Pairs the rollout visited despite being flagged unreachable (soundness
  // violations; must stay empty) and reachable pairs the rollout missed.
  std::vector<StateActionPair> mc_unreachable_visited;
  int mc_reachable_missed = 0;
};

CoverageRun run_coverage(const CoverageJob& job);
// coverage.json; optionally transitions.tsv with the exact one-step model.
void write_coverage_outputs(const CoverageJob& job, const CoverageRun& run,
                            const std::string& out_dir, bool dump_transitions = false);

std::string to_string(GreedyModel greedy);
GreedyModel greedy_model_from_string(const std::string& name);

}  // namespace ezg
