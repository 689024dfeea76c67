#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ezgreedy/duration.hpp"
#include "ezgreedy/environment.hpp"
#include "ezgreedy/exploration.hpp"

namespace ezg {

// Rollout policy for visitation probes (no learning): epsilon-exploration over
// a frozen greedy choice.  The greedy branch either always picks
// fixed_greedy_action, or, when that is -1, draws uniformly (the tie-broken
// argmax over an all-zero value table).
struct ProbePolicy {
  double epsilon = 1.0;
  std::optional<DurationSpec> duration;  // engaged -> temporally-extended
  bool pseudocode_literal = false;
  int fixed_greedy_action = -1;
};

struct FirstVisitConfig {
  ProbePolicy policy{};
  int trials = 100;
  long long steps = 5000;       // per-trial budget, cumulative across episodes
  long long max_steps_cap = 0;  // unseen/clip value; 0 -> steps
  int discretization = 0;       // continuous envs only (cells per axis)
  bool log_scale = false;       // emission hint, values stay linear here
};

struct FirstVisitGrid {
  int rows = 0;
  int cols = 0;
  std::vector<double> mean;       // row-major mean first-visit step, in [0, cap]
  std::vector<uint8_t> has_state; // 0 for cells no state maps to (mean stays 0)
  int trials = 0;
  long long max_steps = 0;        // the cap actually applied
  bool log_scale = false;

  double at(int row, int col) const { return mean[static_cast<size_t>(row) * cols + col]; }
};

FirstVisitGrid first_visit_map(const EnvSpec& spec, const FirstVisitConfig& cfg,
                               std::uint64_t seed);

struct CoverTimeConfig {
  ProbePolicy policy{};
  int trials = 101;
  long long budget = 1000000;  // steps per trial, cumulative across episodes
};

struct CoverTimeReport {
  std::vector<long long> cover_steps;  // per trial; budget+1 marks "not covered"
  int trials = 0;
  int covered_trials = 0;
  long long budget = 0;
  int pair_count = 0;  // state-action pairs over non-terminal states
  bool median_defined = false;  // requires the middle order statistic to be real
  long long median = 0;
};

CoverTimeReport cover_time(const EnvSpec& spec, const CoverTimeConfig& cfg, std::uint64_t seed);

// Action-repeat option for the coverage checker: repeat `action`, terminating
// either after exactly k steps or each step with probability beta.
struct OptionSpec {
  int action = 0;
  bool after_exactly = true;
  int k = 1;
  double beta = 1.0;

  static OptionSpec exactly(int action, int k) { return {action, true, k, 1.0}; }
  static OptionSpec per_step(int action, double beta) { return {action, false, 1, beta}; }
};

// One single-step option per action: plain epsilon-greedy's exploration set.
std::vector<OptionSpec> primitive_options(int action_count);
// Every (action, n) pair with n <= max_duration: the action-repeat family of a
// full-support duration distribution truncated at max_duration.
std::vector<OptionSpec> repeat_options_up_to(int action_count, int max_duration);

// How the exploit branch is modelled during reachability search:
//   none         - only exploration edges (valid for every greedy policy, and
//                  the natural model at epsilon = 1)
//   fixed        - greedy follows a supplied state -> action table
//   uniform_ties - greedy over an all-zero table: every action possible
enum class GreedyModel { none, fixed, uniform_ties };

struct StateActionPair {
  int state = 0;
  int action = 0;
};

struct CoverageResult {
  std::vector<StateActionPair> reachable;
  std::vector<StateActionPair> unreachable;
  std::vector<int> decision_states;  // states reachable with no option in progress
  int truncation = 0;                // longest after_exactly horizon searched
  int state_count = 0;
  int action_count = 0;
};

// Breadth-first reachability over (environment state x option progress),
// bounded by the episode step limit.  An edge exists wherever the mixed policy
// (1-eps) * greedy + eps * uniform-over-options assigns positive probability.
// Pairs partition: every (non-terminal state, action) lands in exactly one of
// reachable/unreachable.
CoverageResult coverage_check(Environment& env, const std::vector<OptionSpec>& options,
                              double epsilon, GreedyModel greedy,
                              const std::vector<int>& fixed_greedy = {}, int truncation = 0);

// Monte-Carlo companion to coverage_check: rolls the same mixed policy out for
// `steps` environment steps and returns per-pair visit counts (state * A + a).
std::vector<long long> option_rollout_visits(Environment& env,
                                             const std::vector<OptionSpec>& options,
                                             double epsilon, GreedyModel greedy,
                                             const std::vector<int>& fixed_greedy,
                                             long long steps, std::uint64_t seed);

struct SequenceProbabilityReport {
  double epsilon = 0.0;
  int num_actions = 0;
  int k = 0;
  long long samples = 0;
  double analytic = 0.0;  // (epsilon / num_actions)^k
  long long hits = 0;
  double empirical = 0.0;
  double standard_error = 0.0;  // binomial, at the analytic rate
  double relative_error = 0.0;
  double z_score = 0.0;
};

// Frequency of a designated length-k all-exploratory action sequence under
// standard epsilon-greedy with a fixed greedy action excluded from the
// sequence; `samples` independent k-step blocks.  Requires
// analytic * samples >= 100.
SequenceProbabilityReport sequence_probability_check(double epsilon, int num_actions, int k,
                                                     long long samples, std::uint64_t seed);

}  // namespace ezg
