#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "ezgreedy/duration.hpp"
#include "ezgreedy/environment.hpp"
#include "ezgreedy/exploration.hpp"
#include "ezgreedy/rng.hpp"
#include "ezgreedy/value_function.hpp"

namespace ezg {

struct QLearningConfig {
  double alpha = 0.1;
  double gamma = 0.99;
  double initial_value = 0.0;
};

struct SarsaLambdaConfig {
  double alpha = 0.005;
  double gamma = 0.99;
  double lambda = 0.9;
  int fourier_order = 5;
  double weight_init_variance = 0.0;
  bool per_feature_lr = true;
  // Weight/trace/feature storage: "double" (default) or "float".  float
  // halves the per-step memory traffic, which pays off on bases with tens of
  // thousands of features; dot products still accumulate in double.
  std::string precision = "double";
};

struct EpisodeLog {
  int episode = 0;
  double undiscounted_return = 0.0;
  double discounted_return = 0.0;
  int steps = 0;
  bool goal_reached = false;  // any strictly positive reward in the episode
  int first_goal_step = -1;   // 1-based step of the first positive reward
};

enum class PolicyKind { eps_greedy, ez_greedy };

std::string to_string(PolicyKind kind);
PolicyKind policy_kind_from_string(const std::string& name);

struct ExplorationSpec {
  PolicyKind policy = PolicyKind::ez_greedy;
  double epsilon = 0.1;
  DurationSpec duration{};  // ez_greedy only
  bool pseudocode_literal = false;
  TieBreak tie_break = TieBreak::uniform;
};

// Behaviour policy for training loops: the plain one-step selector, or the
// temporally-extended controller when a duration distribution is configured.
// Both paths share the (q_row, rng) -> action interface so learners stay
// agnostic of which is running.
class ActionSelector {
 public:
  static ActionSelector plain(double epsilon, TieBreak tie_break = TieBreak::uniform);
  static ActionSelector extended(double epsilon, DurationDistribution duration,
                                 bool pseudocode_literal = false,
                                 TieBreak tie_break = TieBreak::uniform);

  int select(std::span<const double> q_row, SplitMix64& rng);
  void episode_end();

  bool temporally_extended() const { return ez_.has_value(); }
  // nullptr on the plain path.
  const EzGreedyPolicy* controller() const { return ez_ ? &*ez_ : nullptr; }

 private:
  ActionSelector(double epsilon, TieBreak tie_break, std::optional<EzGreedyPolicy> ez);

  double epsilon_;
  TieBreak tie_break_;
  std::optional<EzGreedyPolicy> ez_;
};

ActionSelector make_selector(const ExplorationSpec& spec);

// One tabular Q-learning backup:
//   Q(x,a) += alpha * (r + gamma * (done ? 0 : max_a' Q(x',a')) - Q(x,a)).
void q_learning_update(TabularQ& q, int state, int action, double reward, int next_state,
                       bool done, const QLearningConfig& cfg);

EpisodeLog run_q_learning_episode(Environment& env, TabularQ& q, ActionSelector& selector,
                                  const QLearningConfig& cfg, SplitMix64& rng, int episode_index);

// Caller-owned scratch so per-episode runs stay allocation-free; sized lazily.
template <typename Scalar>
struct BasicSarsaScratch {
  std::vector<Scalar> traces;       // action-major, matching weight layout
  std::vector<Scalar> features;     // phi(x)
  std::vector<Scalar> next_features;
  std::vector<double> q_values;     // one per action
  std::vector<Scalar> alpha_scaled; // alpha / lr_scale per feature
  // Actions taken so far this episode; the others' trace blocks are still
  // exactly zero, so their decay and weight updates can be skipped outright.
  std::vector<char> block_live;
};

using SarsaScratch = BasicSarsaScratch<double>;
using SarsaScratchF = BasicSarsaScratch<float>;

// Backward-view SARSA(lambda) with accumulating traces.  Traces are zeroed at
// episode start; each step the TD error uses the committed next action (chosen
// with the pre-update weights), the executed pair's trace accumulates phi(x),
// weights move by alpha_scaled * delta * trace, and traces decay by
// gamma*lambda after the weight update.  With lambda == 0 the trace machinery
// drops out exactly: only the executed action's weights move, by
// alpha_scaled * delta * phi(x).  Throws std::runtime_error when the update
// goes non-finite.
template <typename Scalar>
EpisodeLog run_sarsa_lambda_episode(Environment& env, BasicLinearQ<Scalar>& q,
                                    BasicSarsaScratch<Scalar>& scratch, ActionSelector& selector,
                                    const SarsaLambdaConfig& cfg, SplitMix64& rng,
                                    int episode_index);

// Episode rollouts without learning (greedy evaluation, behaviour probes).
EpisodeLog run_policy_episode(Environment& env, const TabularQ& q, ActionSelector& selector,
                              double gamma, SplitMix64& rng, int episode_index);
template <typename Scalar>
EpisodeLog run_policy_episode(Environment& env, const BasicLinearQ<Scalar>& q,
                              BasicSarsaScratch<Scalar>& scratch, ActionSelector& selector,
                              double gamma, SplitMix64& rng, int episode_index);

struct LearnerSpec {
  std::string kind = "q_learning";  // q_learning | sarsa_lambda
  QLearningConfig q{};
  SarsaLambdaConfig sarsa{};
};

// Stream purposes hashed together with (seed, trial); keeping them distinct
// makes every consumer's randomness independent of the others' consumption.
inline constexpr std::uint64_t kStreamEnv = 0;
inline constexpr std::uint64_t kStreamPolicy = 1;
inline constexpr std::uint64_t kStreamInit = 2;
inline constexpr std::uint64_t kStreamEval = 3;

struct TrialLogs {
  std::vector<EpisodeLog> episodes;
  // Greedy rollouts taken every greedy_eval_period training episodes;
  // EpisodeLog::episode holds the training episode index at evaluation time.
  std::vector<EpisodeLog> greedy_evals;
};

// Runs one trial end to end, deterministically in (seed, trial).
TrialLogs run_training(const EnvSpec& env_spec, const LearnerSpec& learner,
                       const ExplorationSpec& exploration, int episodes, std::uint64_t seed,
                       int trial, int greedy_eval_period = 0);

}  // namespace ezg
