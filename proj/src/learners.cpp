#include "ezgreedy/learners.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <utility>

namespace ezg {

namespace {

// Shared per-episode return bookkeeping.
struct ReturnTracker {
  double gamma;
  double undiscounted = 0.0;
  double discounted = 0.0;
  double discount = 1.0;
  int steps = 0;
  int first_goal_step = -1;

  void add(double reward) {
    ++steps;
    undiscounted += reward;
    discounted += discount * reward;
    discount *= gamma;
    if (reward > 0.0 && first_goal_step < 0) first_goal_step = steps;
  }

  EpisodeLog log(int episode_index) const {
    return {episode_index, undiscounted, discounted, steps, first_goal_step >= 0,
            first_goal_step};
  }
};

}  // namespace

std::string to_string(PolicyKind kind) {
  return kind == PolicyKind::eps_greedy ? "eps_greedy" : "ez_greedy";
}

PolicyKind policy_kind_from_string(const std::string& name) {
  if (name == "eps_greedy") return PolicyKind::eps_greedy;
  if (name == "ez_greedy") return PolicyKind::ez_greedy;
  throw std::invalid_argument("unknown policy kind: " + name);
}

ActionSelector::ActionSelector(double epsilon, TieBreak tie_break,
                               std::optional<EzGreedyPolicy> ez)
    : epsilon_(epsilon), tie_break_(tie_break), ez_(std::move(ez)) {
  if (!(epsilon_ >= 0.0 && epsilon_ <= 1.0))
    throw std::invalid_argument("ActionSelector: epsilon outside [0, 1]");
}

ActionSelector ActionSelector::plain(double epsilon, TieBreak tie_break) {
  return ActionSelector(epsilon, tie_break, std::nullopt);
}

ActionSelector ActionSelector::extended(double epsilon, DurationDistribution duration,
                                        bool pseudocode_literal, TieBreak tie_break) {
  return ActionSelector(
      epsilon, tie_break,
      EzGreedyPolicy(epsilon, std::move(duration), pseudocode_literal, tie_break));
}

int ActionSelector::select(std::span<const double> q_row, SplitMix64& rng) {
  if (ez_) return ez_->select(q_row, rng);
  return epsilon_greedy_select(epsilon_, q_row, rng, tie_break_);
}

void ActionSelector::episode_end() {
  if (ez_) ez_->episode_end();
}

ActionSelector make_selector(const ExplorationSpec& spec) {
  if (spec.policy == PolicyKind::eps_greedy)
    return ActionSelector::plain(spec.epsilon, spec.tie_break);
  return ActionSelector::extended(spec.epsilon, spec.duration.build(), spec.pseudocode_literal,
                                  spec.tie_break);
}

void q_learning_update(TabularQ& q, int state, int action, double reward, int next_state,
                       bool done, const QLearningConfig& cfg) {
  const double target = reward + (done ? 0.0 : cfg.gamma * q.max_value(next_state));
  double& cell = q.at(state, action);
  cell += cfg.alpha * (target - cell);
}

EpisodeLog run_q_learning_episode(Environment& env, TabularQ& q, ActionSelector& selector,
                                  const QLearningConfig& cfg, SplitMix64& rng,
                                  int episode_index) {
  ReturnTracker tracker{cfg.gamma};
  int state = env.reset().id;
  for (;;) {
    const int action = selector.select(q.row(state), rng);
    const StepResult res = env.step(action);
    q_learning_update(q, state, action, res.reward, res.obs.id, res.done, cfg);
    tracker.add(res.reward);
    if (res.done) break;
    state = res.obs.id;
  }
  selector.episode_end();
  return tracker.log(episode_index);
}

namespace {

template <typename Scalar>
void ensure_sarsa_scratch(BasicSarsaScratch<Scalar>& scratch, const BasicLinearQ<Scalar>& q,
                          const SarsaLambdaConfig& cfg) {
  const size_t f = static_cast<size_t>(q.feature_count());
  const size_t total = f * static_cast<size_t>(q.action_count());
  scratch.traces.assign(cfg.lambda == 0.0 ? 0 : total, Scalar{0});
  scratch.features.resize(f);
  scratch.next_features.resize(f);
  scratch.q_values.resize(static_cast<size_t>(q.action_count()));
  scratch.block_live.assign(static_cast<size_t>(q.action_count()), 0);
  scratch.alpha_scaled.resize(f);
  const auto& scales = q.basis().lr_scales();
  for (size_t i = 0; i < f; ++i) {
    scratch.alpha_scaled[i] =
        static_cast<Scalar>(cfg.per_feature_lr ? cfg.alpha / scales[i] : cfg.alpha);
  }
}

[[noreturn]] void divergence(int episode_index, int step) {
  throw std::runtime_error("sarsa_lambda diverged (non-finite update) at episode " +
                           std::to_string(episode_index) + ", step " + std::to_string(step));
}

// One action block of the backward-view update, specialized at compile time
// on whether this block's trace absorbs phi(x) (Taken) and whether the pass
// should also evaluate Q(x', next_action) against the freshly written
// weights (Probe) -- the value the next step's TD error needs.  All
// arithmetic stays in Scalar so the loop vectorizes without widening
// conversions; the sixteen fixed partial sums keep the probe dot product
// deterministic, with the lane reduction in double.
template <typename Scalar, bool Taken, bool Probe>
double sarsa_block_pass(Scalar* w, Scalar* tr, const Scalar* asc, const Scalar* phi,
                        const Scalar* phi_next, size_t f, Scalar delta, Scalar decay) {
  Scalar acc[16] = {};
  const size_t head = f / 16 * 16;
  for (size_t i = 0; i < head; i += 16) {
    for (size_t k = 0; k < 16; ++k) {
      const size_t ix = i + k;
      Scalar t = tr[ix];
      if constexpr (Taken) t += phi[ix];
      w[ix] += asc[ix] * delta * t;
      tr[ix] = t * decay;
      if constexpr (Probe) acc[k] += w[ix] * phi_next[ix];
    }
  }
  for (size_t ix = head; ix < f; ++ix) {
    Scalar t = tr[ix];
    if constexpr (Taken) t += phi[ix];
    w[ix] += asc[ix] * delta * t;
    tr[ix] = t * decay;
    if constexpr (Probe) acc[0] += w[ix] * phi_next[ix];
  }
  double q_next = 0.0;
  if constexpr (Probe) {
    for (Scalar part : acc) q_next += static_cast<double>(part);
  }
  return q_next;
}

// Probe-only dot product (16 fixed partial sums, reduced in double).
template <typename Scalar>
double block_dot(const Scalar* w, const Scalar* phi_next, size_t f) {
  Scalar acc[16] = {};
  const size_t head = f / 16 * 16;
  for (size_t i = 0; i < head; i += 16) {
    for (size_t k = 0; k < 16; ++k) acc[k] += w[i + k] * phi_next[i + k];
  }
  for (size_t ix = head; ix < f; ++ix) acc[0] += w[ix] * phi_next[ix];
  double q_next = 0.0;
  for (Scalar part : acc) q_next += static_cast<double>(part);
  return q_next;
}

// Applies one backward-view update to every action block; returns
// Q(x', next_action) under the updated weights (0 when next_action < 0).
// With lambda == 0 (empty trace buffer) only the executed action's weights
// move, by alpha_scaled * delta * phi(x), exactly.
template <typename Scalar>
double sarsa_apply_update(BasicLinearQ<Scalar>& q, BasicSarsaScratch<Scalar>& scratch,
                          int action, int next_action, double delta, double decay) {
  const size_t f = static_cast<size_t>(q.feature_count());
  const int actions = q.action_count();
  const Scalar* asc = scratch.alpha_scaled.data();
  const Scalar* phi = scratch.features.data();
  const Scalar* phi_next = scratch.next_features.data();
  const Scalar sdelta = static_cast<Scalar>(delta);
  const Scalar sdecay = static_cast<Scalar>(decay);
  const bool lambda_zero = scratch.traces.empty();
  double q_next = 0.0;

  for (int b = 0; b < actions; ++b) {
    Scalar* w = q.weights(b).data();
    const bool taken = b == action;
    const bool probe = b == next_action;
    if (lambda_zero) {
      if (taken) {
        for (size_t i = 0; i < f; ++i) w[i] += asc[i] * sdelta * phi[i];
      }
      if (probe) q_next = block_dot(w, phi_next, f);
      continue;
    }
    if (!scratch.block_live[static_cast<size_t>(b)]) {
      // Never taken this episode: the trace block is exactly zero, so the
      // decay and the weight move are both no-ops.
      if (probe) q_next = block_dot(w, phi_next, f);
      continue;
    }
    Scalar* tr = scratch.traces.data() + b * f;
    if (taken) {
      q_next += probe ? sarsa_block_pass<Scalar, true, true>(w, tr, asc, phi, phi_next, f,
                                                             sdelta, sdecay)
                      : sarsa_block_pass<Scalar, true, false>(w, tr, asc, phi, phi_next, f,
                                                              sdelta, sdecay);
    } else {
      q_next += probe ? sarsa_block_pass<Scalar, false, true>(w, tr, asc, phi, phi_next, f,
                                                              sdelta, sdecay)
                      : sarsa_block_pass<Scalar, false, false>(w, tr, asc, phi, phi_next, f,
                                                               sdelta, sdecay);
    }
  }
  return q_next;
}

}  // namespace

template <typename Scalar>
EpisodeLog run_sarsa_lambda_episode(Environment& env, BasicLinearQ<Scalar>& q,
                                    BasicSarsaScratch<Scalar>& scratch, ActionSelector& selector,
                                    const SarsaLambdaConfig& cfg, SplitMix64& rng,
                                    int episode_index) {
  ensure_sarsa_scratch(scratch, q, cfg);
  const FourierBasis& basis = q.basis();
  const double decay = cfg.gamma * cfg.lambda;

  ReturnTracker tracker{cfg.gamma};
  Observation obs = env.reset();
  basis.features(obs.vec, std::span<Scalar>(scratch.features));
  q.values(scratch.features, scratch.q_values);
  int action = selector.select(scratch.q_values, rng);
  // Q(x, a) under the weights the update below will treat as current; kept
  // in sync incrementally because every weight write passes through
  // sarsa_apply_update.
  double q_sa = scratch.q_values[action];

  for (;;) {
    const StepResult res = env.step(action);
    tracker.add(res.reward);

    // TD error with the current weights; the next action is chosen now (with
    // these same weights) and committed, so behaviour matches the target.
    double target = res.reward;
    int next_action = -1;
    if (!res.done) {
      basis.features(res.obs.vec, std::span<Scalar>(scratch.next_features));
      q.values(scratch.next_features, scratch.q_values);
      next_action = selector.select(scratch.q_values, rng);
      target += cfg.gamma * scratch.q_values[next_action];
    }
    const double delta = target - q_sa;
    if (!std::isfinite(delta)) divergence(episode_index, tracker.steps);

    scratch.block_live[static_cast<size_t>(action)] = 1;
    q_sa = sarsa_apply_update(q, scratch, action, next_action, delta, decay);

    if (res.done) break;
    scratch.features.swap(scratch.next_features);
    action = next_action;
  }
  selector.episode_end();

  for (int a = 0; a < q.action_count(); ++a) {
    for (Scalar w : q.weights(a)) {
      if (!std::isfinite(w)) divergence(episode_index, tracker.steps);
    }
  }
  return tracker.log(episode_index);
}

template EpisodeLog run_sarsa_lambda_episode<double>(Environment&, BasicLinearQ<double>&,
                                                     BasicSarsaScratch<double>&, ActionSelector&,
                                                     const SarsaLambdaConfig&, SplitMix64&, int);
template EpisodeLog run_sarsa_lambda_episode<float>(Environment&, BasicLinearQ<float>&,
                                                    BasicSarsaScratch<float>&, ActionSelector&,
                                                    const SarsaLambdaConfig&, SplitMix64&, int);

EpisodeLog run_policy_episode(Environment& env, const TabularQ& q, ActionSelector& selector,
                              double gamma, SplitMix64& rng, int episode_index) {
  ReturnTracker tracker{gamma};
  int state = env.reset().id;
  for (;;) {
    const int action = selector.select(q.row(state), rng);
    const StepResult res = env.step(action);
    tracker.add(res.reward);
    if (res.done) break;
    state = res.obs.id;
  }
  selector.episode_end();
  return tracker.log(episode_index);
}

template <typename Scalar>
EpisodeLog run_policy_episode(Environment& env, const BasicLinearQ<Scalar>& q,
                              BasicSarsaScratch<Scalar>& scratch, ActionSelector& selector,
                              double gamma, SplitMix64& rng, int episode_index) {
  const FourierBasis& basis = q.basis();
  scratch.features.resize(static_cast<size_t>(q.feature_count()));
  scratch.q_values.resize(static_cast<size_t>(q.action_count()));

  ReturnTracker tracker{gamma};
  Observation obs = env.reset();
  for (;;) {
    basis.features(obs.vec, std::span<Scalar>(scratch.features));
    q.values(scratch.features, scratch.q_values);
    const int action = selector.select(scratch.q_values, rng);
    const StepResult res = env.step(action);
    tracker.add(res.reward);
    if (res.done) break;
    obs = res.obs;
  }
  selector.episode_end();
  return tracker.log(episode_index);
}

template EpisodeLog run_policy_episode<double>(Environment&, const BasicLinearQ<double>&,
                                               BasicSarsaScratch<double>&, ActionSelector&, double,
                                               SplitMix64&, int);
template EpisodeLog run_policy_episode<float>(Environment&, const BasicLinearQ<float>&,
                                              BasicSarsaScratch<float>&, ActionSelector&, double,
                                              SplitMix64&, int);

TrialLogs run_training(const EnvSpec& env_spec, const LearnerSpec& learner,
                       const ExplorationSpec& exploration, int episodes, std::uint64_t seed,
                       int trial, int greedy_eval_period) {
  if (episodes < 1) throw std::invalid_argument("run_training: episodes must be >= 1");
  if (trial < 0) throw std::invalid_argument("run_training: trial must be >= 0");
  if (learner.kind != "q_learning" && learner.kind != "sarsa_lambda")
    throw std::invalid_argument("run_training: unknown learner kind: " + learner.kind);

  const std::uint64_t t = static_cast<std::uint64_t>(trial);
  const std::uint64_t env_seed = stream_seed(seed, t, kStreamEnv);
  SplitMix64 policy_rng(stream_seed(seed, t, kStreamPolicy));
  SplitMix64 init_rng(stream_seed(seed, t, kStreamInit));
  SplitMix64 eval_rng(stream_seed(seed, t, kStreamEval));

  auto env = make_environment(env_spec, env_seed);
  ActionSelector selector = make_selector(exploration);

  TrialLogs logs;
  logs.episodes.reserve(static_cast<size_t>(episodes));

  // The evaluation environment shares env_seed so construction-time structure
  // (e.g. randomized action assignments) matches the training instance.
  std::unique_ptr<Environment> eval_env;
  std::optional<ActionSelector> eval_selector;
  if (greedy_eval_period > 0) {
    eval_env = make_environment(env_spec, env_seed);
    eval_selector = ActionSelector::plain(0.0, exploration.tie_break);
  }

  if (learner.kind == "q_learning") {
    if (!env->tabular())
      throw std::invalid_argument("q_learning requires a tabular environment");
    TabularQ q(env->state_count(), env->action_count(), learner.q.initial_value);
    for (int e = 0; e < episodes; ++e) {
      logs.episodes.push_back(
          run_q_learning_episode(*env, q, selector, learner.q, policy_rng, e));
      if (greedy_eval_period > 0 && (e + 1) % greedy_eval_period == 0) {
        logs.greedy_evals.push_back(
            run_policy_episode(*eval_env, q, *eval_selector, learner.q.gamma, eval_rng, e));
      }
    }
  } else {
    if (env->tabular())
      throw std::invalid_argument("sarsa_lambda requires a continuous environment");
    if (learner.sarsa.precision != "double" && learner.sarsa.precision != "float")
      throw std::invalid_argument("run_training: unknown sarsa precision: " +
                                  learner.sarsa.precision);
    auto run_linear = [&]<typename Scalar>() {
      FourierBasis basis(learner.sarsa.fourier_order, env->observation_bounds());
      BasicLinearQ<Scalar> q(std::move(basis), env->action_count());
      q.init_weights_normal(learner.sarsa.weight_init_variance, init_rng);
      BasicSarsaScratch<Scalar> scratch;
      for (int e = 0; e < episodes; ++e) {
        logs.episodes.push_back(
            run_sarsa_lambda_episode(*env, q, scratch, selector, learner.sarsa, policy_rng, e));
        if (greedy_eval_period > 0 && (e + 1) % greedy_eval_period == 0) {
          logs.greedy_evals.push_back(run_policy_episode(*eval_env, q, scratch, *eval_selector,
                                                         learner.sarsa.gamma, eval_rng, e));
        }
      }
    };
    if (learner.sarsa.precision == "float") {
      run_linear.operator()<float>();
    } else {
      run_linear.operator()<double>();
    }
  }
  return logs;
}

}  // namespace ezg
