#include <cmath>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "ezgreedy/learners.hpp"

using namespace ezg;

namespace {

// Plain transcription of the backward-view update, kept deliberately naive
// (full trace matrix, no blocking) so the optimized learner has an
// independent reference.  Requires a deterministic selector (epsilon = 0,
// first-index ties) so no rng synchronization is needed.
struct ReferenceSarsa {
  FourierBasis basis;
  std::vector<std::vector<double>> w;   // [action][feature]
  std::vector<std::vector<double>> tr;  // traces
  SarsaLambdaConfig cfg;

  explicit ReferenceSarsa(FourierBasis b, std::vector<std::vector<double>> init,
                          SarsaLambdaConfig c)
      : basis(std::move(b)), w(std::move(init)), cfg(c) {}

  double value(const std::vector<double>& phi, int a) const {
    double s = 0.0;
    for (std::size_t i = 0; i < phi.size(); ++i) s += w[static_cast<std::size_t>(a)][i] * phi[i];
    return s;
  }
  int greedy(const std::vector<double>& phi) const {
    int best = 0;
    double bv = value(phi, 0);
    for (int a = 1; a < static_cast<int>(w.size()); ++a) {
      const double v = value(phi, a);
      if (v > bv) {
        bv = v;
        best = a;
      }
    }
    return best;
  }

  void run_episode(Environment& env) {
    const std::size_t f = static_cast<std::size_t>(basis.feature_count());
    tr.assign(w.size(), std::vector<double>(f, 0.0));
    std::vector<double> asc(f);
    for (std::size_t i = 0; i < f; ++i)
      asc[i] = cfg.per_feature_lr ? cfg.alpha / basis.lr_scales()[i] : cfg.alpha;

    auto obs = env.reset();
    std::vector<double> phi = basis.features(obs.vec);
    int a = greedy(phi);
    for (;;) {
      const auto res = env.step(a);
      double target = res.reward;
      std::vector<double> phi_next;
      int a_next = -1;
      if (!res.done) {
        phi_next = basis.features(res.obs.vec);
        a_next = greedy(phi_next);
        target += cfg.gamma * value(phi_next, a_next);
      }
      const double delta = target - value(phi, a);
      for (std::size_t b = 0; b < w.size(); ++b) {
        for (std::size_t i = 0; i < f; ++i) {
          double t = tr[b][i];
          if (static_cast<int>(b) == a) t += phi[i];
          w[b][i] += asc[i] * delta * t;
          tr[b][i] = t * cfg.gamma * cfg.lambda;
        }
      }
      if (res.done) break;
      phi = std::move(phi_next);
      a = a_next;
    }
  }
};

EnvSpec mc_spec(int max_steps) {
  EnvSpec s;
  s.kind = "mountain_car";
  s.max_episode_steps = max_steps;
  return s;
}

void check_against_reference(double lambda) {
  EnvSpec spec = mc_spec(40);
  SarsaLambdaConfig cfg;
  cfg.alpha = 0.05;
  cfg.gamma = 0.9;
  cfg.lambda = lambda;
  cfg.fourier_order = 2;
  cfg.weight_init_variance = 0.01;

  auto env = make_environment(spec, 0);
  FourierBasis basis(cfg.fourier_order, env->observation_bounds());
  LinearQ q(basis, env->action_count());
  SplitMix64 init_rng(99);
  q.init_weights_normal(cfg.weight_init_variance, init_rng);

  std::vector<std::vector<double>> init(static_cast<std::size_t>(env->action_count()));
  for (int a = 0; a < env->action_count(); ++a)
    init[static_cast<std::size_t>(a)].assign(q.weights(a).begin(), q.weights(a).end());

  auto selector = ActionSelector::plain(0.0, TieBreak::first_index);
  SarsaScratch scratch;
  SplitMix64 rng(1);
  const auto log = run_sarsa_lambda_episode(*env, q, scratch, selector, cfg, rng, 0);
  CHECK(log.steps == 40);

  ReferenceSarsa ref(basis, std::move(init), cfg);
  auto ref_env = make_environment(spec, 0);
  ref.run_episode(*ref_env);

  double worst = 0.0;
  for (int a = 0; a < env->action_count(); ++a) {
    const auto w = q.weights(a);
    for (std::size_t i = 0; i < w.size(); ++i)
      worst = std::max(worst, std::abs(w[i] - ref.w[static_cast<std::size_t>(a)][i]));
  }
  // Identical arithmetic up to dot-product summation order.
  CHECK(worst < 1e-10);
}

}  // namespace

TEST_CASE("one q-learning backup moves the cell toward its target") {
  TabularQ q(2, 2);
  q.at(1, 0) = 4.0;
  q.at(1, 1) = 6.0;
  QLearningConfig cfg{0.5, 0.9, 0.0};
  q_learning_update(q, 0, 1, 2.0, 1, false, cfg);
  // target = 2 + 0.9 * 6 = 7.4; cell moves half-way from 0.
  CHECK(q.value(0, 1) == doctest::Approx(3.7).epsilon(1e-15));
  // Terminal transitions do not bootstrap.
  q_learning_update(q, 0, 0, 2.0, 1, true, cfg);
  CHECK(q.value(0, 0) == doctest::Approx(1.0).epsilon(1e-15));
}

TEST_CASE("q-learning sweeps converge to the exact fixed point of a toy mdp") {
  // Three cells with deposits 0, 1, 2.  Action 0 advances (reward 0; leaving
  // the last cell pays 2 and terminates), action 1 stops and pays the
  // deposit.  Optimal values under gamma = 0.9: V = (1.62, 1.8, 2.0).
  TabularQ q(3, 2);
  QLearningConfig cfg{1.0, 0.9, 0.0};  // alpha = 1 turns sweeps into value iteration
  for (int sweep = 0; sweep < 5; ++sweep) {
    q_learning_update(q, 0, 0, 0.0, 1, false, cfg);
    q_learning_update(q, 1, 0, 0.0, 2, false, cfg);
    q_learning_update(q, 2, 0, 2.0, 0, true, cfg);
    q_learning_update(q, 0, 1, 0.0, 0, true, cfg);
    q_learning_update(q, 1, 1, 1.0, 0, true, cfg);
    q_learning_update(q, 2, 1, 2.0, 0, true, cfg);
  }
  CHECK(q.max_value(0) == doctest::Approx(1.62).epsilon(1e-12));
  CHECK(q.max_value(1) == doctest::Approx(1.8).epsilon(1e-12));
  CHECK(q.max_value(2) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(q.value(0, 0) == doctest::Approx(1.62).epsilon(1e-12));
  CHECK(q.value(1, 0) == doctest::Approx(1.8).epsilon(1e-12));

  // A smaller step size reaches the same fixed point, just more slowly.
  TabularQ q2(3, 2);
  QLearningConfig slow{0.25, 0.9, 0.0};
  for (int sweep = 0; sweep < 400; ++sweep) {
    q_learning_update(q2, 0, 0, 0.0, 1, false, slow);
    q_learning_update(q2, 1, 0, 0.0, 2, false, slow);
    q_learning_update(q2, 2, 0, 2.0, 0, true, slow);
    q_learning_update(q2, 0, 1, 0.0, 0, true, slow);
    q_learning_update(q2, 1, 1, 1.0, 0, true, slow);
    q_learning_update(q2, 2, 1, 2.0, 0, true, slow);
  }
  for (int s = 0; s < 3; ++s)
    CHECK(q2.max_value(s) == doctest::Approx(q.max_value(s)).epsilon(1e-9));
}

TEST_CASE("sarsa with lambda 0 reproduces the naive one-step reference") {
  check_against_reference(0.0);
}

TEST_CASE("sarsa with accumulating traces reproduces the naive reference") {
  check_against_reference(0.5);
}

TEST_CASE("non-finite updates raise instead of silently corrupting weights") {
  EnvSpec spec = mc_spec(5000);
  SarsaLambdaConfig cfg;
  cfg.alpha = 1e6;  // absurd step size: delta feedback explodes within steps
  cfg.gamma = 0.99;
  cfg.lambda = 0.9;
  cfg.fourier_order = 2;
  cfg.weight_init_variance = 1.0;
  cfg.per_feature_lr = false;

  auto env = make_environment(spec, 0);
  LinearQ q(FourierBasis(cfg.fourier_order, env->observation_bounds()), env->action_count());
  SplitMix64 init_rng(3);
  q.init_weights_normal(cfg.weight_init_variance, init_rng);
  auto selector = ActionSelector::plain(0.1);
  SarsaScratch scratch;
  SplitMix64 rng(4);
  CHECK_THROWS_AS(run_sarsa_lambda_episode(*env, q, scratch, selector, cfg, rng, 7),
                  std::runtime_error);
}

TEST_CASE("episode logs record returns, discounting and the first goal step") {
  EnvSpec spec;
  spec.kind = "chain";
  spec.num_blocks = 2;  // cells 0 (1) 0 0 (2); always-advance pays 2 on step 5
  auto env = make_environment(spec, 0);
  TabularQ q(env->state_count(), env->action_count());
  for (int s = 0; s < q.state_count(); ++s) q.at(s, 0) = 1.0;  // prefer advance
  auto selector = ActionSelector::plain(0.0, TieBreak::first_index);
  SplitMix64 rng(1);
  const auto log = run_policy_episode(*env, q, selector, 0.5, rng, 12);
  CHECK(log.episode == 12);
  CHECK(log.steps == 5);
  CHECK(log.undiscounted_return == 2.0);
  CHECK(log.discounted_return == doctest::Approx(0.0625 * 2.0).epsilon(1e-15));  // 0.5^4 * 2
  CHECK(log.goal_reached);
  CHECK(log.first_goal_step == 5);
}

TEST_CASE("step-limit cuts are logged without a goal") {
  EnvSpec spec;
  spec.kind = "grid_world";
  spec.width = 5;
  spec.height = 5;
  spec.max_episode_steps = 30;
  auto env = make_environment(spec, 0);
  TabularQ q(env->state_count(), env->action_count());
  QLearningConfig cfg;
  auto selector = ActionSelector::plain(0.0, TieBreak::first_index);  // always "up"
  SplitMix64 rng(1);
  const auto log = run_q_learning_episode(*env, q, selector, cfg, rng, 0);
  CHECK(log.steps == 30);
  CHECK_FALSE(log.goal_reached);
  CHECK(log.first_goal_step == -1);
  CHECK(log.undiscounted_return == 0.0);
}

TEST_CASE("training trials are deterministic in seed and trial") {
  EnvSpec spec;
  spec.kind = "grid_world";
  spec.width = 9;
  spec.height = 9;
  spec.max_episode_steps = 200;
  LearnerSpec learner;
  learner.kind = "q_learning";
  ExplorationSpec expl;
  expl.policy = PolicyKind::ez_greedy;
  expl.epsilon = 0.3;
  expl.duration.kind = DurationKind::zeta;
  expl.duration.cap = 100;

  const auto a = run_training(spec, learner, expl, 20, 77, 0);
  const auto b = run_training(spec, learner, expl, 20, 77, 0);
  const auto c = run_training(spec, learner, expl, 20, 77, 1);
  REQUIRE(a.episodes.size() == 20);
  bool identical = true, differ = false;
  for (int e = 0; e < 20; ++e) {
    identical &= a.episodes[static_cast<std::size_t>(e)].steps ==
                     b.episodes[static_cast<std::size_t>(e)].steps &&
                 a.episodes[static_cast<std::size_t>(e)].undiscounted_return ==
                     b.episodes[static_cast<std::size_t>(e)].undiscounted_return;
    differ |= a.episodes[static_cast<std::size_t>(e)].steps !=
              c.episodes[static_cast<std::size_t>(e)].steps;
  }
  CHECK(identical);
  CHECK(differ);
}

TEST_CASE("greedy evaluations run on schedule with a separate rng stream") {
  EnvSpec spec;
  spec.kind = "grid_world";
  spec.width = 7;
  spec.height = 7;
  spec.max_episode_steps = 100;
  LearnerSpec learner;
  learner.kind = "q_learning";
  ExplorationSpec expl;
  expl.policy = PolicyKind::eps_greedy;
  expl.epsilon = 0.2;

  const auto logs = run_training(spec, learner, expl, 10, 5, 0, /*greedy_eval_period=*/5);
  REQUIRE(logs.greedy_evals.size() == 2);
  CHECK(logs.greedy_evals[0].episode == 4);
  CHECK(logs.greedy_evals[1].episode == 9);
  // The training stream is untouched by evaluations: a run without them
  // produces identical training episodes.
  const auto plain = run_training(spec, learner, expl, 10, 5, 0);
  for (int e = 0; e < 10; ++e) {
    CHECK(plain.episodes[static_cast<std::size_t>(e)].steps ==
          logs.episodes[static_cast<std::size_t>(e)].steps);
  }
}

TEST_CASE("learner and environment families must match") {
  LearnerSpec q;
  q.kind = "q_learning";
  LearnerSpec sarsa;
  sarsa.kind = "sarsa_lambda";
  ExplorationSpec expl;
  EnvSpec cont = mc_spec(50);
  EnvSpec tab;
  tab.kind = "chain";
  CHECK_THROWS_AS(run_training(cont, q, expl, 1, 0, 0), std::invalid_argument);
  CHECK_THROWS_AS(run_training(tab, sarsa, expl, 1, 0, 0), std::invalid_argument);

  LearnerSpec bad = sarsa;
  bad.sarsa.precision = "half";
  CHECK_THROWS_AS(run_training(cont, bad, expl, 1, 0, 0), std::invalid_argument);
  LearnerSpec unknown;
  unknown.kind = "dyna";
  CHECK_THROWS_AS(run_training(tab, unknown, expl, 1, 0, 0), std::invalid_argument);
}

TEST_CASE("single-precision training runs and stays finite") {
  EnvSpec spec = mc_spec(300);
  LearnerSpec learner;
  learner.kind = "sarsa_lambda";
  learner.sarsa.fourier_order = 3;
  learner.sarsa.precision = "float";
  ExplorationSpec expl;
  expl.policy = PolicyKind::ez_greedy;
  expl.epsilon = 0.1;
  expl.duration.cap = 100;
  const auto logs = run_training(spec, learner, expl, 3, 11, 0);
  REQUIRE(logs.episodes.size() == 3);
  for (const auto& e : logs.episodes) {
    CHECK(e.steps > 0);
    CHECK(std::isfinite(e.discounted_return));
  }
}

TEST_CASE("selectors expose the temporally-extended controller only when built with one") {
  auto plain = ActionSelector::plain(0.5);
  CHECK_FALSE(plain.temporally_extended());
  CHECK(plain.controller() == nullptr);

  auto ext = ActionSelector::extended(0.5, DurationDistribution::fixed(4));
  CHECK(ext.temporally_extended());
  REQUIRE(ext.controller() != nullptr);
  CHECK(ext.controller()->duration().mean() == 4.0);

  ExplorationSpec spec;
  spec.policy = PolicyKind::eps_greedy;
  CHECK_FALSE(make_selector(spec).temporally_extended());
  spec.policy = PolicyKind::ez_greedy;
  CHECK(make_selector(spec).temporally_extended());

  CHECK_THROWS_AS(ActionSelector::plain(1.5), std::invalid_argument);
  CHECK_THROWS_AS(ActionSelector::plain(-0.1), std::invalid_argument);
}

TEST_CASE("policy kind names round-trip") {
  CHECK(policy_kind_from_string(to_string(PolicyKind::eps_greedy)) == PolicyKind::eps_greedy);
  CHECK(policy_kind_from_string(to_string(PolicyKind::ez_greedy)) == PolicyKind::ez_greedy);
  CHECK_THROWS_AS(policy_kind_from_string("boltzmann"), std::invalid_argument);
}
