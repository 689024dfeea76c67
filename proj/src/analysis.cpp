#include "ezgreedy/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <stdexcept>

#include "ezgreedy/learners.hpp"

namespace ezg {

namespace {

struct Probe {
  ActionSelector selector;
  std::vector<double> q_row;  // frozen values the greedy branch reads
};

Probe make_probe(const ProbePolicy& policy, int action_count) {
  if (policy.fixed_greedy_action >= action_count)
    throw std::invalid_argument("fixed greedy action out of range");
  std::vector<double> row(static_cast<size_t>(action_count), 0.0);
  if (policy.fixed_greedy_action >= 0) row[static_cast<size_t>(policy.fixed_greedy_action)] = 1.0;
  if (policy.duration) {
    return {ActionSelector::extended(policy.epsilon, policy.duration->build(),
                                     policy.pseudocode_literal),
            std::move(row)};
  }
  return {ActionSelector::plain(policy.epsilon), std::move(row)};
}

int cell_of_observation(const Environment& env, const Observation& obs, int discretization,
                        int cols) {
  if (env.tabular()) {
    int row = 0, col = 0;
    if (!env.state_cell(obs.id, row, col)) return -1;
    return row * cols + col;
  }
  const auto [p0, p1] = env.project(obs);
  const int row = std::min(static_cast<int>(p0 * discretization), discretization - 1);
  const int col = std::min(static_cast<int>(p1 * discretization), discretization - 1);
  return row * cols + col;
}

}  // namespace

FirstVisitGrid first_visit_map(const EnvSpec& spec, const FirstVisitConfig& cfg,
                               std::uint64_t seed) {
  if (cfg.trials < 1) throw std::invalid_argument("first_visit_map: trials must be >= 1");
  if (cfg.steps < 1) throw std::invalid_argument("first_visit_map: steps must be >= 1");

  auto shape_env = make_environment(spec, 0);
  const bool tabular = shape_env->tabular();
  if (tabular && cfg.discretization > 0)
    throw std::invalid_argument("first_visit_map: discretization applies only to continuous "
                                "environments");
  if (!tabular && cfg.discretization < 2)
    throw std::invalid_argument("first_visit_map: continuous environments need a "
                                "discretization >= 2");

  FirstVisitGrid grid;
  if (tabular) {
    const GridShape shape = shape_env->grid_shape();
    grid.rows = shape.rows;
    grid.cols = shape.cols;
  } else {
    grid.rows = grid.cols = cfg.discretization;
  }
  const size_t cells = static_cast<size_t>(grid.rows) * grid.cols;
  grid.mean.assign(cells, 0.0);
  grid.has_state.assign(cells, 0);
  grid.trials = cfg.trials;
  grid.max_steps = cfg.max_steps_cap > 0 ? cfg.max_steps_cap : cfg.steps;
  grid.log_scale = cfg.log_scale;

  if (tabular) {
    for (int s : shape_env->enumerate_states()) {
      int row = 0, col = 0;
      if (shape_env->state_cell(s, row, col))
        grid.has_state[static_cast<size_t>(row) * grid.cols + col] = 1;
    }
  } else {
    std::fill(grid.has_state.begin(), grid.has_state.end(), uint8_t{1});
  }

  std::vector<double> sums(cells, 0.0);
  std::vector<long long> first(cells);
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t t64 = static_cast<std::uint64_t>(trial);
    auto env = make_environment(spec, stream_seed(seed, t64, kStreamEnv));
    SplitMix64 rng(stream_seed(seed, t64, kStreamPolicy));
    Probe probe = make_probe(cfg.policy, env->action_count());

    std::fill(first.begin(), first.end(), -1LL);
    auto record = [&](const Observation& obs, long long step) {
      const int cell = cell_of_observation(*env, obs, cfg.discretization, grid.cols);
      if (cell >= 0 && first[static_cast<size_t>(cell)] < 0)
        first[static_cast<size_t>(cell)] = step;
    };

    long long t = 0;
    record(env->reset(), t);
    while (t < cfg.steps) {
      const int action = probe.selector.select(probe.q_row, rng);
      const StepResult res = env->step(action);
      ++t;
      record(res.obs, t);
      if (res.done) {
        probe.selector.episode_end();
        if (t < cfg.steps) record(env->reset(), t);
      }
    }

    for (size_t c = 0; c < cells; ++c) {
      if (!grid.has_state[c]) continue;
      const long long v = first[c] < 0 ? grid.max_steps : std::min(first[c], grid.max_steps);
      sums[c] += static_cast<double>(v);
    }
  }

  for (size_t c = 0; c < cells; ++c) {
    if (grid.has_state[c]) grid.mean[c] = sums[c] / cfg.trials;
  }
  return grid;
}

CoverTimeReport cover_time(const EnvSpec& spec, const CoverTimeConfig& cfg, std::uint64_t seed) {
  if (cfg.trials < 1) throw std::invalid_argument("cover_time: trials must be >= 1");
  if (cfg.budget < 1) throw std::invalid_argument("cover_time: budget must be >= 1");

  auto shape_env = make_environment(spec, 0);
  if (!shape_env->tabular()) throw std::invalid_argument("cover_time: tabular env required");
  const int actions = shape_env->action_count();
  const int states = shape_env->state_count();

  std::vector<uint8_t> actable(static_cast<size_t>(states), 0);
  int pair_count = 0;
  for (int s : shape_env->enumerate_states()) {
    if (shape_env->state_terminal(s)) continue;
    actable[static_cast<size_t>(s)] = 1;
    pair_count += actions;
  }

  CoverTimeReport report;
  report.trials = cfg.trials;
  report.budget = cfg.budget;
  report.pair_count = pair_count;
  report.cover_steps.reserve(static_cast<size_t>(cfg.trials));

  std::vector<uint8_t> visited;
  for (int trial = 0; trial < cfg.trials; ++trial) {
    const std::uint64_t t64 = static_cast<std::uint64_t>(trial);
    auto env = make_environment(spec, stream_seed(seed, t64, kStreamEnv));
    SplitMix64 rng(stream_seed(seed, t64, kStreamPolicy));
    Probe probe = make_probe(cfg.policy, actions);

    visited.assign(static_cast<size_t>(states) * actions, 0);
    int remaining = pair_count;
    long long cover = -1;
    long long t = 0;
    int state = env->reset().id;
    while (t < cfg.budget) {
      const int action = probe.selector.select(probe.q_row, rng);
      uint8_t& mark = visited[static_cast<size_t>(state) * actions + action];
      if (!mark) {
        mark = 1;
        if (--remaining == 0) {
          cover = t + 1;  // this execution is step t+1
          break;
        }
      }
      const StepResult res = env->step(action);
      ++t;
      if (res.done) {
        probe.selector.episode_end();
        if (t >= cfg.budget) break;
        state = env->reset().id;
      } else {
        state = res.obs.id;
      }
    }
    report.cover_steps.push_back(cover >= 0 ? cover : cfg.budget + 1);
    if (cover >= 0) ++report.covered_trials;
  }

  std::vector<long long> sorted = report.cover_steps;
  std::sort(sorted.begin(), sorted.end());
  const long long middle = sorted[sorted.size() / 2];
  if (middle <= cfg.budget) {
    report.median_defined = true;
    report.median = middle;
  }
  return report;
}

std::vector<OptionSpec> primitive_options(int action_count) {
  if (action_count < 1) throw std::invalid_argument("primitive_options: need >= 1 action");
  std::vector<OptionSpec> out;
  out.reserve(static_cast<size_t>(action_count));
  for (int a = 0; a < action_count; ++a) out.push_back(OptionSpec::exactly(a, 1));
  return out;
}

std::vector<OptionSpec> repeat_options_up_to(int action_count, int max_duration) {
  if (action_count < 1) throw std::invalid_argument("repeat_options_up_to: need >= 1 action");
  if (max_duration < 1) throw std::invalid_argument("repeat_options_up_to: need >= 1 step");
  std::vector<OptionSpec> out;
  out.reserve(static_cast<size_t>(action_count) * max_duration);
  for (int a = 0; a < action_count; ++a)
    for (int n = 1; n <= max_duration; ++n) out.push_back(OptionSpec::exactly(a, n));
  return out;
}

namespace {

void validate_options(const std::vector<OptionSpec>& options, int actions) {
  for (const OptionSpec& o : options) {
    if (o.action < 0 || o.action >= actions)
      throw std::invalid_argument("option action out of range");
    if (o.after_exactly && o.k < 1) throw std::invalid_argument("option horizon must be >= 1");
    if (!o.after_exactly && !(o.beta >= 0.0 && o.beta <= 1.0))
      throw std::invalid_argument("option termination probability outside [0, 1]");
  }
}

void validate_greedy_model(double epsilon, GreedyModel greedy,
                           const std::vector<int>& fixed_greedy, int states) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon outside [0, 1]");
  if (greedy == GreedyModel::none && epsilon < 1.0)
    throw std::invalid_argument("greedy model 'none' requires epsilon == 1");
  if (greedy == GreedyModel::fixed && static_cast<int>(fixed_greedy.size()) != states)
    throw std::invalid_argument("fixed greedy table must cover every state");
}

}  // namespace

CoverageResult coverage_check(Environment& env, const std::vector<OptionSpec>& options,
                              double epsilon, GreedyModel greedy,
                              const std::vector<int>& fixed_greedy, int truncation) {
  if (!env.tabular()) throw std::invalid_argument("coverage_check: tabular env required");
  const int S = env.state_count();
  const int A = env.action_count();
  validate_options(options, A);
  validate_greedy_model(epsilon, greedy, fixed_greedy, S);
  if (epsilon > 0.0 && options.empty())
    throw std::invalid_argument("coverage_check: exploration enabled with an empty option set");

  int max_k = 0;
  bool memoryless = false;
  std::vector<uint8_t> mem_can_end(static_cast<size_t>(A), 0);
  for (const OptionSpec& o : options) {
    if (o.after_exactly) {
      max_k = std::max(max_k, o.k);
    } else if (o.beta < 1.0) {
      memoryless = true;
      if (o.beta > 0.0) mem_can_end[static_cast<size_t>(o.action)] = 1;
    } else {
      max_k = std::max(max_k, 1);  // beta == 1 acts as a primitive option
    }
  }
  if (truncation == 0) truncation = max_k;
  if (truncation < max_k)
    throw std::invalid_argument("coverage_check: truncation below an option's exact horizon");

  // Progress encoding: 0 = idle; 1 + a*R + (r-1) = "repeat a for r more
  // steps" (r in 1..R); 1 + A*R + a = "repeat a, memoryless termination".
  const int R = std::max(max_k - 1, 0);
  const int mem_base = 1 + A * R;
  const int P = mem_base + (memoryless ? A : 0);
  const auto exact_atom = [&](int a, int r) { return 1 + a * R + (r - 1); };
  const auto mem_atom = [&](int a) { return mem_base + a; };

  std::vector<uint8_t> visited(static_cast<size_t>(S) * P, 0);
  std::vector<uint8_t> covered(static_cast<size_t>(S) * A, 0);

  std::deque<int64_t> frontier;
  const auto push = [&](int state, int progress) {
    const int64_t node = static_cast<int64_t>(state) * P + progress;
    if (!visited[static_cast<size_t>(node)]) {
      visited[static_cast<size_t>(node)] = 1;
      frontier.push_back(node);
    }
  };

  // Success edges of executing `action` from `state` land in `progress`.
  const auto execute = [&](int state, int action, int next_progress) {
    covered[static_cast<size_t>(state) * A + action] = 1;
    for (const Transition& tr : env.transitions(state, action)) {
      if (tr.prob <= 0.0 || tr.done) continue;
      push(tr.next_state, next_progress);
    }
  };

  push(env.reset().id, 0);
  const int depth_limit = env.max_episode_steps();
  for (int depth = 0; depth < depth_limit && !frontier.empty(); ++depth) {
    size_t level = frontier.size();
    while (level-- > 0) {
      const int64_t node = frontier.front();
      frontier.pop_front();
      const int state = static_cast<int>(node / P);
      const int progress = static_cast<int>(node % P);

      if (progress == 0) {
        if (epsilon < 1.0 && greedy != GreedyModel::none) {
          if (greedy == GreedyModel::fixed) {
            const int g = fixed_greedy[static_cast<size_t>(state)];
            if (g >= 0) execute(state, g, 0);
          } else {
            for (int a = 0; a < A; ++a) execute(state, a, 0);
          }
        }
        if (epsilon > 0.0) {
          for (const OptionSpec& o : options) {
            if (o.after_exactly) {
              execute(state, o.action, o.k > 1 ? exact_atom(o.action, o.k - 1) : 0);
            } else {
              if (o.beta > 0.0) execute(state, o.action, 0);
              if (o.beta < 1.0) execute(state, o.action, mem_atom(o.action));
            }
          }
        }
      } else if (progress < mem_base) {
        const int a = (progress - 1) / R;
        const int r = (progress - 1) % R + 1;
        execute(state, a, r > 1 ? exact_atom(a, r - 1) : 0);
      } else {
        const int a = progress - mem_base;
        if (mem_can_end[static_cast<size_t>(a)]) execute(state, a, 0);
        execute(state, a, mem_atom(a));
      }
    }
  }

  CoverageResult result;
  result.truncation = truncation;
  result.state_count = S;
  result.action_count = A;
  for (int s : env.enumerate_states()) {
    if (env.state_terminal(s)) continue;
    if (visited[static_cast<size_t>(s) * P]) result.decision_states.push_back(s);
    for (int a = 0; a < A; ++a) {
      if (covered[static_cast<size_t>(s) * A + a])
        result.reachable.push_back({s, a});
      else
        result.unreachable.push_back({s, a});
    }
  }
  return result;
}

std::vector<long long> option_rollout_visits(Environment& env,
                                             const std::vector<OptionSpec>& options,
                                             double epsilon, GreedyModel greedy,
                                             const std::vector<int>& fixed_greedy,
                                             long long steps, std::uint64_t seed) {
  if (!env.tabular()) throw std::invalid_argument("option_rollout_visits: tabular env required");
  const int S = env.state_count();
  const int A = env.action_count();
  validate_options(options, A);
  validate_greedy_model(epsilon, greedy, fixed_greedy, S);
  if (epsilon > 0.0 && options.empty())
    throw std::invalid_argument("option_rollout_visits: empty option set");

  std::vector<long long> visits(static_cast<size_t>(S) * A, 0);
  SplitMix64 rng(seed);
  int state = env.reset().id;
  // -1: no option; otherwise index into options, with steps_left for exact
  // termination.
  int active = -1;
  int steps_left = 0;
  for (long long t = 0; t < steps; ++t) {
    int action;
    if (active >= 0) {
      action = options[static_cast<size_t>(active)].action;
    } else if (rng.next_double() < epsilon) {
      active = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(options.size())));
      const OptionSpec& o = options[static_cast<size_t>(active)];
      action = o.action;
      steps_left = o.after_exactly ? o.k : 0;
    } else if (greedy == GreedyModel::fixed) {
      action = fixed_greedy[static_cast<size_t>(state)];
      if (action < 0) throw std::logic_error("fixed greedy policy undefined at a visited state");
    } else {
      action = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(A)));
    }

    ++visits[static_cast<size_t>(state) * A + action];
    if (active >= 0) {
      const OptionSpec& o = options[static_cast<size_t>(active)];
      if (o.after_exactly) {
        if (--steps_left == 0) active = -1;
      } else if (rng.next_double() < o.beta) {
        active = -1;
      }
    }

    const StepResult res = env.step(action);
    if (res.done) {
      active = -1;
      state = env.reset().id;
    } else {
      state = res.obs.id;
    }
  }
  return visits;
}

SequenceProbabilityReport sequence_probability_check(double epsilon, int num_actions, int k,
                                                     long long samples, std::uint64_t seed) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("sequence_probability_check: epsilon outside [0, 1]");
  if (num_actions < 2)
    throw std::invalid_argument("sequence_probability_check: need >= 2 actions");
  if (k < 1) throw std::invalid_argument("sequence_probability_check: k must be >= 1");
  if (samples < 1) throw std::invalid_argument("sequence_probability_check: need samples");

  SequenceProbabilityReport report;
  report.epsilon = epsilon;
  report.num_actions = num_actions;
  report.k = k;
  report.samples = samples;
  report.analytic = std::pow(epsilon / num_actions, k);
  if (report.analytic * static_cast<double>(samples) < 100.0)
    throw std::invalid_argument(
        "sequence_probability_check: analytic * samples < 100; raise samples or lower k");

  // Greedy always prefers action 0; the designated sequence cycles through the
  // non-greedy actions, so only the exploration branch can produce it.
  std::vector<double> q_row(static_cast<size_t>(num_actions), 0.0);
  q_row[0] = 1.0;
  std::vector<int> want(static_cast<size_t>(k));
  for (int i = 0; i < k; ++i) want[static_cast<size_t>(i)] = 1 + i % (num_actions - 1);

  SplitMix64 rng(stream_seed(seed, 0, kStreamPolicy));
  for (long long s = 0; s < samples; ++s) {
    bool match = true;
    for (int i = 0; i < k && match; ++i) {
      match = epsilon_greedy_select(epsilon, q_row, rng) == want[static_cast<size_t>(i)];
    }
    if (match) ++report.hits;
  }
  report.empirical = static_cast<double>(report.hits) / static_cast<double>(samples);
  report.standard_error =
      std::sqrt(report.analytic * (1.0 - report.analytic) / static_cast<double>(samples));
  report.relative_error = std::abs(report.empirical - report.analytic) / report.analytic;
  report.z_score = (report.empirical - report.analytic) / report.standard_error;
  return report;
}

}  // namespace ezg
