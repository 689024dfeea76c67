#include "ezgreedy/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <mutex>
#include <stdexcept>
#include <thread>

#include "json.hpp"

#include "ezgreedy/io.hpp"

namespace ezg {

namespace {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

[[noreturn]] void bad_config(const std::string& what) {
  throw std::invalid_argument("config: " + what);
}

std::string to_string(TieBreak tie_break) {
  return tie_break == TieBreak::uniform ? "uniform" : "first_index";
}

TieBreak tie_break_from_string(const std::string& name) {
  if (name == "uniform") return TieBreak::uniform;
  if (name == "first_index") return TieBreak::first_index;
  bad_config("unknown tie_break '" + name + "'");
}

Json parse_json(const std::string& text) {
  try {
    return Json::parse(text);
  } catch (const Json::parse_error& err) {
    bad_config(std::string("invalid JSON: ") + err.what());
  }
}

// ---------------------------------------------------------------------------
// Field-wise application: only keys present in the JSON touch the struct, so
// presets expand first and explicit fields override.  Unknown keys throw.
// ---------------------------------------------------------------------------

void apply_env(EnvSpec& env, const Json& j) {
  if (!j.is_object()) bad_config("env must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      env.kind = value.get<std::string>();
    else if (key == "max_episode_steps")
      env.max_episode_steps = value.get<int>();
    else if (key == "num_blocks")
      env.num_blocks = value.get<int>();
    else if (key == "size")
      env.size = value.get<int>();
    else if (key == "randomized")
      env.randomized = value.get<bool>();
    else if (key == "width")
      env.width = value.get<int>();
    else if (key == "height")
      env.height = value.get<int>();
    else if (key == "goal_row")
      env.goal_row = value.get<int>();
    else if (key == "goal_col")
      env.goal_col = value.get<int>();
    else if (key == "terminate_on_wall")
      env.terminate_on_wall = value.get<bool>();
    else if (key == "length")
      env.length = value.get<int>();
    else if (key == "reset_jitter")
      env.reset_jitter = value.get<bool>();
    else
      bad_config("unknown env field '" + key + "'");
  }
}

Json env_json(const EnvSpec& env) {
  Json j;
  j["kind"] = env.kind;
  j["max_episode_steps"] = env.max_episode_steps;
  if (env.kind == "chain") {
    j["num_blocks"] = env.num_blocks;
  } else if (env.kind == "deep_sea") {
    j["size"] = env.size;
    j["randomized"] = env.randomized;
  } else if (env.kind == "grid_world") {
    j["width"] = env.width;
    j["height"] = env.height;
    j["goal_row"] = env.goal_row;
    j["goal_col"] = env.goal_col;
  } else if (env.kind == "open_grid") {
    j["width"] = env.width;
    j["height"] = env.height;
    j["terminate_on_wall"] = env.terminate_on_wall;
  } else if (env.kind == "unidirectional_chain") {
    j["length"] = env.length;
  } else if (env.kind == "cartpole_swingup") {
    j["reset_jitter"] = env.reset_jitter;
  }
  return j;
}

void apply_duration(DurationSpec& duration, const Json& j) {
  if (!j.is_object()) bad_config("duration must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      duration.kind = duration_kind_from_string(value.get<std::string>());
    else if (key == "mu")
      duration.mu = value.get<double>();
    else if (key == "n_max")
      duration.n_max = value.get<int>();
    else if (key == "lambda")
      duration.lambda = value.get<double>();
    else if (key == "k")
      duration.k = value.get<int>();
    else if (key == "cap")
      duration.cap = value.get<int>();
    else if (key == "allow_heavy_tail")
      duration.allow_heavy_tail = value.get<bool>();
    else
      bad_config("unknown duration field '" + key + "'");
  }
}

Json duration_json(const DurationSpec& duration) {
  Json j;
  j["kind"] = to_string(duration.kind);
  switch (duration.kind) {
    case DurationKind::zeta:
      j["mu"] = duration.mu;
      j["allow_heavy_tail"] = duration.allow_heavy_tail;
      break;
    case DurationKind::uniform:
      j["n_max"] = duration.n_max;
      break;
    case DurationKind::geometric:
      j["lambda"] = duration.lambda;
      break;
    case DurationKind::fixed:
      j["k"] = duration.k;
      break;
  }
  j["cap"] = duration.cap;
  return j;
}

void apply_exploration(ExplorationSpec& exploration, const Json& j) {
  if (!j.is_object()) bad_config("exploration must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "policy")
      exploration.policy = policy_kind_from_string(value.get<std::string>());
    else if (key == "epsilon")
      exploration.epsilon = value.get<double>();
    else if (key == "duration")
      apply_duration(exploration.duration, value);
    else if (key == "pseudocode_literal")
      exploration.pseudocode_literal = value.get<bool>();
    else if (key == "tie_break")
      exploration.tie_break = tie_break_from_string(value.get<std::string>());
    else
      bad_config("unknown exploration field '" + key + "'");
  }
}

Json exploration_json(const ExplorationSpec& exploration) {
  Json j;
  j["policy"] = to_string(exploration.policy);
  j["epsilon"] = exploration.epsilon;
  if (exploration.policy == PolicyKind::ez_greedy) {
    j["duration"] = duration_json(exploration.duration);
    j["pseudocode_literal"] = exploration.pseudocode_literal;
  }
  j["tie_break"] = to_string(exploration.tie_break);
  return j;
}

void apply_learner(LearnerSpec& learner, const Json& j) {
  if (!j.is_object()) bad_config("learner must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "kind")
      learner.kind = value.get<std::string>();
    else if (key == "alpha")
      learner.q.alpha = learner.sarsa.alpha = value.get<double>();
    else if (key == "gamma")
      learner.q.gamma = learner.sarsa.gamma = value.get<double>();
    else if (key == "initial_value")
      learner.q.initial_value = value.get<double>();
    else if (key == "lambda")
      learner.sarsa.lambda = value.get<double>();
    else if (key == "fourier_order")
      learner.sarsa.fourier_order = value.get<int>();
    else if (key == "weight_init_variance")
      learner.sarsa.weight_init_variance = value.get<double>();
    else if (key == "per_feature_lr")
      learner.sarsa.per_feature_lr = value.get<bool>();
    else if (key == "precision")
      learner.sarsa.precision = value.get<std::string>();
    else
      bad_config("unknown learner field '" + key + "'");
  }
  if (learner.kind != "q_learning" && learner.kind != "sarsa_lambda")
    bad_config("unknown learner kind '" + learner.kind + "'");
  if (learner.sarsa.precision != "double" && learner.sarsa.precision != "float")
    bad_config("learner precision must be 'double' or 'float'");
}

Json learner_json(const LearnerSpec& learner) {
  Json j;
  j["kind"] = learner.kind;
  if (learner.kind == "q_learning") {
    j["alpha"] = learner.q.alpha;
    j["gamma"] = learner.q.gamma;
    j["initial_value"] = learner.q.initial_value;
  } else {
    j["alpha"] = learner.sarsa.alpha;
    j["gamma"] = learner.sarsa.gamma;
    j["lambda"] = learner.sarsa.lambda;
    j["fourier_order"] = learner.sarsa.fourier_order;
    j["weight_init_variance"] = learner.sarsa.weight_init_variance;
    j["per_feature_lr"] = learner.sarsa.per_feature_lr;
    j["precision"] = learner.sarsa.precision;
  }
  return j;
}

void validate_config(const ExperimentConfig& cfg) {
  if (cfg.episodes < 1) bad_config("episodes must be >= 1");
  if (cfg.trials < 1) bad_config("trials must be >= 1");
  if (cfg.greedy_eval_period < 0) bad_config("greedy_eval_period must be >= 0");
}

ExperimentConfig parse_config(const Json& j) {
  if (!j.is_object()) bad_config("top level must be an object");
  ExperimentConfig cfg;
  if (auto it = j.find("preset"); it != j.end()) cfg = run_preset(it->get<std::string>());
  bool epsilon_explicit = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "preset")
      continue;
    else if (key == "env")
      apply_env(cfg.env, value);
    else if (key == "learner")
      apply_learner(cfg.learner, value);
    else if (key == "exploration") {
      apply_exploration(cfg.exploration, value);
      epsilon_explicit = value.is_object() && value.contains("epsilon");
    } else if (key == "episodes")
      cfg.episodes = value.get<int>();
    else if (key == "trials")
      cfg.trials = value.get<int>();
    else if (key == "seed")
      cfg.seed = value.get<std::uint64_t>();
    else if (key == "greedy_eval_period")
      cfg.greedy_eval_period = value.get<int>();
    else if (key == "output_dir")
      cfg.output_dir = value.get<std::string>();
    else
      bad_config("unknown field '" + key + "'");
  }
  if (cfg.preset == "deep_sea" && cfg.env.kind == "deep_sea" && !epsilon_explicit)
    cfg.exploration.epsilon = 1.0 / (cfg.env.size + 1);
  validate_config(cfg);
  return cfg;
}

Json config_json(const ExperimentConfig& cfg) {
  Json j;
  if (!cfg.preset.empty()) j["preset"] = cfg.preset;
  j["env"] = env_json(cfg.env);
  j["learner"] = learner_json(cfg.learner);
  j["exploration"] = exploration_json(cfg.exploration);
  j["episodes"] = cfg.episodes;
  j["trials"] = cfg.trials;
  j["seed"] = cfg.seed;
  j["greedy_eval_period"] = cfg.greedy_eval_period;
  j["output_dir"] = cfg.output_dir;
  return j;
}

// Runs `jobs` tasks on up to `workers` threads via a shared claim counter;
// tasks write only to their own slot, the first exception is rethrown after
// the pool drains.
template <typename Fn>
void run_pool(int jobs, int workers, Fn&& task) {
  if (jobs <= 0) return;
  if (workers < 1) throw std::invalid_argument("workers must be >= 1");
  workers = std::min(workers, jobs);
  if (workers == 1) {
    for (int i = 0; i < jobs; ++i) task(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  auto loop = [&] {
    for (;;) {
      const int i = next.fetch_add(1);
      if (i >= jobs) return;
      try {
        task(i);
      } catch (...) {
        std::scoped_lock lock(error_mutex);
        if (!error) error = std::current_exception();
        return;
      }
    }
  };
  {
    std::vector<std::jthread> pool;
    pool.reserve(static_cast<size_t>(workers));
    for (int w = 0; w < workers; ++w) pool.emplace_back(loop);
  }
  if (error) std::rethrow_exception(error);
}

std::string curve_csv(const std::vector<TrialLogs>& trials, bool greedy_evals) {
  std::string csv = "trial,episode,return,discounted_return,steps,goal_reached\n";
  for (size_t t = 0; t < trials.size(); ++t) {
    const auto& logs = greedy_evals ? trials[t].greedy_evals : trials[t].episodes;
    for (const EpisodeLog& e : logs) {
      csv += std::to_string(t);
      csv += ',';
      csv += std::to_string(e.episode);
      csv += ',';
      csv += format_double(e.undiscounted_return);
      csv += ',';
      csv += format_double(e.discounted_return);
      csv += ',';
      csv += std::to_string(e.steps);
      csv += e.goal_reached ? ",1\n" : ",0\n";
    }
  }
  return csv;
}

void write_file(const fs::path& dir, const char* name, const std::string& contents) {
  write_text_file((dir / name).string(), contents);
}

double mean_of(const std::vector<double>& values) {
  double sum = 0.0;
  for (double v : values) sum += v;
  return sum / static_cast<double>(values.size());
}

double median_of(std::vector<double> values) {
  std::sort(values.begin(), values.end());
  const size_t n = values.size();
  return n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
}

}  // namespace

std::vector<std::string> run_preset_names() {
  return {"deep_sea", "grid_world", "mountain_car", "cartpole", "chain"};
}

ExperimentConfig run_preset(const std::string& name) {
  ExperimentConfig cfg;
  cfg.preset = name;
  cfg.exploration.policy = PolicyKind::ez_greedy;
  cfg.exploration.duration = DurationSpec{};  // zeta, mu = 2, cap 10000
  if (name == "deep_sea") {
    cfg.env.kind = "deep_sea";
    cfg.env.size = 10;
    cfg.learner.kind = "q_learning";
    cfg.learner.q.alpha = 1.0;
    cfg.learner.q.gamma = 0.99;
    cfg.exploration.epsilon = 1.0 / (cfg.env.size + 1);
    cfg.episodes = 2000;
    cfg.trials = 5;
  } else if (name == "grid_world") {
    cfg.env.kind = "grid_world";
    cfg.env.max_episode_steps = 1000;
    cfg.learner.kind = "q_learning";
    cfg.learner.q.alpha = 0.1;
    cfg.learner.q.gamma = 0.99;
    cfg.exploration.epsilon = 0.1;
    cfg.exploration.tie_break = TieBreak::first_index;
    cfg.episodes = 5000;
    cfg.trials = 30;
  } else if (name == "mountain_car") {
    cfg.env.kind = "mountain_car";
    cfg.env.max_episode_steps = 5000;
    cfg.learner.kind = "sarsa_lambda";
    cfg.learner.sarsa.alpha = 0.005;
    cfg.learner.sarsa.gamma = 0.99;
    cfg.learner.sarsa.lambda = 0.9;
    cfg.learner.sarsa.fourier_order = 5;
    cfg.learner.sarsa.weight_init_variance = 0.0;
    cfg.exploration.epsilon = 0.05;
    cfg.exploration.tie_break = TieBreak::first_index;
    cfg.episodes = 5000;
    cfg.trials = 30;
  } else if (name == "cartpole") {
    cfg.env.kind = "cartpole_swingup";
    cfg.env.max_episode_steps = 1000;
    cfg.learner.kind = "sarsa_lambda";
    cfg.learner.sarsa.alpha = 0.0005;
    cfg.learner.sarsa.gamma = 0.99;
    cfg.learner.sarsa.lambda = 0.7;
    cfg.learner.sarsa.fourier_order = 7;
    cfg.learner.sarsa.weight_init_variance = 0.001;
    // The order-7 five-dimensional basis has 32768 features per action;
    // float storage keeps the per-step working set inside L2.
    cfg.learner.sarsa.precision = "float";
    cfg.exploration.epsilon = 0.01;
    cfg.episodes = 1000;
    cfg.trials = 30;
  } else if (name == "chain") {
    cfg.env.kind = "chain";
    cfg.env.num_blocks = 10;
    cfg.env.max_episode_steps = 50;
    cfg.learner.kind = "q_learning";
    cfg.learner.q.alpha = 0.1;
    cfg.learner.q.gamma = 0.99;
    cfg.exploration.epsilon = 0.15;
    cfg.episodes = 1000;
    cfg.trials = 50;
  } else {
    throw std::invalid_argument("unknown run preset '" + name + "'");
  }
  return cfg;
}

ExperimentConfig config_from_json(const std::string& text) {
  return parse_config(parse_json(text));
}

std::string config_to_json(const ExperimentConfig& cfg) {
  return config_json(cfg).dump(2) + "\n";
}

ExperimentResult run_experiment(const ExperimentConfig& cfg, int workers) {
  validate_config(cfg);
  ExperimentResult result;
  result.trials.resize(static_cast<size_t>(cfg.trials));
  run_pool(cfg.trials, workers, [&](int t) {
    result.trials[static_cast<size_t>(t)] =
        run_training(cfg.env, cfg.learner, cfg.exploration, cfg.episodes, cfg.seed, t,
                     cfg.greedy_eval_period);
  });
  return result;
}

void write_experiment_outputs(const ExperimentConfig& cfg, const ExperimentResult& result,
                              const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir, "learning_curves.csv", curve_csv(result.trials, false));

  std::string summary = "episode,mean_return,median_return\n";
  std::vector<double> returns(result.trials.size());
  for (int ep = 0; ep < cfg.episodes; ++ep) {
    for (size_t t = 0; t < result.trials.size(); ++t)
      returns[t] = result.trials[t].episodes[static_cast<size_t>(ep)].undiscounted_return;
    summary += std::to_string(ep);
    summary += ',';
    summary += format_double(mean_of(returns));
    summary += ',';
    summary += format_double(median_of(returns));
    summary += '\n';
  }
  write_file(dir, "summary.csv", summary);

  if (cfg.greedy_eval_period > 0)
    write_file(dir, "greedy_eval.csv", curve_csv(result.trials, true));
  write_file(dir, "resolved_config.json", config_to_json(cfg));
}

double final_window_mean(const TrialLogs& logs, double fraction) {
  if (!(fraction > 0.0 && fraction <= 1.0))
    throw std::invalid_argument("final_window_mean: fraction outside (0, 1]");
  const int episodes = static_cast<int>(logs.episodes.size());
  if (episodes == 0) throw std::invalid_argument("final_window_mean: no episodes");
  const int window =
      std::max(1, static_cast<int>(std::llround(fraction * static_cast<double>(episodes))));
  double sum = 0.0;
  for (int ep = episodes - window; ep < episodes; ++ep)
    sum += logs.episodes[static_cast<size_t>(ep)].undiscounted_return;
  return sum / window;
}

std::vector<std::string> sweep_preset_names() {
  return {"chain_zeta", "chain_uniform", "chain_geometric"};
}

SweepSpec sweep_preset(const std::string& name) {
  SweepSpec spec;
  spec.preset = name;
  spec.base = run_preset("chain");
  spec.base.preset.clear();  // the sweep preset owns the provenance
  if (name == "chain_zeta") {
    spec.base.exploration.duration.kind = DurationKind::zeta;
    spec.parameter = "mu";
    spec.values = {1.01, 1.5, 2.0, 3.0, 4.0, 6.0};
  } else if (name == "chain_uniform") {
    spec.base.exploration.duration.kind = DurationKind::uniform;
    spec.parameter = "n_max";
    spec.values = {2, 5, 10, 20, 50};
  } else if (name == "chain_geometric") {
    spec.base.exploration.duration.kind = DurationKind::geometric;
    spec.parameter = "lambda";
    spec.values = {0.5, 0.8, 0.9, 0.95, 0.99};
  } else {
    throw std::invalid_argument("unknown sweep preset '" + name + "'");
  }
  return spec;
}

namespace {

ExperimentConfig apply_sweep_value(const ExperimentConfig& base, const std::string& parameter,
                                   double value) {
  ExperimentConfig cfg = base;
  const auto as_int = [&](double v) {
    const int i = static_cast<int>(std::llround(v));
    if (std::abs(v - i) > 1e-9)
      bad_config("sweep parameter '" + parameter + "' takes integer values");
    return i;
  };
  if (parameter == "mu")
    cfg.exploration.duration.mu = value;
  else if (parameter == "n_max")
    cfg.exploration.duration.n_max = as_int(value);
  else if (parameter == "lambda")
    cfg.exploration.duration.lambda = value;
  else if (parameter == "k")
    cfg.exploration.duration.k = as_int(value);
  else if (parameter == "epsilon")
    cfg.exploration.epsilon = value;
  else
    bad_config("unknown sweep parameter '" + parameter + "'");
  return cfg;
}

SweepSpec parse_sweep(const Json& j) {
  if (!j.is_object()) bad_config("top level must be an object");
  SweepSpec spec;
  if (auto it = j.find("preset"); it != j.end()) spec = sweep_preset(it->get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "preset")
      continue;
    else if (key == "base")
      spec.base = parse_config(value);
    else if (key == "parameter")
      spec.parameter = value.get<std::string>();
    else if (key == "values")
      spec.values = value.get<std::vector<double>>();
    else if (key == "final_fraction")
      spec.final_fraction = value.get<double>();
    else
      bad_config("unknown sweep field '" + key + "'");
  }
  if (spec.values.empty()) bad_config("sweep needs a nonempty value list");
  if (!(spec.final_fraction > 0.0 && spec.final_fraction <= 1.0))
    bad_config("final_fraction outside (0, 1]");
  apply_sweep_value(spec.base, spec.parameter, spec.values.front());  // validates the name
  return spec;
}

}  // namespace

SweepSpec sweep_from_json(const std::string& text) { return parse_sweep(parse_json(text)); }

std::string sweep_to_json(const SweepSpec& spec) {
  Json j;
  if (!spec.preset.empty()) j["preset"] = spec.preset;
  j["base"] = config_json(spec.base);
  j["parameter"] = spec.parameter;
  j["values"] = spec.values;
  j["final_fraction"] = spec.final_fraction;
  return j.dump(2) + "\n";
}

std::vector<SweepPoint> run_sweep(const SweepSpec& spec, int workers) {
  if (spec.values.empty()) throw std::invalid_argument("sweep needs a nonempty value list");
  const int trials = spec.base.trials;
  std::vector<ExperimentConfig> configs;
  configs.reserve(spec.values.size());
  for (double v : spec.values) configs.push_back(apply_sweep_value(spec.base, spec.parameter, v));

  // Flattened (value, trial) grid; every value sees the same (seed, trial)
  // stream pairs.
  std::vector<std::vector<double>> metric(spec.values.size(),
                                          std::vector<double>(static_cast<size_t>(trials)));
  const int jobs = static_cast<int>(spec.values.size()) * trials;
  run_pool(jobs, workers, [&](int i) {
    const size_t vi = static_cast<size_t>(i) / trials;
    const int trial = i % trials;
    const ExperimentConfig& cfg = configs[vi];
    const TrialLogs logs = run_training(cfg.env, cfg.learner, cfg.exploration, cfg.episodes,
                                        cfg.seed, trial, 0);
    metric[vi][static_cast<size_t>(trial)] = final_window_mean(logs, spec.final_fraction);
  });

  std::vector<SweepPoint> points;
  points.reserve(spec.values.size());
  for (size_t vi = 0; vi < spec.values.size(); ++vi) {
    SweepPoint p;
    p.value = spec.values[vi];
    p.mean_return = mean_of(metric[vi]);
    if (trials > 1) {
      double ss = 0.0;
      for (double m : metric[vi]) ss += (m - p.mean_return) * (m - p.mean_return);
      p.std_error = std::sqrt(ss / (trials - 1)) / std::sqrt(static_cast<double>(trials));
    }
    points.push_back(p);
  }
  return points;
}

void write_sweep_outputs(const SweepSpec& spec, const std::vector<SweepPoint>& points,
                         const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  std::string csv = "value,mean_return,std_error\n";
  for (const SweepPoint& p : points) {
    csv += format_double(p.value);
    csv += ',';
    csv += format_double(p.mean_return);
    csv += ',';
    csv += format_double(p.std_error);
    csv += '\n';
  }
  write_file(dir, "sweep.csv", csv);
  write_file(dir, "resolved_sweep.json", sweep_to_json(spec));
}

// ---------------------------------------------------------------------------
// Analysis jobs
// ---------------------------------------------------------------------------

namespace {

void apply_probe(ProbePolicy& policy, const Json& j) {
  if (!j.is_object()) bad_config("policy must be an object");
  for (const auto& [key, value] : j.items()) {
    if (key == "epsilon")
      policy.epsilon = value.get<double>();
    else if (key == "duration") {
      if (value.is_null()) {
        policy.duration.reset();
      } else {
        DurationSpec duration = policy.duration.value_or(DurationSpec{});
        apply_duration(duration, value);
        policy.duration = duration;
      }
    } else if (key == "pseudocode_literal")
      policy.pseudocode_literal = value.get<bool>();
    else if (key == "fixed_greedy_action")
      policy.fixed_greedy_action = value.get<int>();
    else
      bad_config("unknown policy field '" + key + "'");
  }
}

Json probe_json(const ProbePolicy& policy) {
  Json j;
  j["epsilon"] = policy.epsilon;
  if (policy.duration)
    j["duration"] = duration_json(*policy.duration);
  else
    j["duration"] = nullptr;
  j["pseudocode_literal"] = policy.pseudocode_literal;
  j["fixed_greedy_action"] = policy.fixed_greedy_action;
  return j;
}

ProbePolicy default_probe() {
  ProbePolicy policy;
  policy.epsilon = 1.0;
  policy.duration = DurationSpec{};  // zeta, mu = 2
  return policy;
}

}  // namespace

std::vector<std::string> first_visit_preset_names() {
  return {"deep_sea", "grid_world", "mountain_car", "cartpole", "open_grid"};
}

FirstVisitJob first_visit_preset(const std::string& name) {
  FirstVisitJob job;
  job.preset = name;
  job.cfg.policy = default_probe();
  if (name == "deep_sea") {
    job.env.kind = "deep_sea";
    job.env.size = 10;
    job.cfg.trials = 5;
    job.cfg.steps = 500000LL * job.env.size;
    job.cfg.log_scale = true;
  } else if (name == "grid_world") {
    job.env.kind = "grid_world";
    job.env.max_episode_steps = 1000;
    job.cfg.trials = 100;
    job.cfg.steps = 5000;
  } else if (name == "mountain_car") {
    job.env.kind = "mountain_car";
    job.env.max_episode_steps = 5000;
    job.cfg.trials = 50;
    job.cfg.steps = 5000;
    job.cfg.discretization = 12;
  } else if (name == "cartpole") {
    job.env.kind = "cartpole_swingup";
    job.env.max_episode_steps = 1000;
    job.cfg.trials = 100;
    job.cfg.steps = 5000;
    job.cfg.discretization = 20;
  } else if (name == "open_grid") {
    job.env.kind = "open_grid";
    job.env.terminate_on_wall = false;
    job.cfg.trials = 100;
    job.cfg.steps = 5000;
  } else {
    throw std::invalid_argument("unknown first-visit preset '" + name + "'");
  }
  return job;
}

FirstVisitJob first_visit_from_json(const std::string& text) {
  const Json j = parse_json(text);
  if (!j.is_object()) bad_config("top level must be an object");
  FirstVisitJob job;
  if (auto it = j.find("preset"); it != j.end()) job = first_visit_preset(it->get<std::string>());
  bool steps_explicit = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "preset")
      continue;
    else if (key == "env")
      apply_env(job.env, value);
    else if (key == "policy")
      apply_probe(job.cfg.policy, value);
    else if (key == "trials")
      job.cfg.trials = value.get<int>();
    else if (key == "steps") {
      job.cfg.steps = value.get<long long>();
      steps_explicit = true;
    } else if (key == "max_steps_cap")
      job.cfg.max_steps_cap = value.get<long long>();
    else if (key == "discretization")
      job.cfg.discretization = value.get<int>();
    else if (key == "log_scale")
      job.cfg.log_scale = value.get<bool>();
    else if (key == "seed")
      job.seed = value.get<std::uint64_t>();
    else if (key == "output_dir")
      job.output_dir = value.get<std::string>();
    else
      bad_config("unknown first-visit field '" + key + "'");
  }
  if (job.preset == "deep_sea" && job.env.kind == "deep_sea" && !steps_explicit)
    job.cfg.steps = 500000LL * job.env.size;
  return job;
}

std::string first_visit_to_json(const FirstVisitJob& job) {
  Json j;
  if (!job.preset.empty()) j["preset"] = job.preset;
  j["env"] = env_json(job.env);
  j["policy"] = probe_json(job.cfg.policy);
  j["trials"] = job.cfg.trials;
  j["steps"] = job.cfg.steps;
  j["max_steps_cap"] = job.cfg.max_steps_cap;
  j["discretization"] = job.cfg.discretization;
  j["log_scale"] = job.cfg.log_scale;
  j["seed"] = job.seed;
  j["output_dir"] = job.output_dir;
  return j.dump(2) + "\n";
}

void write_first_visit_outputs(const FirstVisitJob& job, const FirstVisitGrid& grid,
                               const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  write_file(dir, "first_visit.csv", csv_matrix(grid.rows, grid.cols, grid.mean));
  write_binary_file((dir / "first_visit.pgm").string(),
                    pgm_image(grid.rows, grid.cols, grid.mean, grid.log_scale));
  Json meta;
  meta["env"] = env_json(job.env);
  meta["policy"] = probe_json(job.cfg.policy);
  meta["rows"] = grid.rows;
  meta["cols"] = grid.cols;
  meta["trials"] = grid.trials;
  meta["steps"] = job.cfg.steps;
  meta["max_steps"] = grid.max_steps;
  meta["scale"] = grid.log_scale ? "log" : "linear";
  meta["seed"] = job.seed;
  write_file(dir, "first_visit.json", meta.dump(2) + "\n");
}

std::vector<std::string> cover_time_preset_names() {
  return {"open_grid_repeat", "open_grid_plain"};
}

CoverTimeJob cover_time_preset(const std::string& name) {
  CoverTimeJob job;
  job.preset = name;
  job.env.kind = "open_grid";
  job.env.terminate_on_wall = false;
  job.cfg.trials = 101;
  job.cfg.budget = 1000000;
  job.cfg.policy = default_probe();
  if (name == "open_grid_plain")
    job.cfg.policy.duration.reset();
  else if (name != "open_grid_repeat")
    throw std::invalid_argument("unknown cover-time preset '" + name + "'");
  return job;
}

CoverTimeJob cover_time_from_json(const std::string& text) {
  const Json j = parse_json(text);
  if (!j.is_object()) bad_config("top level must be an object");
  CoverTimeJob job;
  if (auto it = j.find("preset"); it != j.end()) job = cover_time_preset(it->get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "preset")
      continue;
    else if (key == "env")
      apply_env(job.env, value);
    else if (key == "policy")
      apply_probe(job.cfg.policy, value);
    else if (key == "trials")
      job.cfg.trials = value.get<int>();
    else if (key == "budget")
      job.cfg.budget = value.get<long long>();
    else if (key == "seed")
      job.seed = value.get<std::uint64_t>();
    else if (key == "output_dir")
      job.output_dir = value.get<std::string>();
    else
      bad_config("unknown cover-time field '" + key + "'");
  }
  return job;
}

std::string cover_time_to_json(const CoverTimeJob& job) {
  Json j;
  if (!job.preset.empty()) j["preset"] = job.preset;
  j["env"] = env_json(job.env);
  j["policy"] = probe_json(job.cfg.policy);
  j["trials"] = job.cfg.trials;
  j["budget"] = job.cfg.budget;
  j["seed"] = job.seed;
  j["output_dir"] = job.output_dir;
  return j.dump(2) + "\n";
}

void write_cover_time_outputs(const CoverTimeJob& job, const CoverTimeReport& report,
                              const std::string& out_dir) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  Json j;
  j["env"] = env_json(job.env);
  j["policy"] = probe_json(job.cfg.policy);
  j["trials"] = report.trials;
  j["budget"] = report.budget;
  j["pair_count"] = report.pair_count;
  j["covered_trials"] = report.covered_trials;
  j["median_defined"] = report.median_defined;
  if (report.median_defined)
    j["median"] = report.median;
  else
    j["median"] = nullptr;
  j["cover_steps"] = report.cover_steps;  // budget+1 marks "not covered"
  j["seed"] = job.seed;
  write_file(dir, "cover_time.json", j.dump(2) + "\n");
}

std::string to_string(GreedyModel greedy) {
  switch (greedy) {
    case GreedyModel::none: return "none";
    case GreedyModel::fixed: return "fixed";
    case GreedyModel::uniform_ties: return "uniform_ties";
  }
  throw std::logic_error("unhandled greedy model");
}

GreedyModel greedy_model_from_string(const std::string& name) {
  if (name == "none") return GreedyModel::none;
  if (name == "fixed") return GreedyModel::fixed;
  if (name == "uniform_ties") return GreedyModel::uniform_ties;
  throw std::invalid_argument("unknown greedy model '" + name + "'");
}

std::vector<std::string> coverage_preset_names() {
  return {"chain_multiples", "grid_world_primitive", "grid_world_repeat", "deep_sea_primitive",
          "deep_sea_repeat"};
}

CoverageJob coverage_preset(const std::string& name) {
  CoverageJob job;
  job.preset = name;
  if (name == "chain_multiples") {
    job.env.kind = "unidirectional_chain";
    job.env.length = 12;
    job.family = "fixed";
    job.k = 3;
  } else if (name == "grid_world_primitive" || name == "grid_world_repeat") {
    job.env.kind = "grid_world";
    job.env.max_episode_steps = 1000;
    job.family = name == "grid_world_primitive" ? "primitive" : "repeat";
  } else if (name == "deep_sea_primitive" || name == "deep_sea_repeat") {
    job.env.kind = "deep_sea";
    job.env.size = 10;
    job.family = name == "deep_sea_primitive" ? "primitive" : "repeat";
  } else {
    throw std::invalid_argument("unknown coverage preset '" + name + "'");
  }
  return job;
}

namespace {

OptionSpec option_from_json(const Json& j) {
  if (!j.is_object()) bad_config("option must be an object");
  OptionSpec option;
  bool exact_given = false, beta_given = false;
  for (const auto& [key, value] : j.items()) {
    if (key == "action")
      option.action = value.get<int>();
    else if (key == "exactly") {
      option = OptionSpec::exactly(option.action, value.get<int>());
      exact_given = true;
    } else if (key == "beta") {
      option = OptionSpec::per_step(option.action, value.get<double>());
      beta_given = true;
    } else
      bad_config("unknown option field '" + key + "'");
  }
  if (exact_given == beta_given) bad_config("option needs exactly one of 'exactly' or 'beta'");
  return option;
}

Json option_json(const OptionSpec& option) {
  Json j;
  j["action"] = option.action;
  if (option.after_exactly)
    j["exactly"] = option.k;
  else
    j["beta"] = option.beta;
  return j;
}

}  // namespace

CoverageJob coverage_from_json(const std::string& text) {
  const Json j = parse_json(text);
  if (!j.is_object()) bad_config("top level must be an object");
  CoverageJob job;
  if (auto it = j.find("preset"); it != j.end()) job = coverage_preset(it->get<std::string>());
  for (const auto& [key, value] : j.items()) {
    if (key == "preset")
      continue;
    else if (key == "env")
      apply_env(job.env, value);
    else if (key == "options") {
      if (!value.is_object()) bad_config("options must be an object");
      for (const auto& [okey, ovalue] : value.items()) {
        if (okey == "family")
          job.family = ovalue.get<std::string>();
        else if (okey == "max_duration")
          job.max_duration = ovalue.get<int>();
        else if (okey == "action")
          job.action = ovalue.get<int>();
        else if (okey == "k")
          job.k = ovalue.get<int>();
        else if (okey == "list") {
          job.list.clear();
          for (const Json& o : ovalue) job.list.push_back(option_from_json(o));
        } else
          bad_config("unknown options field '" + okey + "'");
      }
    } else if (key == "epsilon")
      job.epsilon = value.get<double>();
    else if (key == "greedy")
      job.greedy = greedy_model_from_string(value.get<std::string>());
    else if (key == "fixed_greedy")
      job.fixed_greedy = value.get<std::vector<int>>();
    else if (key == "truncation")
      job.truncation = value.get<int>();
    else if (key == "mc_steps")
      job.mc_steps = value.get<long long>();
    else if (key == "seed")
      job.seed = value.get<std::uint64_t>();
    else if (key == "output_dir")
      job.output_dir = value.get<std::string>();
    else
      bad_config("unknown coverage field '" + key + "'");
  }
  return job;
}

std::string coverage_to_json(const CoverageJob& job) {
  Json j;
  if (!job.preset.empty()) j["preset"] = job.preset;
  j["env"] = env_json(job.env);
  Json options;
  options["family"] = job.family;
  if (job.family == "repeat") options["max_duration"] = job.max_duration;
  if (job.family == "single") {
    options["action"] = job.action;
    options["k"] = job.k;
  }
  if (job.family == "fixed") options["k"] = job.k;
  if (job.family == "list") {
    Json list = Json::array();
    for (const OptionSpec& o : job.list) list.push_back(option_json(o));
    options["list"] = list;
  }
  j["options"] = options;
  j["epsilon"] = job.epsilon;
  j["greedy"] = to_string(job.greedy);
  if (job.greedy == GreedyModel::fixed) j["fixed_greedy"] = job.fixed_greedy;
  j["truncation"] = job.truncation;
  j["mc_steps"] = job.mc_steps;
  j["seed"] = job.seed;
  j["output_dir"] = job.output_dir;
  return j.dump(2) + "\n";
}

CoverageRun run_coverage(const CoverageJob& job) {
  auto env = make_environment(job.env, stream_seed(job.seed, 0, kStreamEnv));
  CoverageRun run;
  if (job.family == "primitive") {
    run.options = primitive_options(env->action_count());
  } else if (job.family == "repeat") {
    const int max_duration = job.max_duration > 0
                                 ? job.max_duration
                                 : std::min(kDefaultDurationCap, env->max_episode_steps());
    run.options = repeat_options_up_to(env->action_count(), max_duration);
  } else if (job.family == "single") {
    run.options = {OptionSpec::exactly(job.action, job.k)};
  } else if (job.family == "fixed") {
    for (int a = 0; a < env->action_count(); ++a)
      run.options.push_back(OptionSpec::exactly(a, job.k));
  } else if (job.family == "list") {
    if (job.list.empty()) bad_config("option list must be nonempty");
    run.options = job.list;
  } else {
    bad_config("unknown option family '" + job.family + "'");
  }

  run.result =
      coverage_check(*env, run.options, job.epsilon, job.greedy, job.fixed_greedy, job.truncation);

  if (job.mc_steps > 0) {
    auto mc_env = make_environment(job.env, stream_seed(job.seed, 0, kStreamEnv));
    const std::vector<long long> visits =
        option_rollout_visits(*mc_env, run.options, job.epsilon, job.greedy, job.fixed_greedy,
                              job.mc_steps, stream_seed(job.seed, 0, kStreamPolicy));
    run.mc_ran = true;
    const int actions = run.result.action_count;
    for (const StateActionPair& pair : run.result.unreachable) {
      if (visits[static_cast<size_t>(pair.state) * actions + pair.action] > 0)
        run.mc_unreachable_visited.push_back(pair);
    }
    for (const StateActionPair& pair : run.result.reachable) {
      if (visits[static_cast<size_t>(pair.state) * actions + pair.action] == 0)
        ++run.mc_reachable_missed;
    }
  }
  return run;
}

void write_coverage_outputs(const CoverageJob& job, const CoverageRun& run,
                            const std::string& out_dir, bool dump_transitions) {
  const fs::path dir(out_dir);
  fs::create_directories(dir);
  Json j;
  j["env"] = env_json(job.env);
  j["epsilon"] = job.epsilon;
  j["greedy"] = to_string(job.greedy);
  j["truncation"] = run.result.truncation;
  j["state_count"] = run.result.state_count;
  j["action_count"] = run.result.action_count;
  j["option_count"] = run.options.size();
  j["reachable_count"] = run.result.reachable.size();
  j["unreachable_count"] = run.result.unreachable.size();
  const auto pair_array = [](const std::vector<StateActionPair>& pairs) {
    Json array = Json::array();
    for (const StateActionPair& p : pairs) {
      Json entry;
      entry["state"] = p.state;
      entry["action"] = p.action;
      array.push_back(entry);
    }
    return array;
  };
  j["reachable"] = pair_array(run.result.reachable);
  j["unreachable"] = pair_array(run.result.unreachable);
  j["decision_states"] = run.result.decision_states;
  if (run.mc_ran) {
    Json mc;
    mc["steps"] = job.mc_steps;
    mc["unreachable_visited"] = pair_array(run.mc_unreachable_visited);
    mc["reachable_missed"] = run.mc_reachable_missed;
    j["mc"] = mc;
  }
  write_file(dir, "coverage.json", j.dump(2) + "\n");

  if (dump_transitions) {
    auto env = make_environment(job.env, stream_seed(job.seed, 0, kStreamEnv));
    write_file(dir, "transitions.tsv", transition_dump(*env));
  }
}

}  // namespace ezg
