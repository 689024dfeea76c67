#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "ezgreedy/rng.hpp"

namespace ezg {

// Observation is either a discrete state id (id >= 0, vec empty) or a feature
// vector (id == -1).
struct Observation {
  int id = -1;
  std::vector<double> vec;
  bool discrete() const { return id >= 0; }
};

struct StepResult {
  Observation obs;
  double reward = 0.0;
  bool done = false;
};

// One entry of the exact single-step model of a tabular environment.
struct Transition {
  int next_state = 0;
  double prob = 1.0;
  double reward = 0.0;
  bool done = false;
};

struct GridShape {
  int rows = 0;
  int cols = 0;
};

class Environment {
 public:
  virtual ~Environment() = default;

  virtual std::string name() const = 0;
  virtual int action_count() const = 0;
  virtual int max_episode_steps() const = 0;

  virtual Observation reset() = 0;
  // Throws if called before reset or after the episode finished; episodes are
  // also cut at max_episode_steps (done=true on the last permitted step).
  virtual StepResult step(int action) = 0;

  virtual bool tabular() const = 0;

  // --- tabular-only interface (throws std::logic_error otherwise) ---
  virtual int state_count() const;
  // All reachable states, ascending; includes terminal bookkeeping states.
  virtual std::vector<int> enumerate_states() const;
  // True for states in which no action is ever executed.
  virtual bool state_terminal(int state) const;
  // Exact single-step model; probabilities over next states sum to 1.
  virtual std::vector<Transition> transitions(int state, int action) const;
  // Teleports the current episode to `state` (testing / model-check hook).
  virtual void set_state(int state);
  // 2-D layout used by visit maps; state_cell returns false for bookkeeping
  // states that have no cell.
  virtual GridShape grid_shape() const;
  virtual bool state_cell(int state, int& row, int& col) const;

  // --- continuous-only interface (throws std::logic_error otherwise) ---
  virtual int observation_dim() const;
  virtual std::vector<std::pair<double, double>> observation_bounds() const;
  // Projection of an observation onto the 2-D plane used by visit maps,
  // both coordinates normalized to [0, 1].
  virtual std::pair<double, double> project(const Observation& obs) const;
};

struct EnvSpec {
  std::string kind;  // chain | deep_sea | grid_world | open_grid |
                     // mountain_car | cartpole_swingup | unidirectional_chain
  int max_episode_steps = 0;  // 0 -> kind default

  // chain
  int num_blocks = 10;
  // deep_sea
  int size = 10;
  bool randomized = false;
  // grid_world / open_grid
  int width = 23;
  int height = 23;
  int goal_row = -1;  // -1 -> height-2
  int goal_col = -1;  // -1 -> 1
  bool terminate_on_wall = true;  // open_grid only
  // unidirectional_chain
  int length = 12;
  // cartpole_swingup
  bool reset_jitter = true;
};

// env_seed feeds construction-time randomness (e.g. the per-state action
// permutation of the randomized deep sea) and any reset-time jitter.
std::unique_ptr<Environment> make_environment(const EnvSpec& spec, std::uint64_t env_seed);

using EnvFactory = std::function<std::unique_ptr<Environment>(std::uint64_t env_seed)>;
EnvFactory make_env_factory(const EnvSpec& spec);

// Debug dump of the exact model, one "state action next_state prob reward
// done" line per transition entry, tab-separated, after a header line.
std::string transition_dump(const Environment& env);

}  // namespace ezg
