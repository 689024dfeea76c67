#include "ezgreedy/environment.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>
#include <stdexcept>

#include "ezgreedy/io.hpp"

namespace ezg {

namespace {

[[noreturn]] void not_tabular(const Environment& env) {
  throw std::logic_error(env.name() + ": not a tabular environment");
}
[[noreturn]] void not_continuous(const Environment& env) {
  throw std::logic_error(env.name() + ": not a continuous environment");
}

}  // namespace

int Environment::state_count() const { not_tabular(*this); }
std::vector<int> Environment::enumerate_states() const { not_tabular(*this); }
bool Environment::state_terminal(int) const { not_tabular(*this); }
std::vector<Transition> Environment::transitions(int, int) const { not_tabular(*this); }
void Environment::set_state(int) { not_tabular(*this); }
GridShape Environment::grid_shape() const { not_tabular(*this); }
bool Environment::state_cell(int, int&, int&) const { not_tabular(*this); }
int Environment::observation_dim() const { not_continuous(*this); }
std::vector<std::pair<double, double>> Environment::observation_bounds() const {
  not_continuous(*this);
}
std::pair<double, double> Environment::project(const Observation&) const { not_continuous(*this); }

namespace {

// Shared episode bookkeeping for the concrete environments below.
class EpisodeBase : public Environment {
 protected:
  void begin_episode() {
    steps_ = 0;
    active_ = true;
  }
  // Returns true if the step limit forces termination after this step.
  bool count_step() {
    ++steps_;
    return steps_ >= max_episode_steps();
  }
  void require_active(int action) const {
    if (!active_) throw std::logic_error(name() + ": step before reset or after done");
    if (action < 0 || action >= action_count())
      throw std::invalid_argument(name() + ": action out of range");
  }
  void finish() { active_ = false; }

  int steps_ = 0;
  bool active_ = false;
};

// ---------------------------------------------------------------------------
// Chain of reward blocks: block k is k zero-deposit cells followed by one cell
// with deposit k.  Action 0 advances one cell (reward 0); action 1 stops and
// pays the current cell's deposit.  Advancing out of the last cell also stops
// and pays that cell's deposit.
class ChainEnv final : public EpisodeBase {
 public:
  ChainEnv(int num_blocks, int max_steps) : num_blocks_(num_blocks), max_steps_(max_steps) {
    if (num_blocks < 1) throw std::invalid_argument("chain: num_blocks must be >= 1");
    int pos = 0;
    for (int k = 1; k <= num_blocks; ++k) {
      pos += k;  // k zero cells
      deposit_.resize(static_cast<std::size_t>(pos) + 1, 0.0);
      deposit_[static_cast<std::size_t>(pos)] = static_cast<double>(k);
      ++pos;
    }
    length_ = pos;
    if (max_steps_ <= 0) max_steps_ = 200;
  }

  std::string name() const override { return "chain"; }
  int action_count() const override { return 2; }
  int max_episode_steps() const override { return max_steps_; }
  bool tabular() const override { return true; }
  int state_count() const override { return length_; }

  Observation reset() override {
    begin_episode();
    pos_ = 0;
    return {pos_, {}};
  }

  StepResult step(int action) override {
    require_active(action);
    const bool cut = count_step();
    if (action == 1 || pos_ == length_ - 1) {
      finish();
      return {{pos_, {}}, deposit_[static_cast<std::size_t>(pos_)], true};
    }
    ++pos_;
    if (cut) finish();
    return {{pos_, {}}, 0.0, cut};
  }

  std::vector<int> enumerate_states() const override {
    std::vector<int> s(static_cast<std::size_t>(length_));
    for (int i = 0; i < length_; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
  }
  bool state_terminal(int) const override { return false; }

  std::vector<Transition> transitions(int state, int action) const override {
    check_state_action(state, action);
    if (action == 1 || state == length_ - 1)
      return {{state, 1.0, deposit_[static_cast<std::size_t>(state)], true}};
    return {{state + 1, 1.0, 0.0, false}};
  }

  void set_state(int state) override {
    check_state_action(state, 0);
    begin_episode();
    pos_ = state;
  }

  GridShape grid_shape() const override { return {1, length_}; }
  bool state_cell(int state, int& row, int& col) const override {
    row = 0;
    col = state;
    return true;
  }

  double deposit(int state) const { return deposit_.at(static_cast<std::size_t>(state)); }

 private:
  void check_state_action(int state, int action) const {
    if (state < 0 || state >= length_) throw std::invalid_argument("chain: state out of range");
    if (action < 0 || action >= 2) throw std::invalid_argument("chain: action out of range");
  }

  int num_blocks_;
  int max_steps_;
  int length_ = 0;
  std::vector<double> deposit_;
  int pos_ = 0;
};

// ---------------------------------------------------------------------------
// Lower-triangular descent grid of side N.  Both actions move one row down;
// the "down-right" effect also moves one column right.  Every step costs
// 0.01/N; taking down-right from cell (N-1, N-1) additionally pays 1.0, so the
// single all-down-right trajectory earns 0.99 and every other one earns
// -0.01.  Episodes always run exactly N steps; the row that falls off the grid
// is reported as a terminal bookkeeping state.  The randomized variant remaps
// which action index means down-right independently per cell, drawn once at
// construction.
class DeepSeaEnv final : public EpisodeBase {
 public:
  DeepSeaEnv(int size, bool randomized, std::uint64_t seed) : n_(size) {
    if (size < 1) throw std::invalid_argument("deep_sea: size must be >= 1");
    swap_.assign(static_cast<std::size_t>(tri(n_)), 0);
    if (randomized) {
      SplitMix64 rng(seed);
      for (auto& s : swap_) s = static_cast<std::uint8_t>(rng.next_below(2));
    }
  }

  std::string name() const override { return "deep_sea"; }
  int action_count() const override { return 2; }
  int max_episode_steps() const override { return n_; }
  bool tabular() const override { return true; }
  int state_count() const override { return tri(n_) + 1; }

  Observation reset() override {
    begin_episode();
    row_ = 0;
    col_ = 0;
    return {0, {}};
  }

  StepResult step(int action) override {
    require_active(action);
    count_step();
    auto [next, reward, done] = advance(row_, col_, action);
    row_ = next.first;
    col_ = next.second;
    if (done) finish();
    const int id = done ? terminal_id() : cell_id(row_, col_);
    return {{id, {}}, reward, done};
  }

  std::vector<int> enumerate_states() const override {
    std::vector<int> s(static_cast<std::size_t>(state_count()));
    for (int i = 0; i < state_count(); ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
  }
  bool state_terminal(int state) const override { return state == terminal_id(); }

  std::vector<Transition> transitions(int state, int action) const override {
    if (state < 0 || state >= terminal_id())
      throw std::invalid_argument("deep_sea: no transitions from this state");
    if (action < 0 || action >= 2) throw std::invalid_argument("deep_sea: action out of range");
    auto [rc, ok] = cell_of(state);
    (void)ok;
    auto [next, reward, done] = advance(rc.first, rc.second, action);
    const int id = done ? terminal_id() : cell_id(next.first, next.second);
    return {{id, 1.0, reward, done}};
  }

  void set_state(int state) override {
    auto [rc, ok] = cell_of(state);
    if (!ok) throw std::invalid_argument("deep_sea: cannot enter the terminal state");
    begin_episode();
    row_ = rc.first;
    col_ = rc.second;
    steps_ = row_;  // row index doubles as elapsed steps
  }

  GridShape grid_shape() const override { return {n_, n_}; }
  bool state_cell(int state, int& row, int& col) const override {
    auto [rc, ok] = cell_of(state);
    if (!ok) return false;
    row = rc.first;
    col = rc.second;
    return true;
  }

 private:
  static int tri(int r) { return r * (r + 1) / 2; }
  int cell_id(int r, int c) const { return tri(r) + c; }
  int terminal_id() const { return tri(n_); }

  std::pair<std::pair<int, int>, bool> cell_of(int state) const {
    if (state < 0 || state > terminal_id())
      throw std::invalid_argument("deep_sea: state out of range");
    if (state == terminal_id()) return {{-1, -1}, false};
    int r = 0;
    while (tri(r + 1) <= state) ++r;
    return {{r, state - tri(r)}, true};
  }

  // (next cell, reward, done) for taking `action` in cell (r, c).
  std::tuple<std::pair<int, int>, double, bool> advance(int r, int c, int action) const {
    const bool right =
        (swap_[static_cast<std::size_t>(cell_id(r, c))] ? 1 - action : action) == 1;
    double reward = right ? -0.01 / static_cast<double>(n_) : 0.0;
    if (right && r == n_ - 1 && c == n_ - 1) reward += 1.0;
    const int nr = r + 1;
    const int nc = right ? std::min(c + 1, n_ - 1) : c;
    return {{nr, nc}, reward, nr == n_};
  }

  int n_;
  std::vector<std::uint8_t> swap_;
  int row_ = 0;
  int col_ = 0;
};

// ---------------------------------------------------------------------------
// Open room of width x height cells.  Actions: 0 up, 1 down, 2 left, 3 right.
// Moves into the surrounding wall either leave the state unchanged (goal mode,
// or open mode with terminate_on_wall=false) or end the episode (open mode
// with terminate_on_wall=true).  In goal mode, entering the goal cell pays 1.0
// and ends the episode; open mode has no reward at all.
class GridRoomEnv final : public EpisodeBase {
 public:
  enum class Mode { goal, open };

  GridRoomEnv(int width, int height, Mode mode, bool terminate_on_wall, int goal_row,
              int goal_col, int max_steps)
      : w_(width), h_(height), mode_(mode), terminate_on_wall_(terminate_on_wall) {
    if (width < 2 || height < 3)
      throw std::invalid_argument("grid room: needs width >= 2 and height >= 3");
    goal_row_ = goal_row >= 0 ? goal_row : h_ - 2;
    goal_col_ = goal_col >= 0 ? goal_col : 1;
    if (goal_row_ >= h_ || goal_col_ >= w_)
      throw std::invalid_argument("grid room: goal outside the grid");
    max_steps_ = max_steps > 0 ? max_steps : 1000;
    start_row_ = 1;
    start_col_ = w_ / 2;
  }

  std::string name() const override { return mode_ == Mode::goal ? "grid_world" : "open_grid"; }
  int action_count() const override { return 4; }
  int max_episode_steps() const override { return max_steps_; }
  bool tabular() const override { return true; }
  int state_count() const override { return w_ * h_; }

  Observation reset() override {
    begin_episode();
    row_ = start_row_;
    col_ = start_col_;
    return {id(row_, col_), {}};
  }

  StepResult step(int action) override {
    require_active(action);
    const bool cut = count_step();
    auto [r, c] = target(row_, col_, action);
    const bool wall = r < 0 || r >= h_ || c < 0 || c >= w_;
    if (!wall) {
      row_ = r;
      col_ = c;
    }
    if (mode_ == Mode::open && terminate_on_wall_ && wall) {
      finish();
      return {{id(row_, col_), {}}, 0.0, true};
    }
    if (mode_ == Mode::goal && row_ == goal_row_ && col_ == goal_col_) {
      finish();
      return {{id(row_, col_), {}}, 1.0, true};
    }
    if (cut) finish();
    return {{id(row_, col_), {}}, 0.0, cut};
  }

  std::vector<int> enumerate_states() const override {
    std::vector<int> s(static_cast<std::size_t>(state_count()));
    for (int i = 0; i < state_count(); ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
  }
  bool state_terminal(int state) const override {
    return mode_ == Mode::goal && state == id(goal_row_, goal_col_);
  }

  std::vector<Transition> transitions(int state, int action) const override {
    check_state_action(state, action);
    if (state_terminal(state))
      throw std::invalid_argument("grid room: no transitions from the goal");
    const int row = state / w_;
    const int col = state % w_;
    auto [r, c] = target(row, col, action);
    const bool wall = r < 0 || r >= h_ || c < 0 || c >= w_;
    const int nr = wall ? row : r;
    const int nc = wall ? col : c;
    if (mode_ == Mode::open && terminate_on_wall_ && wall) return {{state, 1.0, 0.0, true}};
    if (mode_ == Mode::goal && nr == goal_row_ && nc == goal_col_)
      return {{id(nr, nc), 1.0, 1.0, true}};
    return {{id(nr, nc), 1.0, 0.0, false}};
  }

  void set_state(int state) override {
    check_state_action(state, 0);
    if (state_terminal(state)) throw std::invalid_argument("grid room: cannot enter the goal");
    begin_episode();
    row_ = state / w_;
    col_ = state % w_;
  }

  GridShape grid_shape() const override { return {h_, w_}; }
  bool state_cell(int state, int& row, int& col) const override {
    row = state / w_;
    col = state % w_;
    return true;
  }

 private:
  int id(int r, int c) const { return r * w_ + c; }
  static std::pair<int, int> target(int r, int c, int action) {
    switch (action) {
      case 0: return {r - 1, c};
      case 1: return {r + 1, c};
      case 2: return {r, c - 1};
      default: return {r, c + 1};
    }
  }
  void check_state_action(int state, int action) const {
    if (state < 0 || state >= state_count())
      throw std::invalid_argument("grid room: state out of range");
    if (action < 0 || action >= 4) throw std::invalid_argument("grid room: action out of range");
  }

  int w_, h_;
  Mode mode_;
  bool terminate_on_wall_;
  int goal_row_, goal_col_;
  int max_steps_;
  int start_row_, start_col_;
  int row_ = 0, col_ = 0;
};

// ---------------------------------------------------------------------------
// One-way chain: action 0 advances one cell, action 1 stays put, and the last
// cell is terminal.  Coverage fixture: when every available option lasts
// exactly k steps, fresh options can only ever start at cells whose index is a
// multiple of k, so the stay action is unreachable everywhere else.
class UnidirectionalChainEnv final : public EpisodeBase {
 public:
  explicit UnidirectionalChainEnv(int length, int max_steps) : len_(length), max_steps_(max_steps) {
    if (length < 2) throw std::invalid_argument("unidirectional_chain: length must be >= 2");
    if (max_steps_ <= 0) max_steps_ = 4 * len_;
  }

  std::string name() const override { return "unidirectional_chain"; }
  int action_count() const override { return 2; }
  int max_episode_steps() const override { return max_steps_; }
  bool tabular() const override { return true; }
  int state_count() const override { return len_; }

  Observation reset() override {
    begin_episode();
    pos_ = 0;
    return {0, {}};
  }

  StepResult step(int action) override {
    require_active(action);
    const bool cut = count_step();
    if (action == 0) ++pos_;
    const bool done = pos_ == len_ - 1 || cut;
    if (done) finish();
    return {{pos_, {}}, 0.0, done};
  }

  std::vector<int> enumerate_states() const override {
    std::vector<int> s(static_cast<std::size_t>(len_));
    for (int i = 0; i < len_; ++i) s[static_cast<std::size_t>(i)] = i;
    return s;
  }
  bool state_terminal(int state) const override { return state == len_ - 1; }

  std::vector<Transition> transitions(int state, int action) const override {
    if (state < 0 || state >= len_)
      throw std::invalid_argument("unidirectional_chain: state out of range");
    if (action < 0 || action >= 2)
      throw std::invalid_argument("unidirectional_chain: action out of range");
    if (state == len_ - 1)
      throw std::logic_error("unidirectional_chain: no transitions from the terminal cell");
    if (action == 1) return {{state, 1.0, 0.0, false}};
    return {{state + 1, 1.0, 0.0, state + 1 == len_ - 1}};
  }

  void set_state(int state) override {
    if (state < 0 || state >= len_)
      throw std::invalid_argument("unidirectional_chain: state out of range");
    begin_episode();
    pos_ = state;
  }

  GridShape grid_shape() const override { return {1, len_}; }
  bool state_cell(int state, int& row, int& col) const override {
    row = 0;
    col = state;
    return true;
  }

 private:
  int len_;
  int max_steps_;
  int pos_ = 0;
};

// ---------------------------------------------------------------------------
// Sparse mountain car.  v' = clip(v + 0.001 (a-1) - 0.0025 cos(3p), +-0.07),
// p' = clip(p + v', [-1.2, 0.6]); hitting the left bound zeroes the velocity.
// Reward 1.0 with termination once p' >= 0.5, otherwise 0.  Start is the
// deterministic rest state (-0.5, 0).
class MountainCarEnv final : public EpisodeBase {
 public:
  explicit MountainCarEnv(int max_steps) : max_steps_(max_steps > 0 ? max_steps : 5000) {}

  std::string name() const override { return "mountain_car"; }
  int action_count() const override { return 3; }
  int max_episode_steps() const override { return max_steps_; }
  bool tabular() const override { return false; }

  Observation reset() override {
    begin_episode();
    p_ = -0.5;
    v_ = 0.0;
    return obs();
  }

  StepResult step(int action) override {
    require_active(action);
    const bool cut = count_step();
    v_ += 0.001 * static_cast<double>(action - 1) - 0.0025 * std::cos(3.0 * p_);
    v_ = std::clamp(v_, -0.07, 0.07);
    p_ += v_;
    p_ = std::clamp(p_, -1.2, 0.6);
    if (p_ <= -1.2) v_ = 0.0;
    const bool goal = p_ >= 0.5;
    if (goal || cut) finish();
    return {obs(), goal ? 1.0 : 0.0, goal || cut};
  }

  int observation_dim() const override { return 2; }
  std::vector<std::pair<double, double>> observation_bounds() const override {
    return {{-1.2, 0.6}, {-0.07, 0.07}};
  }
  std::pair<double, double> project(const Observation& o) const override {
    return {(o.vec[0] + 1.2) / 1.8, (o.vec[1] + 0.07) / 0.14};
  }

 private:
  Observation obs() const { return {-1, {p_, v_}}; }

  int max_steps_;
  double p_ = -0.5, v_ = 0.0;
};

// ---------------------------------------------------------------------------
// Cart-pole swing-up with a sparse balance reward.  The pole starts hanging
// (theta = pi); reward is 1 on steps with cos(theta) > 0.995 and |x| < 0.25
// and the episode only ends at the step limit.  Dynamics are the classic
// cart-pole equations integrated with two Euler substeps of 0.01 s; the cart
// is clipped to |x| <= 2.4 with its velocity zeroed at the rail ends.
class CartPoleSwingupEnv final : public EpisodeBase {
 public:
  CartPoleSwingupEnv(bool reset_jitter, int max_steps, std::uint64_t seed)
      : jitter_(reset_jitter), max_steps_(max_steps > 0 ? max_steps : 1000), rng_(seed) {}

  std::string name() const override { return "cartpole_swingup"; }
  int action_count() const override { return 3; }
  int max_episode_steps() const override { return max_steps_; }
  bool tabular() const override { return false; }

  Observation reset() override {
    begin_episode();
    if (jitter_) {
      // N(0, 0.01): variance 0.01, standard deviation 0.1.
      x_ = 0.1 * rng_.next_normal();
      xdot_ = 0.1 * rng_.next_normal();
      theta_ = std::numbers::pi + 0.1 * rng_.next_normal();
      thetadot_ = 0.1 * rng_.next_normal();
    } else {
      x_ = xdot_ = thetadot_ = 0.0;
      theta_ = std::numbers::pi;
    }
    return obs();
  }

  StepResult step(int action) override {
    require_active(action);
    const bool cut = count_step();
    const double force = kForce * static_cast<double>(action - 1);
    for (int i = 0; i < kSubsteps; ++i) substep(force);
    const double reward = (std::cos(theta_) > 0.995 && std::abs(x_) < 0.25) ? 1.0 : 0.0;
    if (cut) finish();
    return {obs(), reward, cut};
  }

  int observation_dim() const override { return 5; }
  std::vector<std::pair<double, double>> observation_bounds() const override {
    return {{-2.4, 2.4}, {-1.0, 1.0}, {-1.0, 1.0}, {-10.0, 10.0}, {-10.0, 10.0}};
  }
  std::pair<double, double> project(const Observation& o) const override {
    const double theta = std::atan2(o.vec[2], o.vec[1]);
    return {(o.vec[0] + 2.4) / 4.8, (theta + std::numbers::pi) / (2.0 * std::numbers::pi)};
  }

 private:
  // One-meter uniform rod (0.1 kg) hinged on a 1 kg cart, driven by a +-10 N
  // motor at a 20 ms control interval (two 10 ms Euler substeps) on a
  // +-2.4 m rail.
  static constexpr double kGravity = 9.8;
  static constexpr double kMassCart = 1.0;
  static constexpr double kMassPole = 0.1;
  static constexpr double kHalfLength = 0.5;
  static constexpr double kForce = 10.0;
  static constexpr double kDt = 0.01;
  static constexpr int kSubsteps = 2;
  static constexpr double kRail = 2.4;

  void substep(double force) {
    const double total = kMassCart + kMassPole;
    const double cosT = std::cos(theta_);
    const double sinT = std::sin(theta_);
    const double temp = (force + kMassPole * kHalfLength * thetadot_ * thetadot_ * sinT) / total;
    const double theta_acc = (kGravity * sinT - cosT * temp) /
                             (kHalfLength * (4.0 / 3.0 - kMassPole * cosT * cosT / total));
    const double x_acc = temp - kMassPole * kHalfLength * theta_acc * cosT / total;
    x_ += kDt * xdot_;
    xdot_ += kDt * x_acc;
    theta_ += kDt * thetadot_;
    thetadot_ += kDt * theta_acc;
    if (x_ <= -kRail) {
      x_ = -kRail;
      xdot_ = 0.0;
    } else if (x_ >= kRail) {
      x_ = kRail;
      xdot_ = 0.0;
    }
    // Wrap to (-pi, pi]; cos/sin observations are unaffected, the projection
    // used by visit maps needs the bounded representative.
    while (theta_ > std::numbers::pi) theta_ -= 2.0 * std::numbers::pi;
    while (theta_ <= -std::numbers::pi) theta_ += 2.0 * std::numbers::pi;
  }

  Observation obs() const {
    return {-1, {x_, std::cos(theta_), std::sin(theta_), xdot_, thetadot_}};
  }

  bool jitter_;
  int max_steps_;
  SplitMix64 rng_;
  double x_ = 0.0, xdot_ = 0.0, theta_ = std::numbers::pi, thetadot_ = 0.0;
};

}  // namespace

std::unique_ptr<Environment> make_environment(const EnvSpec& spec, std::uint64_t env_seed) {
  if (spec.kind == "chain") return std::make_unique<ChainEnv>(spec.num_blocks, spec.max_episode_steps);
  if (spec.kind == "deep_sea")
    return std::make_unique<DeepSeaEnv>(spec.size, spec.randomized, env_seed);
  if (spec.kind == "grid_world")
    return std::make_unique<GridRoomEnv>(spec.width, spec.height, GridRoomEnv::Mode::goal, false,
                                         spec.goal_row, spec.goal_col, spec.max_episode_steps);
  if (spec.kind == "open_grid")
    return std::make_unique<GridRoomEnv>(spec.width, spec.height, GridRoomEnv::Mode::open,
                                         spec.terminate_on_wall, 0, 0, spec.max_episode_steps);
  if (spec.kind == "unidirectional_chain")
    return std::make_unique<UnidirectionalChainEnv>(spec.length, spec.max_episode_steps);
  if (spec.kind == "mountain_car")
    return std::make_unique<MountainCarEnv>(spec.max_episode_steps);
  if (spec.kind == "cartpole_swingup")
    return std::make_unique<CartPoleSwingupEnv>(spec.reset_jitter, spec.max_episode_steps,
                                                env_seed);
  throw std::invalid_argument("unknown environment kind: " + spec.kind);
}

EnvFactory make_env_factory(const EnvSpec& spec) {
  return [spec](std::uint64_t seed) { return make_environment(spec, seed); };
}

std::string transition_dump(const Environment& env) {
  std::ostringstream out;
  out << "state\taction\tnext_state\tprob\treward\tdone\n";
  for (int s : env.enumerate_states()) {
    if (env.state_terminal(s)) continue;
    for (int a = 0; a < env.action_count(); ++a) {
      for (const Transition& t : env.transitions(s, a)) {
        out << s << '\t' << a << '\t' << t.next_state << '\t' << format_double(t.prob) << '\t'
            << format_double(t.reward) << '\t' << (t.done ? 1 : 0) << '\n';
      }
    }
  }
  return out.str();
}

}  // namespace ezg
