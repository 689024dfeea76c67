#pragma once

#include <cstdint>
#include <optional>
#include <span>

#include "ezgreedy/duration.hpp"
#include "ezgreedy/rng.hpp"

namespace ezg {

enum class TieBreak { uniform, first_index };

// Index of the maximal entry.  TieBreak::uniform picks uniformly among all
// exactly-equal maxima (consuming one draw only when there is a tie);
// TieBreak::first_index keeps the lowest index deterministically.
int greedy_action(std::span<const double> q_row, SplitMix64& rng,
                  TieBreak tie_break = TieBreak::uniform);

// Classic one-step epsilon-greedy: with probability epsilon a uniform action
// (the greedy one included), otherwise the greedy action.
int epsilon_greedy_select(double epsilon, std::span<const double> q_row, SplitMix64& rng,
                          TieBreak tie_break = TieBreak::uniform);

struct RepeatOption {
  int action = 0;       // action repeated on every step of the option
  int total_steps = 0;  // sampled duration n
  int remaining = 0;    // emissions still owed; the option is dropped at 0
};

// Temporally-extended epsilon-greedy controller.  With probability epsilon a
// duration n ~ z and a uniform action a are sampled and a is repeated for
// exactly n steps in total (the selection that installs the option already
// emits the first of the n).  Otherwise the greedy action is taken and no
// option is installed.  pseudocode_literal switches to the off-by-one variant
// that emits n+1 repetitions, matching a literal reading of the counter reset.
class EzGreedyPolicy {
 public:
  EzGreedyPolicy(double epsilon, DurationDistribution duration, bool pseudocode_literal = false,
                 TieBreak tie_break = TieBreak::uniform);

  int select(std::span<const double> q_row, SplitMix64& rng);

  // Episode boundaries interrupt options: any active option is dropped.
  void episode_end() { option_.reset(); }

  const std::optional<RepeatOption>& active_option() const { return option_; }
  double epsilon() const { return epsilon_; }
  const DurationDistribution& duration() const { return duration_; }
  TieBreak tie_break() const { return tie_break_; }

  // Instrumentation for tests and analysis (greedy steps excluded from
  // steps_in_option; the installing emission is included).
  bool last_was_exploratory() const { return last_exploratory_; }
  int last_installed_duration() const { return last_installed_; }
  std::uint64_t steps_total() const { return steps_total_; }
  std::uint64_t steps_in_option() const { return steps_in_option_; }

 private:
  double epsilon_;
  DurationDistribution duration_;
  bool pseudocode_literal_;
  TieBreak tie_break_;
  std::optional<RepeatOption> option_;

  bool last_exploratory_ = false;
  int last_installed_ = 0;
  std::uint64_t steps_total_ = 0;
  std::uint64_t steps_in_option_ = 0;
};

}  // namespace ezg
