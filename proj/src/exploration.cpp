#include "ezgreedy/exploration.hpp"

#include <stdexcept>

namespace ezg {

int greedy_action(std::span<const double> q_row, SplitMix64& rng, TieBreak tie_break) {
  if (q_row.empty()) throw std::invalid_argument("greedy_action: empty action-value row");
  int best = 0;
  int ties = 1;
  for (int a = 1; a < static_cast<int>(q_row.size()); ++a) {
    if (q_row[a] > q_row[best]) {
      best = a;
      ties = 1;
    } else if (q_row[a] == q_row[best] && tie_break == TieBreak::uniform) {
      ++ties;
    }
  }
  if (ties == 1) return best;
  // Reservoir-style second pass keeps this allocation-free.
  std::uint64_t pick = rng.next_below(static_cast<std::uint64_t>(ties));
  for (int a = 0; a < static_cast<int>(q_row.size()); ++a) {
    if (q_row[a] == q_row[best] && pick-- == 0) return a;
  }
  return best;  // unreachable
}

int epsilon_greedy_select(double epsilon, std::span<const double> q_row, SplitMix64& rng,
                          TieBreak tie_break) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("epsilon_greedy_select: epsilon outside [0, 1]");
  if (q_row.empty()) throw std::invalid_argument("epsilon_greedy_select: empty action-value row");
  if (rng.next_double() < epsilon)
    return static_cast<int>(rng.next_below(static_cast<std::uint64_t>(q_row.size())));
  return greedy_action(q_row, rng, tie_break);
}

EzGreedyPolicy::EzGreedyPolicy(double epsilon, DurationDistribution duration,
                               bool pseudocode_literal, TieBreak tie_break)
    : epsilon_(epsilon),
      duration_(std::move(duration)),
      pseudocode_literal_(pseudocode_literal),
      tie_break_(tie_break) {
  if (!(epsilon >= 0.0 && epsilon <= 1.0))
    throw std::invalid_argument("EzGreedyPolicy: epsilon outside [0, 1]");
}

int EzGreedyPolicy::select(std::span<const double> q_row, SplitMix64& rng) {
  if (q_row.empty()) throw std::invalid_argument("EzGreedyPolicy: empty action-value row");
  ++steps_total_;
  last_installed_ = 0;

  if (option_) {
    if (option_->action >= static_cast<int>(q_row.size()))
      throw std::invalid_argument("EzGreedyPolicy: action count shrank under an active option");
    const int a = option_->action;
    if (--option_->remaining == 0) option_.reset();
    last_exploratory_ = true;
    ++steps_in_option_;
    return a;
  }

  if (rng.next_double() < epsilon_) {
    const int n = duration_.sample(rng);
    const int a = static_cast<int>(rng.next_below(static_cast<std::uint64_t>(q_row.size())));
    const int remaining = pseudocode_literal_ ? n : n - 1;
    if (remaining > 0) option_ = RepeatOption{a, n, remaining};
    last_installed_ = n;
    last_exploratory_ = true;
    ++steps_in_option_;
    return a;
  }

  last_exploratory_ = false;
  return greedy_action(q_row, rng, tie_break_);
}

}  // namespace ezg
