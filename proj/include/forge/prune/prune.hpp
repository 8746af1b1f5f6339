#pragma once

#include "forge/sim/trace.hpp"

#include <cstddef>
#include <optional>
#include <span>

namespace forge::prune {

// Sliding-window spike detector configuration. A window of w+1 samples
// starting at t is flagged when max_i |a_i - mean| >= k * std (population
// std over the same window) and the max deviation exceeds epsilon.
//
// Note the hard bound max|a_i - mean| <= std * sqrt(w): a threshold k can
// only ever fire when w >= k^2, so k = 5 needs w >= 25 (the epsilon floor
// keeps exactly-constant windows from flagging themselves at 0 >= 0).
struct PruneConfig {
  std::size_t window = 20;   // w: window covers samples [t, t+w]
  double threshold = 5.0;    // k
  std::size_t min_keep = 50; // reject traces with a shorter stable prefix
  double epsilon = 1e-9;     // absolute deviation floor

  void validate() const;  // throws ValidationError
};

struct TruncationHit {
  std::size_t window_start;  // t: first flagged window
  std::size_t spike_index;   // argmax |a_i - mean| inside that window
};

// Smallest t whose window [t, t+w] is flagged; nullopt when no window
// qualifies. Throws Error when the signal is shorter than one window.
std::optional<TruncationHit> find_truncation(std::span<const double> signal,
                                             const PruneConfig& cfg);

// Runs find_truncation on every body's linear-acceleration magnitude and
// truncates all series at the earliest flagged window start. Returns the
// pruned copy with truncated_at/spike_index set. Throws ValidationError when
// the surviving prefix is shorter than min_keep.
sim::Trace prune_trace(const sim::Trace& trace, const PruneConfig& cfg);

}  // namespace forge::prune
