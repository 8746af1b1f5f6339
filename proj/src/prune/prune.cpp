#include "forge/prune/prune.hpp"

#include "forge/common.hpp"

#include <algorithm>
#include <cmath>

namespace forge::prune {

void PruneConfig::validate() const {
  if (window < 2) throw ValidationError("prune window must be >= 2");
  if (threshold <= 0) throw ValidationError("prune threshold must be > 0");
  if (min_keep < 1) throw ValidationError("min_keep must be >= 1");
  if (epsilon < 0) throw ValidationError("epsilon must be >= 0");
}

std::optional<TruncationHit> find_truncation(std::span<const double> signal,
                                             const PruneConfig& cfg) {
  cfg.validate();
  const std::size_t w = cfg.window;
  if (signal.size() < w + 1) {
    throw Error("signal shorter than one window (" +
                std::to_string(signal.size()) + " < " + std::to_string(w + 1) +
                ")");
  }
  const std::size_t n = w + 1;  // samples per window
  for (std::size_t t = 0; t + w < signal.size(); ++t) {
    double mean = 0.0;
    for (std::size_t i = t; i <= t + w; ++i) mean += signal[i];
    mean /= static_cast<double>(n);
    double var = 0.0;
    double max_dev = 0.0;
    std::size_t arg = t;
    for (std::size_t i = t; i <= t + w; ++i) {
      double d = signal[i] - mean;
      var += d * d;
      if (std::abs(d) > max_dev) {
        max_dev = std::abs(d);
        arg = i;
      }
    }
    double sd = std::sqrt(var / static_cast<double>(n));
    if (max_dev >= cfg.threshold * sd && max_dev > cfg.epsilon) {
      return TruncationHit{t, arg};
    }
  }
  return std::nullopt;
}

sim::Trace prune_trace(const sim::Trace& trace, const PruneConfig& cfg) {
  cfg.validate();
  if (trace.times.empty()) throw Error("prune_trace on an empty trace");

  std::optional<TruncationHit> earliest;
  if (trace.times.size() >= cfg.window + 1) {
    for (const auto& body : trace.bodies) {
      std::vector<double> accel(body.acceleration.size());
      for (std::size_t i = 0; i < accel.size(); ++i) {
        accel[i] = body.acceleration[i].head<3>().norm();
      }
      auto hit = find_truncation(accel, cfg);
      if (hit && (!earliest || hit->window_start < earliest->window_start)) {
        earliest = hit;
      }
    }
  }

  sim::Trace out = trace;
  if (!earliest) return out;

  if (earliest->window_start + 1 < cfg.min_keep) {
    throw ValidationError(
        "trace unstable from the start: stable prefix " +
        std::to_string(earliest->window_start + 1) + " < min_keep " +
        std::to_string(cfg.min_keep));
  }
  out.truncate(earliest->window_start);
  out.truncated_at = earliest->window_start;
  out.spike_index = earliest->spike_index;
  return out;
}

}  // namespace forge::prune
