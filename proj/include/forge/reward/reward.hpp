#pragma once

#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace forge::reward {

// Binary verifiable reward: 1 iff the prediction lands within rel_tol of the
// truth (absolute fallback below abs_floor, where a relative rule is
// undefined). Non-finite predictions earn 0.
double verify_answer(double predicted, double truth, double rel_tol = 0.05,
                     double abs_floor = 1e-9);

struct GroupAdvantages {
  std::vector<double> advantages;
  bool degenerate = false;  // zero reward variance
};

// (r_i - mean) / std with the population std; a zero-variance group gets all
// zeros and the degenerate flag. Throws Error for fewer than 2 rewards.
GroupAdvantages group_advantages(std::span<const double> rewards);

// One prompt's sampled group: scalar rewards, normalized advantages, and the
// caller-supplied per-sequence log probability ratios log(pi_theta/pi_old).
struct RewardGroup {
  std::string prompt_id;
  std::vector<double> rewards;
  std::vector<double> advantages;
  std::vector<double> seq_log_ratios;
  double epsilon = 0.2;
  bool degenerate = false;
  // optional caller-supplied extras
  std::vector<double> seq_lengths;     // for opt-in length normalization
  std::vector<double> kl_to_reference; // per-sequence KL estimates

  std::size_t size() const { return rewards.size(); }
};

// Builds a group from rewards + log ratios (advantages normalized here).
RewardGroup make_group(std::string prompt_id, std::vector<double> rewards,
                       std::vector<double> seq_log_ratios,
                       double epsilon = 0.2);

struct GspoOptions {
  // Divides each sequence log-ratio by its length before exponentiation.
  // Off by default: the objective uses the raw sequence ratio as written.
  bool length_normalize = false;
  // Adds kl_coeff * mean(kl_to_reference) to the loss. 0 disables.
  double kl_coeff = 0.0;
};

// Clipped sequence-level objective:
//   loss = -mean_groups[ (1/G) sum_i min(rho_i A_i, clip(rho_i, 1-eps, 1+eps) A_i) ]
// with rho_i = exp(seq_log_ratio_i). Throws Error on non-finite log-ratios
// or empty input.
double gspo_loss(std::span<const RewardGroup> groups, GspoOptions opts = {});

// Same value plus d(loss)/d(seq_log_ratio) per group/sequence.
double gspo_loss_with_grad(std::span<const RewardGroup> groups,
                           std::vector<std::vector<double>>& grads,
                           GspoOptions opts = {});

struct FillReport {
  std::vector<RewardGroup> batch;
  int consumed = 0;
  int kept = 0;
  double degeneracy_rate() const {
    return consumed == 0 ? 0.0
                         : static_cast<double>(consumed - kept) / consumed;
  }
};

// Consumes groups in order, keeping only non-degenerate ones, until
// batch_size informative groups are collected. Throws Error when the stream
// ends first. Single-consumer stream contract.
FillReport dynamic_fill(
    const std::function<std::optional<RewardGroup>()>& next_group,
    int batch_size = 32);

}  // namespace forge::reward
