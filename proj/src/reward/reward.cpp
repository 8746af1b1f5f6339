#include "forge/reward/reward.hpp"

#include "forge/common.hpp"

#include <algorithm>
#include <cmath>

namespace forge::reward {

double verify_answer(double predicted, double truth, double rel_tol,
                     double abs_floor) {
  if (!std::isfinite(truth)) throw Error("verify_answer: truth must be finite");
  if (!std::isfinite(predicted)) return 0.0;
  double err = std::abs(predicted - truth);
  if (std::abs(truth) < abs_floor) {
    return err <= abs_floor ? 1.0 : 0.0;
  }
  return err <= rel_tol * std::abs(truth) ? 1.0 : 0.0;
}

GroupAdvantages group_advantages(std::span<const double> rewards) {
  if (rewards.size() < 2) {
    throw Error("group_advantages needs at least 2 rewards");
  }
  double mean = 0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(rewards.size());
  double var = 0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(rewards.size());  // population
  double sd = std::sqrt(var);

  GroupAdvantages out;
  out.advantages.resize(rewards.size());
  if (sd == 0.0) {
    std::fill(out.advantages.begin(), out.advantages.end(), 0.0);
    out.degenerate = true;
    return out;
  }
  for (std::size_t i = 0; i < rewards.size(); ++i) {
    out.advantages[i] = (rewards[i] - mean) / sd;
  }
  return out;
}

RewardGroup make_group(std::string prompt_id, std::vector<double> rewards,
                       std::vector<double> seq_log_ratios, double epsilon) {
  if (rewards.size() != seq_log_ratios.size()) {
    throw Error("make_group: rewards and log-ratios must align");
  }
  RewardGroup g;
  g.prompt_id = std::move(prompt_id);
  g.rewards = std::move(rewards);
  g.seq_log_ratios = std::move(seq_log_ratios);
  g.epsilon = epsilon;
  auto adv = group_advantages(g.rewards);
  g.advantages = std::move(adv.advantages);
  g.degenerate = adv.degenerate;
  return g;
}

namespace {

double group_term(const RewardGroup& g, const GspoOptions& opts,
                  std::vector<double>* grad) {
  if (g.advantages.size() != g.seq_log_ratios.size()) {
    throw Error("gspo_loss: group advantages/log-ratios must align");
  }
  double sum = 0;
  if (grad) grad->assign(g.size(), 0.0);
  for (std::size_t i = 0; i < g.size(); ++i) {
    double l = g.seq_log_ratios[i];
    if (!std::isfinite(l)) throw Error("gspo_loss: non-finite log ratio");
    double len = 1.0;
    if (opts.length_normalize) {
      if (g.seq_lengths.size() != g.size()) {
        throw Error("gspo_loss: length normalization needs seq_lengths");
      }
      len = g.seq_lengths[i];
      if (len <= 0) throw Error("gspo_loss: sequence lengths must be > 0");
    }
    double rho = std::exp(l / len);
    double a = g.advantages[i];
    double plain = rho * a;
    double clipped = std::clamp(rho, 1.0 - g.epsilon, 1.0 + g.epsilon) * a;
    double term = std::min(plain, clipped);
    sum += term;
    if (grad) {
      // the min picks the unclipped branch unless clipping lowers it
      bool unclipped = plain <= clipped;
      (*grad)[i] = unclipped ? rho * a / len : 0.0;
    }
  }
  return sum / static_cast<double>(g.size());
}

}  // namespace

double gspo_loss(std::span<const RewardGroup> groups, GspoOptions opts) {
  std::vector<std::vector<double>> grads;
  return gspo_loss_with_grad(groups, grads, opts);
}

double gspo_loss_with_grad(std::span<const RewardGroup> groups,
                           std::vector<std::vector<double>>& grads,
                           GspoOptions opts) {
  if (groups.empty()) throw Error("gspo_loss: no groups");
  grads.assign(groups.size(), {});
  double total = 0;
  double kl_total = 0;
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    total += group_term(groups[gi], opts, &grads[gi]);
    if (opts.kl_coeff != 0.0 && !groups[gi].kl_to_reference.empty()) {
      double kl = 0;
      for (double k : groups[gi].kl_to_reference) kl += k;
      kl_total += kl / static_cast<double>(groups[gi].kl_to_reference.size());
    }
  }
  double n = static_cast<double>(groups.size());
  double loss = -total / n + opts.kl_coeff * kl_total / n;
  for (auto& g : grads) {
    for (auto& d : g) d = -d / n;
  }
  // per-sequence 1/G factor
  for (std::size_t gi = 0; gi < groups.size(); ++gi) {
    double G = static_cast<double>(groups[gi].size());
    for (auto& d : grads[gi]) d /= G;
  }
  return loss;
}

FillReport dynamic_fill(
    const std::function<std::optional<RewardGroup>()>& next_group,
    int batch_size) {
  if (batch_size < 1) throw Error("dynamic_fill: batch_size must be >= 1");
  FillReport report;
  while (static_cast<int>(report.batch.size()) < batch_size) {
    auto g = next_group();
    if (!g) {
      throw Error("dynamic_fill: stream exhausted after " +
                  std::to_string(report.consumed) + " groups (" +
                  std::to_string(report.kept) + " informative)");
    }
    report.consumed++;
    if (g->degenerate) continue;
    report.kept++;
    report.batch.push_back(std::move(*g));
  }
  return report;
}

}  // namespace forge::reward
