#pragma once

// Group-relative advantages: normalize a rollout group's scalar rewards to
// zero mean and unit population std, then broadcast each rollout's advantage
// to its tokens with retrieved-content positions forced to exactly zero.

#include <cmath>
#include <cstddef>
#include <string>
#include <vector>

#include "planscore/errors.hpp"

namespace planscore {

inline constexpr double kDefaultStdEps = 1e-6;

inline std::vector<double> group_advantages(const std::vector<double>& rewards,
                                            double eps = kDefaultStdEps) {
  const std::size_t n = rewards.size();
  if (n < 2)
    raise(ErrorCode::GroupTooSmall, "need at least 2 rollouts, got " + std::to_string(n));
  double mean = 0.0;
  for (double r : rewards) mean += r;
  mean /= static_cast<double>(n);
  double var = 0.0;
  for (double r : rewards) var += (r - mean) * (r - mean);
  var /= static_cast<double>(n);
  double std_pop = std::sqrt(var);
  std::vector<double> adv(n, 0.0);
  if (std_pop < eps) return adv;  // degenerate group: no learning signal
  for (std::size_t i = 0; i < n; ++i) adv[i] = (rewards[i] - mean) / std_pop;
  return adv;
}

// Masked positions get exactly 0.0, not a small number.
inline std::vector<double> broadcast_with_mask(double advantage, const std::vector<bool>& mask) {
  std::vector<double> out(mask.size(), 0.0);
  for (std::size_t i = 0; i < mask.size(); ++i)
    if (!mask[i]) out[i] = advantage;
  return out;
}

struct AdvantageGroup {
  std::size_t group_size = 0;
  std::vector<double> rewards;
  std::vector<std::vector<bool>> token_masks;       // one mask per rollout
  std::vector<std::vector<double>> advantages;      // token-level, masked
};

inline AdvantageGroup make_advantage_group(std::vector<double> rewards,
                                           std::vector<std::vector<bool>> token_masks,
                                           double eps = kDefaultStdEps) {
  if (rewards.size() != token_masks.size())
    raise(ErrorCode::MalformedInput, "rewards and token masks must align");
  std::vector<double> scalar = group_advantages(rewards, eps);
  AdvantageGroup g;
  g.group_size = rewards.size();
  g.rewards = std::move(rewards);
  g.token_masks = std::move(token_masks);
  g.advantages.reserve(scalar.size());
  for (std::size_t i = 0; i < scalar.size(); ++i)
    g.advantages.push_back(broadcast_with_mask(scalar[i], g.token_masks[i]));
  return g;
}

}  // namespace planscore
