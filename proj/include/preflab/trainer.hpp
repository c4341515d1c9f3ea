#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "preflab/core.hpp"
#include "preflab/losses.hpp"
#include "preflab/policy.hpp"

namespace preflab {

/// Full-batch plain gradient descent with a constant learning rate,
/// initialized at the reference policy so KL starts at exactly zero.
struct TrainConfig {
  LossSpec loss;
  double learning_rate = 0.05;
  std::int64_t max_steps = 2000;
  double grad_norm_tol = 1e-7;
  std::int64_t seed = 0;       // recorded for provenance; descent is exact
  std::int64_t log_every = 100;
};

struct TraceEntry {
  std::int64_t step = 0;
  double loss = 0.0;
  double grad_norm = 0.0;
  double kl = 0.0;
  double reward = 0.0;  // NaN when no reward table was supplied
};

struct TrainTrace {
  std::vector<TraceEntry> entries;
};

struct TrainResult {
  TabularPolicy policy;
  TrainTrace trace;
};

namespace detail {

inline double l2_norm(const std::vector<std::vector<double>>& g) {
  double s = 0.0;
  for (const auto& row : g)
    for (double v : row) s += v * v;
  return std::sqrt(s);
}

}  // namespace detail

/// Minimizes the configured loss over a copy of piref's logits. Stops at
/// max_steps or once the gradient L2 norm falls to grad_norm_tol. Throws
/// DivergenceError with the step index if the loss goes non-finite.
/// Bit-reproducible for identical (config, dataset, piref).
inline TrainResult train(const TrainConfig& config,
                         const std::vector<PreferenceExample>& dataset,
                         const TabularPolicy& piref,
                         const RewardTable* reward = nullptr) {
  if (dataset.empty()) throw std::invalid_argument("train: empty dataset");
  if (!(config.learning_rate > 0.0) && config.learning_rate != 0.0)
    throw std::invalid_argument("train: learning rate must be positive");
  if (config.max_steps < 1)
    throw std::invalid_argument("train: max_steps must be >= 1");
  if (config.log_every < 1)
    throw std::invalid_argument("train: log_every must be >= 1");

  TrainResult result;
  result.policy = piref;

  const double nan = std::numeric_limits<double>::quiet_NaN();
  auto log_state = [&](std::int64_t step, double loss, double gnorm) {
    TraceEntry e;
    e.step = step;
    e.loss = loss;
    e.grad_norm = gnorm;
    e.kl = exact_kl(result.policy, piref).mean;
    e.reward = reward ? expected_reward(result.policy, *reward) : nan;
    result.trace.entries.push_back(e);
  };

  std::int64_t step = 0;
  for (; step < config.max_steps; ++step) {
    LossValue lv = evaluate_loss(config.loss, result.policy, piref, dataset);
    if (!std::isfinite(lv.value))
      throw DivergenceError(step, "train: loss became non-finite at step " +
                                      std::to_string(step));
    const double gnorm = detail::l2_norm(lv.gradient);
    if (step % config.log_every == 0) log_state(step, lv.value, gnorm);
    if (gnorm <= config.grad_norm_tol) break;
    for (std::size_t x = 0; x < result.policy.logits.size(); ++x)
      for (std::size_t y = 0; y < result.policy.logits[x].size(); ++y)
        result.policy.logits[x][y] -= config.learning_rate * lv.gradient[x][y];
  }

  // Final state, logged once (strictly increasing step indices).
  LossValue lv = evaluate_loss(config.loss, result.policy, piref, dataset);
  if (!std::isfinite(lv.value))
    throw DivergenceError(step, "train: loss became non-finite at step " +
                                    std::to_string(step));
  if (result.trace.entries.empty() ||
      result.trace.entries.back().step < step)
    log_state(step, lv.value, detail::l2_norm(lv.gradient));
  return result;
}

/// Infinite-data idealization of DPO: every ordered response pair of every
/// prompt contributes, weighted by the exact Bradley-Terry probability of
/// that ordering under the true rewards. At the minimum the implied-reward
/// gaps reproduce the true reward gaps on the finite response sets.
inline TabularPolicy train_on_population(const TrainConfig& config,
                                         const RewardTable& true_rewards,
                                         const TabularPolicy& piref) {
  if (config.loss.kind != LossKind::Dpo)
    throw std::invalid_argument(
        "train_on_population: only the DPO loss has a population form here");
  const double beta = config.loss.beta;
  if (!(beta > 0.0))
    throw std::invalid_argument("train_on_population: beta must be > 0");
  if (!same_shape(piref.logits, true_rewards.values))
    throw std::invalid_argument(
        "train_on_population: piref and rewards shapes differ");

  TabularPolicy policy = piref;
  const std::size_t n = piref.n_prompts();

  for (std::int64_t step = 0; step < config.max_steps; ++step) {
    double value = 0.0;
    auto grad = detail::zeros_like(policy.logits);
    for (std::size_t x = 0; x < n; ++x) {
      const auto lp = log_softmax_row(policy.logits[x]);
      const auto lref = log_softmax_row(piref.logits[x]);
      const auto& r = true_rewards.values[x];
      const std::size_t k = lp.size();
      if (k < 2) continue;
      const double inv_pairs = 1.0 / static_cast<double>(k * (k - 1));
      for (std::size_t a = 0; a < k; ++a) {
        for (std::size_t b = 0; b < k; ++b) {
          if (a == b) continue;
          const double w = bt_preference_prob(r[a], r[b]);
          const double z = beta * ((lp[a] - lref[a]) - (lp[b] - lref[b]));
          value += w * softplus(-z) * inv_pairs;
          const double coeff = w * (sigmoid(z) - 1.0) * beta * inv_pairs;
          grad[x][a] += coeff;
          grad[x][b] -= coeff;
        }
      }
    }
    value /= static_cast<double>(n);
    if (!std::isfinite(value))
      throw DivergenceError(step,
                            "train_on_population: loss became non-finite at "
                            "step " + std::to_string(step));
    double gnorm = 0.0;
    for (auto& row : grad)
      for (auto& v : row) {
        v /= static_cast<double>(n);
        gnorm += v * v;
      }
    if (std::sqrt(gnorm) <= config.grad_norm_tol) break;
    for (std::size_t x = 0; x < n; ++x)
      for (std::size_t y = 0; y < policy.logits[x].size(); ++y)
        policy.logits[x][y] -= config.learning_rate * grad[x][y];
  }
  return policy;
}

}  // namespace preflab
