#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "preflab/core.hpp"
#include "preflab/rng.hpp"

namespace preflab {

/// Exact summary of a policy against its reference and a reward table.
struct PolicyEvaluation {
  double expected_reward = 0.0;
  double kl_to_ref = 0.0;  // nats, mean over prompts
  std::vector<double> per_prompt_kl;
};

struct KlDivergence {
  double mean = 0.0;
  std::vector<double> per_prompt;
};

namespace detail {

inline void require_prompt(const TabularPolicy& p, PromptId x) {
  if (x.index >= p.n_prompts())
    throw std::out_of_range("prompt index " + std::to_string(x.index) +
                            " out of range (" + std::to_string(p.n_prompts()) +
                            " prompts)");
}

inline void require_response(const TabularPolicy& p, PromptId x, ResponseId y) {
  require_prompt(p, x);
  if (y.index >= p.n_responses(x))
    throw std::out_of_range("response index " + std::to_string(y.index) +
                            " out of range for prompt " +
                            std::to_string(x.index));
}

}  // namespace detail

/// log pi(y|x) under the softmax over prompt x's logit row.
inline double log_prob(const TabularPolicy& policy, PromptId x, ResponseId y) {
  detail::require_response(policy, x, y);
  const auto& row = policy.logits[x.index];
  return row[y.index] - log_sum_exp(row);
}

/// Full row of log probabilities for one prompt.
inline std::vector<double> log_prob_row(const TabularPolicy& policy, PromptId x) {
  detail::require_prompt(policy, x);
  return log_softmax_row(policy.logits[x.index]);
}

/// KL[p(.|x) || q(.|x)] summed exactly over the finite response set,
/// averaged over prompts. Finite softmax rows give q > 0 everywhere, so the
/// sum is always well defined.
inline KlDivergence exact_kl(const TabularPolicy& p, const TabularPolicy& q) {
  if (!same_shape(p.logits, q.logits))
    throw std::invalid_argument("exact_kl: policies have different shapes");
  KlDivergence out;
  out.per_prompt.reserve(p.n_prompts());
  for (std::size_t x = 0; x < p.n_prompts(); ++x) {
    const auto lp = log_softmax_row(p.logits[x]);
    const auto lq = log_softmax_row(q.logits[x]);
    double kl = 0.0;
    for (std::size_t y = 0; y < lp.size(); ++y)
      kl += std::exp(lp[y]) * (lp[y] - lq[y]);
    out.per_prompt.push_back(std::max(kl, 0.0));  // clamp -0-scale rounding
  }
  double sum = 0.0;
  for (double k : out.per_prompt) sum += k;
  out.mean = p.n_prompts() ? sum / static_cast<double>(p.n_prompts()) : 0.0;
  return out;
}

/// Mean over prompts of sum_y pi(y|x) r(x,y). Exact enumeration, no sampling.
inline double expected_reward(const TabularPolicy& policy,
                              const RewardTable& reward) {
  if (!same_shape(policy.logits, reward.values))
    throw std::invalid_argument(
        "expected_reward: policy and reward table have different shapes");
  double total = 0.0;
  for (std::size_t x = 0; x < policy.n_prompts(); ++x) {
    const auto lp = log_softmax_row(policy.logits[x]);
    double er = 0.0;
    for (std::size_t y = 0; y < lp.size(); ++y)
      er += std::exp(lp[y]) * reward.values[x][y];
    total += er;
  }
  return policy.n_prompts() ? total / static_cast<double>(policy.n_prompts())
                            : 0.0;
}

inline PolicyEvaluation evaluate_policy(const TabularPolicy& policy,
                                        const TabularPolicy& piref,
                                        const RewardTable& reward) {
  PolicyEvaluation ev;
  auto kl = exact_kl(policy, piref);
  ev.kl_to_ref = kl.mean;
  ev.per_prompt_kl = std::move(kl.per_prompt);
  ev.expected_reward = expected_reward(policy, reward);
  return ev;
}

/// Closed-form optimum of the KL-regularized expected-reward objective:
/// pi*(y|x) = piref(y|x) exp(r(x,y)/beta) / Z(x), with Z(x) an exact sum
/// over the finite response set. Returned logits are normalized log
/// probabilities.
inline TabularPolicy optimal_policy(const TabularPolicy& piref,
                                    const RewardTable& reward, double beta) {
  if (!(beta > 0.0))
    throw std::invalid_argument("optimal_policy: beta must be > 0");
  if (!same_shape(piref.logits, reward.values))
    throw std::invalid_argument(
        "optimal_policy: piref and reward table have different shapes");
  TabularPolicy out;
  out.logits.reserve(piref.n_prompts());
  for (std::size_t x = 0; x < piref.n_prompts(); ++x) {
    auto row = log_softmax_row(piref.logits[x]);
    for (std::size_t y = 0; y < row.size(); ++y)
      row[y] += reward.values[x][y] / beta;
    out.logits.push_back(log_softmax_row(row));
  }
  return out;
}

/// Estimated reward r̂(x,y) = beta (log pi(y|x) - log piref(y|x)). Per-prompt
/// differences of this quantity reproduce true reward differences for the
/// closed-form optimum; the beta log Z(x) shift cancels.
inline double implied_reward(const TabularPolicy& policy,
                             const TabularPolicy& piref, double beta,
                             PromptId x, ResponseId y) {
  if (!(beta > 0.0))
    throw std::invalid_argument("implied_reward: beta must be > 0");
  return beta * (log_prob(policy, x, y) - log_prob(piref, x, y));
}

/// Draws one response from the exact categorical distribution of prompt x.
/// Consumes exactly one engine word; deterministic per state and call order.
inline ResponseId sample_response(const TabularPolicy& policy, PromptId x,
                                  Rng& rng) {
  detail::require_prompt(policy, x);
  const auto lp = log_softmax_row(policy.logits[x.index]);
  const double u = uniform_unit(rng);
  double cum = 0.0;
  for (std::size_t y = 0; y < lp.size(); ++y) {
    cum += std::exp(lp[y]);
    if (u < cum) return ResponseId{y};
  }
  return ResponseId{lp.size() - 1};  // u landed in the rounding tail
}

inline ResponseId sample_response(const TabularPolicy& policy, PromptId x,
                                  std::uint64_t rng_seed) {
  Rng rng = make_rng(rng_seed);
  return sample_response(policy, x, rng);
}

}  // namespace preflab
