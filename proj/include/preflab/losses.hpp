#pragma once

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "preflab/core.hpp"
#include "preflab/policy.hpp"

namespace preflab {

// ---------------------------------------------------------------------------
// Scalar building blocks
// ---------------------------------------------------------------------------

/// Numerically stable sigmoid. Both branches share the exp(-|x|) term, so
/// sigmoid(x) + sigmoid(-x) = 1 to within one ulp for |x| <= 700.
inline double sigmoid(double x) {
  if (x >= 0.0) {
    const double q = std::exp(-x);
    return 1.0 / (1.0 + q);
  }
  const double q = std::exp(x);
  return q / (1.0 + q);
}

/// softplus(x) = log(1 + exp(x)) without overflow; equals -log sigmoid(-x).
inline double softplus(double x) {
  const double m = std::max(x, 0.0);
  return m + std::log1p(std::exp(-std::abs(x)));
}

/// log sigmoid(x), finite for |x| <= 700.
inline double log_sigmoid(double x) { return -softplus(-x); }

/// Bradley-Terry preference probability P(w > l) = sigmoid(r_w - r_l).
inline double bt_preference_prob(double r_w, double r_l) {
  return sigmoid(r_w - r_l);
}

/// Offset Delta_r = alpha * f(score_w - score_l) for the configured scaling.
/// The 1e-6 clamp inside LogOfDifference keeps near-tie gaps finite.
inline double compute_offset(double score_w, double score_l,
                             OffsetScaling scaling, double alpha) {
  if (!(score_w > score_l))
    throw std::invalid_argument(
        "compute_offset: requires score_w > score_l strictly");
  if (alpha < 0.0)
    throw std::invalid_argument("compute_offset: alpha must be >= 0");
  switch (scaling) {
    case OffsetScaling::LogOfDifference:
      return alpha * std::log(std::max(score_w - score_l, 1e-6));
    case OffsetScaling::DifferenceOfLogs:
      if (!(score_w > 0.0) || !(score_l > 0.0))
        throw std::invalid_argument(
            "compute_offset: DifferenceOfLogs needs positive scores");
      return alpha * (std::log(score_w) - std::log(score_l));
    case OffsetScaling::Identity:
      return alpha * (score_w - score_l);
  }
  throw std::invalid_argument("compute_offset: unknown scaling");
}

// ---------------------------------------------------------------------------
// Loss values with analytic gradients
// ---------------------------------------------------------------------------

/// Loss value plus its gradient with respect to every table entry. Rows of
/// prompts absent from the batch stay exactly zero.
struct LossValue {
  double value = 0.0;
  std::vector<std::vector<double>> gradient;
};

struct SftExample {
  PromptId prompt;
  ResponseId response;
};

namespace detail {

inline std::vector<std::vector<double>> zeros_like(
    const std::vector<std::vector<double>>& shape) {
  std::vector<std::vector<double>> g(shape.size());
  for (std::size_t i = 0; i < shape.size(); ++i)
    g[i].assign(shape[i].size(), 0.0);
  return g;
}

/// Lazily computed log-softmax rows, one per distinct prompt in a batch.
class LogProbCache {
 public:
  explicit LogProbCache(const TabularPolicy& policy)
      : policy_(policy), rows_(policy.n_prompts()) {}

  const std::vector<double>& row(PromptId x) {
    require_prompt(policy_, x);
    auto& slot = rows_[x.index];
    if (slot.empty()) slot = log_softmax_row(policy_.logits[x.index]);
    return slot;
  }

 private:
  const TabularPolicy& policy_;
  std::vector<std::vector<double>> rows_;
};

inline void require_pair_indices(const TabularPolicy& shape,
                                 const PreferenceExample& ex) {
  require_response(shape, ex.prompt, ex.preferred);
  require_response(shape, ex.prompt, ex.dispreferred);
}

/// Shared core of DPO / ODPO / softmax-margin: mean over pairs of
/// -log sigmoid(beta * (log-ratio gap) - offset(k)). The gradient of the
/// log-prob gap with respect to the shared prompt row is the difference of
/// one-hots; the softmax terms cancel.
template <typename OffsetFn>
LossValue pairwise_logistic_loss(const TabularPolicy& policy,
                                 const TabularPolicy& piref, double beta,
                                 const std::vector<PreferenceExample>& batch,
                                 OffsetFn&& offset_of) {
  if (!(beta > 0.0)) throw std::invalid_argument("loss: beta must be > 0");
  if (batch.empty()) throw std::invalid_argument("loss: empty batch");
  if (!same_shape(policy.logits, piref.logits))
    throw std::invalid_argument("loss: policy and piref shapes differ");

  LossValue out;
  out.gradient = zeros_like(policy.logits);
  LogProbCache lp(policy);
  LogProbCache lpref(piref);

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (std::size_t k = 0; k < batch.size(); ++k) {
    const auto& ex = batch[k];
    require_pair_indices(policy, ex);
    const auto& row = lp.row(ex.prompt);
    const auto& ref = lpref.row(ex.prompt);
    const double gap =
        (row[ex.preferred.index] - ref[ex.preferred.index]) -
        (row[ex.dispreferred.index] - ref[ex.dispreferred.index]);
    const double z = beta * gap - offset_of(k);
    if (!std::isfinite(z))
      throw std::invalid_argument("loss: non-finite sigmoid argument");
    out.value += softplus(-z) * inv_n;
    const double coeff = (sigmoid(z) - 1.0) * beta * inv_n;
    out.gradient[ex.prompt.index][ex.preferred.index] += coeff;
    out.gradient[ex.prompt.index][ex.dispreferred.index] -= coeff;
  }
  return out;
}

}  // namespace detail

/// Mean negative log-likelihood of (prompt, response) pairs; the supervised
/// fine-tuning objective. Gradient per example is softmax minus one-hot.
inline LossValue sft_nll(const TabularPolicy& policy,
                         const std::vector<SftExample>& dataset) {
  if (dataset.empty()) throw std::invalid_argument("sft_nll: empty dataset");
  LossValue out;
  out.gradient = detail::zeros_like(policy.logits);
  detail::LogProbCache lp(policy);
  const double inv_n = 1.0 / static_cast<double>(dataset.size());
  for (const auto& ex : dataset) {
    detail::require_response(policy, ex.prompt, ex.response);
    const auto& row = lp.row(ex.prompt);
    out.value -= row[ex.response.index] * inv_n;
    auto& grow = out.gradient[ex.prompt.index];
    for (std::size_t j = 0; j < row.size(); ++j)
      grow[j] += std::exp(row[j]) * inv_n;
    grow[ex.response.index] -= inv_n;
  }
  return out;
}

/// Reward-model objective: mean -log sigmoid(r(x,y_w) - r(x,y_l)) over a
/// batch, gradient taken with respect to the reward parameters themselves.
inline LossValue bt_reward_loss(const RewardTable& params,
                                const std::vector<PreferenceExample>& batch) {
  if (batch.empty()) throw std::invalid_argument("bt_reward_loss: empty batch");
  LossValue out;
  out.gradient = detail::zeros_like(params.values);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    const auto& row = params.values.at(ex.prompt.index);
    const double z = row.at(ex.preferred.index) - row.at(ex.dispreferred.index);
    out.value += softplus(-z) * inv_n;
    const double coeff = (sigmoid(z) - 1.0) * inv_n;
    out.gradient[ex.prompt.index][ex.preferred.index] += coeff;
    out.gradient[ex.prompt.index][ex.dispreferred.index] -= coeff;
  }
  return out;
}

/// DPO: mean -log sigmoid of the estimated-reward gap
/// beta (log pi/piref at y_w  minus  log pi/piref at y_l).
inline LossValue dpo_loss(const TabularPolicy& policy,
                          const TabularPolicy& piref, double beta,
                          const std::vector<PreferenceExample>& batch) {
  return detail::pairwise_logistic_loss(policy, piref, beta, batch,
                                        [](std::size_t) { return 0.0; });
}

/// ODPO: DPO with the sigmoid argument shifted by each pair's offset.
/// Offsets of zero reproduce dpo_loss through the identical floating-point
/// path. Negative offsets are legal here.
inline LossValue odpo_loss(const TabularPolicy& policy,
                           const TabularPolicy& piref, double beta,
                           const std::vector<PreferenceExample>& batch) {
  for (const auto& ex : batch)
    if (!std::isfinite(ex.offset))
      throw std::invalid_argument("odpo_loss: non-finite offset");
  return detail::pairwise_logistic_loss(
      policy, piref, beta, batch,
      [&batch](std::size_t k) { return batch[k].offset; });
}

/// Softmax-margin: ODPO's shifted-sigmoid loss with the cost constrained
/// non-negative. Coincides with odpo_loss exactly when cost = Delta_r >= 0.
inline LossValue softmax_margin_loss(const TabularPolicy& policy,
                                     const TabularPolicy& piref, double beta,
                                     const std::vector<PreferenceExample>& batch,
                                     const std::vector<double>& costs) {
  if (costs.size() != batch.size())
    throw std::invalid_argument(
        "softmax_margin_loss: one cost per pair required");
  for (double c : costs)
    if (!(c >= 0.0))
      throw std::invalid_argument(
          "softmax_margin_loss: costs must be non-negative");
  return detail::pairwise_logistic_loss(
      policy, piref, beta, batch,
      [&costs](std::size_t k) { return costs[k]; });
}

/// SLiC rank calibration: mean hinge max(0, delta - (log pi(y_w) - log pi(y_l))).
/// Subgradient at the kink is 0.
inline LossValue slic_loss(const TabularPolicy& policy,
                           const std::vector<PreferenceExample>& batch,
                           double delta) {
  if (delta < 0.0) throw std::invalid_argument("slic_loss: delta must be >= 0");
  if (batch.empty()) throw std::invalid_argument("slic_loss: empty batch");
  LossValue out;
  out.gradient = detail::zeros_like(policy.logits);
  detail::LogProbCache lp(policy);
  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (const auto& ex : batch) {
    detail::require_pair_indices(policy, ex);
    const auto& row = lp.row(ex.prompt);
    const double gap = row[ex.preferred.index] - row[ex.dispreferred.index];
    const double hinge = delta - gap;
    if (hinge > 0.0) {
      out.value += hinge * inv_n;
      out.gradient[ex.prompt.index][ex.preferred.index] -= inv_n;
      out.gradient[ex.prompt.index][ex.dispreferred.index] += inv_n;
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dispatch used by the trainer
// ---------------------------------------------------------------------------

inline const char* loss_kind_name(LossKind kind) {
  switch (kind) {
    case LossKind::SftNll: return "sft-nll";
    case LossKind::BtReward: return "bt-reward";
    case LossKind::Dpo: return "dpo";
    case LossKind::Odpo: return "odpo";
    case LossKind::SoftmaxMargin: return "softmax-margin";
    case LossKind::Slic: return "slic";
  }
  return "unknown";
}

/// Evaluates the configured loss on a parameter table. For policy losses the
/// table is the policy's logits; for BtReward it is the reward parameters.
/// SftNll fits the preferred response of each pair.
inline LossValue evaluate_loss(const LossSpec& spec,
                               const TabularPolicy& params,
                               const TabularPolicy& piref,
                               const std::vector<PreferenceExample>& batch) {
  switch (spec.kind) {
    case LossKind::SftNll: {
      std::vector<SftExample> targets;
      targets.reserve(batch.size());
      for (const auto& ex : batch)
        targets.push_back({ex.prompt, ex.preferred});
      return sft_nll(params, targets);
    }
    case LossKind::BtReward:
      return bt_reward_loss(RewardTable{params.logits}, batch);
    case LossKind::Dpo:
      return dpo_loss(params, piref, spec.beta, batch);
    case LossKind::Odpo:
      return odpo_loss(params, piref, spec.beta, batch);
    case LossKind::SoftmaxMargin: {
      std::vector<double> costs;
      costs.reserve(batch.size());
      for (const auto& ex : batch) costs.push_back(ex.offset);
      return softmax_margin_loss(params, piref, spec.beta, batch, costs);
    }
    case LossKind::Slic:
      return slic_loss(params, batch, spec.slic_margin);
  }
  throw std::invalid_argument("evaluate_loss: unknown loss kind");
}

}  // namespace preflab
