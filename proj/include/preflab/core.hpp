#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace preflab {

inline constexpr const char* kVersion = "0.1.0";

// ---------------------------------------------------------------------------
// Identifiers
// ---------------------------------------------------------------------------

struct PromptId {
  std::size_t index = 0;
  friend constexpr auto operator<=>(PromptId, PromptId) = default;
};

struct ResponseId {
  std::size_t index = 0;
  friend constexpr auto operator<=>(ResponseId, ResponseId) = default;
};

/// A response together with its task score s(x, y).
struct ScoredResponse {
  ResponseId response;
  double score = 0.0;
};

// ---------------------------------------------------------------------------
// Preference data
// ---------------------------------------------------------------------------

/// One (prompt, preferred, dispreferred) triple with optional pointwise
/// scores and the precomputed offset in log-reward units. Offsets are set
/// once at dataset construction and never recomputed at loss time.
struct PreferenceExample {
  PromptId prompt;
  ResponseId preferred;
  ResponseId dispreferred;
  std::optional<double> score_w;
  std::optional<double> score_l;
  double offset = 0.0;
};

// ---------------------------------------------------------------------------
// Tables
// ---------------------------------------------------------------------------

/// Ground-truth pointwise reward for every (prompt, response) pair.
/// Rows may be ragged: each prompt owns its own finite response set.
struct RewardTable {
  std::vector<std::vector<double>> values;

  std::size_t n_prompts() const { return values.size(); }
  std::size_t n_responses(PromptId x) const { return values.at(x.index).size(); }
};

/// Per-prompt logit rows defining a softmax distribution over that prompt's
/// finite response set. Probabilities are only ever materialized through
/// normalized softmax; everything else stays in log space.
struct TabularPolicy {
  std::vector<std::vector<double>> logits;

  std::size_t n_prompts() const { return logits.size(); }
  std::size_t n_responses(PromptId x) const { return logits.at(x.index).size(); }
};

inline bool same_shape(const std::vector<std::vector<double>>& a,
                       const std::vector<std::vector<double>>& b) {
  if (a.size() != b.size()) return false;
  for (std::size_t i = 0; i < a.size(); ++i)
    if (a[i].size() != b[i].size()) return false;
  return true;
}

// ---------------------------------------------------------------------------
// Loss selection
// ---------------------------------------------------------------------------

enum class LossKind { SftNll, BtReward, Dpo, Odpo, SoftmaxMargin, Slic };

/// Choice of the monotone scaling f applied to the score gap when building
/// offsets: ln(s_w - s_l), ln(s_w) - ln(s_l), or the raw gap.
enum class OffsetScaling { LogOfDifference, DifferenceOfLogs, Identity };

struct LossSpec {
  LossKind kind = LossKind::Dpo;
  double beta = 0.5;         // KL regularization strength
  double alpha = 0.0;        // offset scale; 0 reduces ODPO to DPO
  OffsetScaling scaling = OffsetScaling::LogOfDifference;
  double slic_margin = 1.0;  // hinge margin delta
};

/// One trained run's summary: the axes of a reward-vs-KL plot plus its
/// full sweep coordinates.
struct ExperimentPoint {
  std::string method;
  double beta = 0.0;
  double alpha = 0.0;
  std::int64_t seed = 0;
  double kl = 0.0;      // nats, exact, mean over prompts
  double reward = 0.0;  // exact expected reward
  std::int64_t dataset_size = 0;
};

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

/// Input data violates a documented invariant (bad file contents, malformed
/// task, out-of-range score, ...).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// File could not be read/written.
class IoError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Training produced a non-finite loss.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(std::int64_t step, const std::string& what)
      : std::runtime_error(what), step_(step) {}
  std::int64_t step() const { return step_; }

 private:
  std::int64_t step_;
};

// ---------------------------------------------------------------------------
// Log-space numerics shared by all modules
// ---------------------------------------------------------------------------

inline double log_sum_exp(const std::vector<double>& v) {
  double m = -std::numeric_limits<double>::infinity();
  for (double x : v) m = std::max(m, x);
  if (!std::isfinite(m)) return m;  // all -inf, or a NaN/inf poisoned row
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

/// Row of log probabilities for one prompt: logits - logsumexp(logits).
inline std::vector<double> log_softmax_row(const std::vector<double>& logits) {
  const double lse = log_sum_exp(logits);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

// ---------------------------------------------------------------------------
// Task = reward table + frozen reference policy over the same shape
// ---------------------------------------------------------------------------

struct Task {
  RewardTable rewards;
  TabularPolicy piref;

  std::size_t n_prompts() const { return rewards.n_prompts(); }
  std::size_t n_responses(PromptId x) const { return rewards.n_responses(x); }
};

struct ValidationReport {
  std::vector<std::string> violations;
  bool ok() const { return violations.empty(); }
};

/// Checks that a probability row is normalized within 1e-12 and finite;
/// appends named violations for prompt `x`.
inline void check_probability_row(const std::vector<double>& probs, PromptId x,
                                  ValidationReport& report) {
  double sum = 0.0;
  for (std::size_t j = 0; j < probs.size(); ++j) {
    if (!std::isfinite(probs[j])) {
      report.violations.push_back("non-finite probability at prompt " +
                                  std::to_string(x.index) + ", response " +
                                  std::to_string(j));
      return;
    }
    sum += probs[j];
  }
  if (std::abs(sum - 1.0) > 1e-12) {
    report.violations.push_back(
        "probability row for prompt " + std::to_string(x.index) +
        " sums to " + std::to_string(sum) + ", expected 1 within 1e-12");
  }
}

/// Dimensional and finiteness audit of a task. A well-formed task yields an
/// empty violation list; every violation names the offending index.
inline ValidationReport validate_task(const Task& task) {
  ValidationReport report;
  const auto& r = task.rewards.values;
  const auto& l = task.piref.logits;

  if (r.empty()) report.violations.push_back("task has no prompts");
  if (r.size() != l.size()) {
    report.violations.push_back(
        "reward table has " + std::to_string(r.size()) +
        " prompts but piref has " + std::to_string(l.size()));
    return report;
  }
  for (std::size_t x = 0; x < r.size(); ++x) {
    if (r[x].empty()) {
      report.violations.push_back("empty response set for prompt " +
                                  std::to_string(x));
      continue;
    }
    if (r[x].size() != l[x].size()) {
      report.violations.push_back(
          "prompt " + std::to_string(x) + ": reward row has " +
          std::to_string(r[x].size()) + " responses but piref row has " +
          std::to_string(l[x].size()));
      continue;
    }
    for (std::size_t y = 0; y < r[x].size(); ++y) {
      if (!std::isfinite(r[x][y]))
        report.violations.push_back("non-finite reward at prompt " +
                                    std::to_string(x) + ", response " +
                                    std::to_string(y));
      if (!std::isfinite(l[x][y]))
        report.violations.push_back("non-finite piref logit at prompt " +
                                    std::to_string(x) + ", response " +
                                    std::to_string(y));
    }
    // Softmax of a finite row is normalized by construction; this guards the
    // log-space plumbing itself.
    const auto lp = log_softmax_row(l[x]);
    std::vector<double> probs(lp.size());
    for (std::size_t y = 0; y < lp.size(); ++y) probs[y] = std::exp(lp[y]);
    check_probability_row(probs, PromptId{x}, report);
  }
  return report;
}

}  // namespace preflab
