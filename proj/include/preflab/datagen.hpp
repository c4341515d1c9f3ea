#pragma once

#include <cstdint>
#include <cstring>
#include <limits>
#include <stdexcept>
#include <string>
#include <vector>

#include "preflab/core.hpp"
#include "preflab/losses.hpp"
#include "preflab/policy.hpp"
#include "preflab/rng.hpp"

namespace preflab {

// ---------------------------------------------------------------------------
// Synthetic tasks
// ---------------------------------------------------------------------------

/// Reward constructions for synthetic tasks.
///  - UniformIid: r ~ U(0,1) per (prompt, response).
///  - TwoCluster: each response is latently "low" (r in (0, 0.4)) or "high"
///    (r in (0.6, 1.0)), mimicking negative/positive sentiment.
///  - ClassifierLike: p ~ U(0,1) and a latent binary label per response;
///    r = 1 - p for negative, r = 1 + p for positive, so r lies in (0, 2).
enum class RewardStyle { UniformIid, TwoCluster, ClassifierLike };

struct SyntheticTaskSpec {
  std::int64_t n_prompts = 8;
  std::int64_t responses_per_prompt = 4;  // >= 2
  RewardStyle reward_style = RewardStyle::ClassifierLike;
  std::uint64_t seed = 0;
};

inline const char* reward_style_name(RewardStyle s) {
  switch (s) {
    case RewardStyle::UniformIid: return "uniform-iid";
    case RewardStyle::TwoCluster: return "two-cluster";
    case RewardStyle::ClassifierLike: return "classifier-like";
  }
  return "unknown";
}

/// Builds rewards per the configured style and a reference policy with
/// standard-normal logits. Deterministic per spec.seed.
inline Task make_synthetic_task(const SyntheticTaskSpec& spec) {
  if (spec.n_prompts < 1)
    throw std::invalid_argument("make_synthetic_task: n_prompts must be >= 1");
  if (spec.responses_per_prompt < 2)
    throw std::invalid_argument(
        "make_synthetic_task: responses_per_prompt must be >= 2");

  const auto n = static_cast<std::size_t>(spec.n_prompts);
  const auto k = static_cast<std::size_t>(spec.responses_per_prompt);

  Task task;
  task.rewards.values.assign(n, std::vector<double>(k, 0.0));
  task.piref.logits.assign(n, std::vector<double>(k, 0.0));

  Rng reward_rng = make_rng(derive_seed(spec.seed, 0));
  switch (spec.reward_style) {
    case RewardStyle::UniformIid:
      for (auto& row : task.rewards.values)
        for (auto& r : row) r = uniform_open(reward_rng);
      break;
    case RewardStyle::TwoCluster: {
      // Reject all-one-cluster label draws so both cluster means exist.
      std::vector<char> labels(n * k, 0);
      for (;;) {
        bool any_high = false, any_low = false;
        for (auto& lab : labels) {
          lab = uniform_unit(reward_rng) < 0.5 ? 1 : 0;
          if (lab) any_high = true; else any_low = true;
        }
        if (any_high && any_low) break;
      }
      std::size_t i = 0;
      for (auto& row : task.rewards.values)
        for (auto& r : row) {
          const double u = uniform_open(reward_rng);
          r = labels[i++] ? 0.6 + 0.4 * u : 0.4 * u;
        }
      break;
    }
    case RewardStyle::ClassifierLike:
      for (auto& row : task.rewards.values)
        for (auto& r : row) {
          const double p = uniform_open(reward_rng);
          const bool positive = uniform_unit(reward_rng) < 0.5;
          r = positive ? 1.0 + p : 1.0 - p;
        }
      break;
  }

  Rng logit_rng = make_rng(derive_seed(spec.seed, 1));
  for (auto& row : task.piref.logits)
    for (auto& l : row) l = normal_unit(logit_rng);
  return task;
}

// ---------------------------------------------------------------------------
// Preference bootstrapping from pointwise rewards
// ---------------------------------------------------------------------------

struct BootstrapResult {
  std::vector<PreferenceExample> examples;
  std::int64_t dropped_same_response = 0;
  std::int64_t dropped_equal_reward = 0;
};

/// Samples m responses per prompt from piref and emits one ordered pair per
/// unordered sampled pair with unequal rewards, winner first. Scores are set
/// to the rewards; offsets are left at zero for attach_offsets. Per-prompt
/// derived seeds keep generation order-independent across prompts.
inline BootstrapResult bootstrap_preferences(const TabularPolicy& piref,
                                             const RewardTable& rewards,
                                             int m, std::uint64_t seed) {
  if (m < 2) throw std::invalid_argument("bootstrap_preferences: m must be >= 2");
  if (!same_shape(piref.logits, rewards.values))
    throw std::invalid_argument(
        "bootstrap_preferences: piref and rewards shapes differ");

  BootstrapResult out;
  for (std::size_t x = 0; x < piref.n_prompts(); ++x) {
    Rng rng = make_rng(derive_seed(seed, x));
    std::vector<ResponseId> draws;
    draws.reserve(static_cast<std::size_t>(m));
    for (int i = 0; i < m; ++i)
      draws.push_back(sample_response(piref, PromptId{x}, rng));
    for (std::size_t i = 0; i < draws.size(); ++i) {
      for (std::size_t j = i + 1; j < draws.size(); ++j) {
        if (draws[i] == draws[j]) {
          ++out.dropped_same_response;
          continue;
        }
        const double ri = rewards.values[x][draws[i].index];
        const double rj = rewards.values[x][draws[j].index];
        if (ri == rj) {
          ++out.dropped_equal_reward;
          continue;
        }
        PreferenceExample ex;
        ex.prompt = PromptId{x};
        ex.preferred = ri > rj ? draws[i] : draws[j];
        ex.dispreferred = ri > rj ? draws[j] : draws[i];
        ex.score_w = std::max(ri, rj);
        ex.score_l = std::min(ri, rj);
        out.examples.push_back(ex);
      }
    }
  }
  return out;
}

/// Fills each pair's offset from its scores; order preserved, scores required.
inline void attach_offsets(std::vector<PreferenceExample>& pairs,
                           OffsetScaling scaling, double alpha) {
  for (auto& ex : pairs) {
    if (!ex.score_w || !ex.score_l)
      throw std::invalid_argument("attach_offsets: pair is missing scores");
    ex.offset = compute_offset(*ex.score_w, *ex.score_l, scaling, alpha);
  }
}

inline std::int64_t count_negative_offsets(
    const std::vector<PreferenceExample>& pairs) {
  std::int64_t n = 0;
  for (const auto& ex : pairs)
    if (ex.offset < 0.0) ++n;
  return n;
}

// ---------------------------------------------------------------------------
// Likert-scored pairs
// ---------------------------------------------------------------------------

/// One human-annotated record on the 7-point scale.
struct LikertRecord {
  PromptId prompt;
  ResponseId response_a;
  ResponseId response_b;
  int score_a = 1;
  int score_b = 1;
};

struct LikertResult {
  std::vector<PreferenceExample> examples;
  std::int64_t dropped_ties = 0;
};

/// Turns Likert records into preference pairs ordered by score, with
/// offset = ln(score_w - score_l). Equal-score records are dropped and
/// counted. Scores outside [1, 7] are rejected.
inline LikertResult likert_pairs(const std::vector<LikertRecord>& records) {
  LikertResult out;
  for (std::size_t i = 0; i < records.size(); ++i) {
    const auto& rec = records[i];
    if (rec.score_a < 1 || rec.score_a > 7 || rec.score_b < 1 || rec.score_b > 7)
      throw ValidationError("likert record " + std::to_string(i) +
                            ": scores must lie in [1, 7]");
    if (rec.score_a == rec.score_b) {
      ++out.dropped_ties;
      continue;
    }
    const bool a_wins = rec.score_a > rec.score_b;
    PreferenceExample ex;
    ex.prompt = rec.prompt;
    ex.preferred = a_wins ? rec.response_a : rec.response_b;
    ex.dispreferred = a_wins ? rec.response_b : rec.response_a;
    ex.score_w = static_cast<double>(a_wins ? rec.score_a : rec.score_b);
    ex.score_l = static_cast<double>(a_wins ? rec.score_b : rec.score_a);
    ex.offset =
        compute_offset(*ex.score_w, *ex.score_l, OffsetScaling::LogOfDifference,
                       1.0);
    out.examples.push_back(ex);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Dataset assembly for sweeps
// ---------------------------------------------------------------------------

/// Bootstraps rounds of preference pairs (round r uses seed stream r) until
/// target_size pairs exist, truncates, then attaches offsets. The emitted
/// pair list for a given (task, seed, target_size) does not depend on the
/// offset parameters, which is what makes scaling ablations controlled.
inline std::vector<PreferenceExample> build_preference_dataset(
    const Task& task, std::uint64_t seed, std::size_t target_size, int m,
    OffsetScaling scaling, double alpha) {
  if (target_size == 0)
    throw std::invalid_argument("build_preference_dataset: empty target");
  std::vector<PreferenceExample> pairs;
  int consecutive_empty = 0;
  for (std::uint64_t round = 0; pairs.size() < target_size; ++round) {
    auto boot = bootstrap_preferences(task.piref, task.rewards, m,
                                      derive_seed(seed, round));
    if (boot.examples.empty()) {
      if (++consecutive_empty >= 8)
        throw ValidationError(
            "build_preference_dataset: task yields no preference pairs "
            "(constant rewards?)");
      continue;
    }
    consecutive_empty = 0;
    pairs.insert(pairs.end(), boot.examples.begin(), boot.examples.end());
  }
  pairs.resize(target_size);
  attach_offsets(pairs, scaling, alpha);
  return pairs;
}

/// FNV-1a over the pair structure (prompt, responses, score bits); offsets
/// are deliberately excluded so datasets that differ only in offset
/// parameters fingerprint identically.
inline std::uint64_t dataset_fingerprint(
    const std::vector<PreferenceExample>& pairs) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  auto feed = [&h](std::uint64_t v) {
    for (int i = 0; i < 8; ++i) {
      h ^= (v >> (8 * i)) & 0xffu;
      h *= 0x100000001b3ull;
    }
  };
  auto feed_double = [&](double d) {
    std::uint64_t bits;
    static_assert(sizeof bits == sizeof d);
    std::memcpy(&bits, &d, sizeof bits);
    feed(bits);
  };
  for (const auto& ex : pairs) {
    feed(ex.prompt.index);
    feed(ex.preferred.index);
    feed(ex.dispreferred.index);
    feed_double(ex.score_w ? *ex.score_w : std::numeric_limits<double>::quiet_NaN());
    feed_double(ex.score_l ? *ex.score_l : std::numeric_limits<double>::quiet_NaN());
  }
  return h;
}

}  // namespace preflab
