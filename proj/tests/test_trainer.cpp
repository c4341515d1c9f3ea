#include <catch2/catch_amalgamated.hpp>

#include <cmath>

#include "preflab/datagen.hpp"
#include "preflab/trainer.hpp"

using namespace preflab;

namespace {

Task two_response_task() {
  Task t;
  t.rewards.values = {{1.0, 0.0}};
  t.piref.logits = {{0.0, 0.0}};
  return t;
}

std::vector<PreferenceExample> single_pair() {
  std::vector<PreferenceExample> batch(1);
  batch[0].prompt = PromptId{0};
  batch[0].preferred = ResponseId{0};
  batch[0].dispreferred = ResponseId{1};
  return batch;
}

}  // namespace

TEST_CASE("zero-step training returns piref") {
  auto task = two_response_task();
  TrainConfig config;
  config.loss.kind = LossKind::Dpo;
  config.loss.beta = 0.5;
  config.learning_rate = 0.0;
  config.max_steps = 1;
  auto result = train(config, single_pair(), task.piref);
  REQUIRE(result.policy.logits == task.piref.logits);
}

TEST_CASE("DPO training moves probability toward the preferred response") {
  auto task = two_response_task();
  TrainConfig config;
  config.loss.kind = LossKind::Dpo;
  config.loss.beta = 0.5;
  config.max_steps = 2000;
  auto result = train(config, single_pair(), task.piref, &task.rewards);

  const double p_w = std::exp(log_prob(result.policy, PromptId{0}, ResponseId{0}));
  const double p_l = std::exp(log_prob(result.policy, PromptId{0}, ResponseId{1}));
  const double ref = 0.5;
  REQUIRE(p_w > ref);
  REQUIRE(p_l < ref);
  REQUIRE(task.piref.logits == std::vector<std::vector<double>>{{0.0, 0.0}});
}

TEST_CASE("loss is non-increasing under a small learning rate") {
  Rng rng = make_rng(31);
  for (int trial = 0; trial < 5; ++trial) {
    SyntheticTaskSpec spec;
    spec.n_prompts = 6;
    spec.responses_per_prompt = 4;
    spec.seed = 100 + trial;
    auto task = make_synthetic_task(spec);
    auto dataset = build_preference_dataset(task, 7 + trial, 30, 2,
                                            OffsetScaling::LogOfDifference, 1.0);
    TrainConfig config;
    config.loss.kind = LossKind::Odpo;
    config.loss.beta = 0.3 + 0.4 * uniform_unit(rng);
    config.learning_rate = 1e-3;
    config.max_steps = 200;
    config.log_every = 1;
    config.grad_norm_tol = 0.0;
    auto result = train(config, dataset, task.piref);
    for (std::size_t i = 1; i < result.trace.entries.size(); ++i)
      REQUIRE(result.trace.entries[i].loss <=
              result.trace.entries[i - 1].loss + 1e-15);
  }
}

TEST_CASE("training is bit-reproducible and leaves piref untouched") {
  SyntheticTaskSpec spec;
  spec.n_prompts = 8;
  spec.responses_per_prompt = 3;
  spec.seed = 9;
  auto task = make_synthetic_task(spec);
  const auto piref_before = task.piref.logits;
  auto dataset = build_preference_dataset(task, 21, 40, 2,
                                          OffsetScaling::LogOfDifference, 1.0);

  TrainConfig config;
  config.loss.kind = LossKind::Odpo;
  config.loss.beta = 0.5;
  config.max_steps = 500;

  auto a = train(config, dataset, task.piref, &task.rewards);
  auto b = train(config, dataset, task.piref, &task.rewards);
  REQUIRE(a.policy.logits == b.policy.logits);  // bit-identical
  REQUIRE(task.piref.logits == piref_before);

  REQUIRE(a.trace.entries.size() == b.trace.entries.size());
  for (std::size_t i = 1; i < a.trace.entries.size(); ++i)
    REQUIRE(a.trace.entries[i].step > a.trace.entries[i - 1].step);
}

TEST_CASE("training reports divergence with the failing step") {
  auto task = two_response_task();
  TrainConfig config;
  config.loss.kind = LossKind::Dpo;
  config.loss.beta = 5.0;
  config.learning_rate = 1e18;  // deliberately unstable
  config.max_steps = 50;
  try {
    train(config, single_pair(), task.piref);
    // Overshoot this extreme must blow up the logits.
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    REQUIRE(e.step() >= 0);
  }
}

TEST_CASE("trace stops early once the gradient norm is below tolerance") {
  auto task = two_response_task();
  TrainConfig config;
  config.loss.kind = LossKind::Slic;
  config.loss.slic_margin = 0.1;
  config.learning_rate = 0.5;
  config.max_steps = 10000;
  config.grad_norm_tol = 1e-9;
  auto result = train(config, single_pair(), task.piref);
  // Hinge satisfied: gradient exactly zero, so the run must stop well short.
  REQUIRE(result.trace.entries.back().step < 10000);
  REQUIRE(result.trace.entries.back().grad_norm <= 1e-9);
}

TEST_CASE("population DPO recovers the true reward gap on one pair") {
  auto task = two_response_task();
  TrainConfig config;
  config.loss.kind = LossKind::Dpo;
  config.loss.beta = 1.0;
  config.learning_rate = 0.5;
  config.max_steps = 20000;
  config.grad_norm_tol = 1e-10;
  auto policy = train_on_population(config, task.rewards, task.piref);
  const double gap =
      implied_reward(policy, task.piref, 1.0, PromptId{0}, ResponseId{0}) -
      implied_reward(policy, task.piref, 1.0, PromptId{0}, ResponseId{1});
  REQUIRE(std::abs(gap - 1.0) < 1e-2);
}

TEST_CASE("population DPO with constant rewards stays at piref") {
  Task task;
  task.rewards.values = {{0.4, 0.4, 0.4}};
  task.piref.logits = {{0.3, -0.1, 0.2}};
  TrainConfig config;
  config.loss.kind = LossKind::Dpo;
  config.loss.beta = 0.5;
  config.learning_rate = 1.0;
  config.max_steps = 1000;
  auto policy = train_on_population(config, task.rewards, task.piref);
  double tv = 0.0;
  for (std::size_t y = 0; y < 3; ++y)
    tv += std::abs(std::exp(log_prob(policy, PromptId{0}, ResponseId{y})) -
                   std::exp(log_prob(task.piref, PromptId{0}, ResponseId{y})));
  REQUIRE(tv / 2.0 < 1e-6);
}

TEST_CASE("population DPO matches all pairwise gaps on a 3-response task") {
  Rng rng = make_rng(37);
  Task task;
  task.rewards.values.push_back({});
  task.piref.logits.push_back({});
  for (int y = 0; y < 3; ++y) {
    task.rewards.values[0].push_back(uniform_unit(rng));
    task.piref.logits[0].push_back(normal_unit(rng));
  }
  const double beta = 0.5;
  TrainConfig config;
  config.loss.kind = LossKind::Dpo;
  config.loss.beta = beta;
  config.learning_rate = 0.5 / (beta * beta);
  config.max_steps = 50000;
  config.grad_norm_tol = 1e-11;
  auto policy = train_on_population(config, task.rewards, task.piref);
  for (std::size_t a = 0; a < 3; ++a)
    for (std::size_t b = 0; b < 3; ++b) {
      const double got =
          implied_reward(policy, task.piref, beta, PromptId{0}, ResponseId{a}) -
          implied_reward(policy, task.piref, beta, PromptId{0}, ResponseId{b});
      REQUIRE(std::abs(got - (task.rewards.values[0][a] -
                              task.rewards.values[0][b])) < 1e-2);
    }
}

TEST_CASE("train_on_population rejects non-DPO losses") {
  auto task = two_response_task();
  TrainConfig config;
  config.loss.kind = LossKind::Slic;
  REQUIRE_THROWS_AS(train_on_population(config, task.rewards, task.piref),
                    std::invalid_argument);
}

TEST_CASE("ODPO widens implied gaps relative to DPO on positive offsets") {
  SyntheticTaskSpec spec;
  spec.n_prompts = 10;
  spec.responses_per_prompt = 4;
  spec.reward_style = RewardStyle::ClassifierLike;
  for (std::uint64_t seed = 0; seed < 3; ++seed) {
    spec.seed = 50 + seed;
    auto task = make_synthetic_task(spec);
    // Identity scaling keeps every offset strictly positive.
    auto dataset =
        build_preference_dataset(task, seed, 10, 2, OffsetScaling::Identity, 1.0);

    TrainConfig config;
    config.loss.beta = 0.5;
    config.max_steps = 2000;
    config.loss.kind = LossKind::Dpo;
    auto dpo = train(config, dataset, task.piref);
    config.loss.kind = LossKind::Odpo;
    auto odpo = train(config, dataset, task.piref);

    for (const auto& ex : dataset) {
      if (!(ex.offset > 0.0)) continue;
      auto gap = [&](const TabularPolicy& p) {
        return implied_reward(p, task.piref, 0.5, ex.prompt, ex.preferred) -
               implied_reward(p, task.piref, 0.5, ex.prompt, ex.dispreferred);
      };
      REQUIRE(gap(odpo.policy) >= gap(dpo.policy) - 1e-6);
    }
  }
}
