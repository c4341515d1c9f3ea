#include <catch2/catch_amalgamated.hpp>

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <unistd.h>

#include "preflab/experiments.hpp"
#include "test_support.hpp"

using namespace preflab;
namespace fs = std::filesystem;

namespace {

ExperimentPoint point(double kl, double reward, const std::string& method = "m") {
  ExperimentPoint p;
  p.method = method;
  p.kl = kl;
  p.reward = reward;
  return p;
}

SweepSpec tiny_sweep_spec() {
  SweepSpec spec;
  spec.methods = {LossSpec{LossKind::Dpo}, LossSpec{LossKind::Odpo}};
  spec.betas = {0.2, 0.5};
  spec.alphas = {1.0};
  spec.seeds = {1, 2};
  spec.dataset_sizes = {20};
  spec.task.n_prompts = 6;
  spec.task.responses_per_prompt = 3;
  spec.task.reward_style = RewardStyle::ClassifierLike;
  spec.task.seed = 11;
  spec.train.max_steps = 150;
  return spec;
}

std::string temp_file(const char* name) {
  static int counter = 0;
  auto dir = fs::temp_directory_path() /
             ("preflab_exp_" + std::to_string(::getpid()));
  fs::create_directories(dir);
  return (dir / (std::to_string(counter++) + "_" + name)).string();
}

}  // namespace

TEST_CASE("pareto_front worked example") {
  std::vector<ExperimentPoint> pts = {point(0.3, 0.7), point(0.5, 0.8),
                                      point(0.4, 0.6)};
  auto front = pareto_front(pts);
  REQUIRE(front == std::vector<std::size_t>{0, 1});
}

TEST_CASE("pareto_front degenerate cases") {
  REQUIRE(pareto_front({point(1.0, 1.0)}) == std::vector<std::size_t>{0});
  // Exact duplicates all stay on the front.
  auto front = pareto_front({point(0.2, 0.6), point(0.2, 0.6)});
  REQUIRE(front == std::vector<std::size_t>{0, 1});
  REQUIRE_THROWS_AS(pareto_front({}), std::invalid_argument);
}

TEST_CASE("pareto_front ties on one coordinate") {
  // Same kl, lower reward: dominated. Same reward, lower kl: dominates.
  auto front = pareto_front({point(0.2, 0.6), point(0.2, 0.5)});
  REQUIRE(front == std::vector<std::size_t>{0});
  auto front2 = pareto_front({point(0.2, 0.6), point(0.3, 0.6)});
  REQUIRE(front2 == std::vector<std::size_t>{0});
}

TEST_CASE("pareto_front matches the brute-force oracle on random sets") {
  Rng rng = make_rng(41);
  for (int trial = 0; trial < 1000; ++trial) {
    const std::size_t n = 1 + static_cast<std::size_t>(uniform_unit(rng) * 200);
    std::vector<ExperimentPoint> pts;
    pts.reserve(n);
    for (std::size_t i = 0; i < n; ++i) {
      // Quantized coordinates provoke ties and duplicates.
      const double kl = std::floor(uniform_unit(rng) * 16.0) / 16.0;
      const double reward = std::floor(uniform_unit(rng) * 16.0) / 16.0;
      pts.push_back(point(kl, reward));
    }
    auto fast = pareto_front(pts);
    auto brute = preflab::testing::brute_force_front(pts);
    REQUIRE(fast == brute);
  }
}

TEST_CASE("front membership is invariant to point order") {
  Rng rng = make_rng(43);
  std::vector<ExperimentPoint> pts;
  for (int i = 0; i < 60; ++i)
    pts.push_back(point(std::floor(uniform_unit(rng) * 8.0) / 8.0,
                        std::floor(uniform_unit(rng) * 8.0) / 8.0,
                        i % 2 ? "a" : "b"));

  auto front_set = [&](const std::vector<ExperimentPoint>& v) {
    std::vector<std::pair<double, double>> coords;
    for (auto idx : pareto_front(v)) coords.emplace_back(v[idx].kl, v[idx].reward);
    std::sort(coords.begin(), coords.end());
    return coords;
  };

  auto base = front_set(pts);
  for (int shuffle = 0; shuffle < 20; ++shuffle) {
    // Fisher-Yates with the portable generator.
    for (std::size_t i = pts.size(); i > 1; --i) {
      const std::size_t j = static_cast<std::size_t>(uniform_unit(rng) * i);
      std::swap(pts[i - 1], pts[j]);
    }
    REQUIRE(front_set(pts) == base);
  }
}

TEST_CASE("pareto_share counts methods and lists empty methods explicitly") {
  std::vector<ExperimentPoint> pts = {point(0.1, 0.9, "odpo"),
                                      point(0.2, 0.95, "odpo"),
                                      point(0.05, 0.7, "dpo"),
                                      point(0.5, 0.3, "slic")};
  auto report = pareto_share(pts);
  REQUIRE(report.front.size() == 3);
  double total = 0.0;
  bool saw_slic = false;
  for (const auto& [method, share] : report.share_by_method) {
    total += share;
    if (method == "slic") {
      saw_slic = true;
      REQUIRE(share == 0.0);
    }
    if (method == "odpo") REQUIRE(share == Catch::Approx(200.0 / 3.0));
  }
  REQUIRE(saw_slic);
  REQUIRE(total == Catch::Approx(100.0));
}

TEST_CASE("pareto_share on a single-method set gives 100 percent") {
  auto report = pareto_share({point(0.1, 0.2, "dpo"), point(0.2, 0.1, "dpo")});
  REQUIRE(report.share_by_method.size() == 1);
  REQUIRE(report.share_by_method[0].second == 100.0);
}

TEST_CASE("run_sweep covers the Cartesian grid deterministically") {
  auto spec = tiny_sweep_spec();
  auto result = run_sweep(spec, 1);
  REQUIRE(result.failures.empty());
  REQUIRE(result.points.size() == 2 * 2 * 1 * 2 * 1);

  // Same spec, more workers: identical points in identical order.
  auto parallel = run_sweep(spec, 4);
  REQUIRE(parallel.points.size() == result.points.size());
  for (std::size_t i = 0; i < result.points.size(); ++i) {
    REQUIRE(parallel.points[i].method == result.points[i].method);
    REQUIRE(parallel.points[i].kl == result.points[i].kl);
    REQUIRE(parallel.points[i].reward == result.points[i].reward);
  }

  for (const auto& p : result.points) REQUIRE(p.kl >= 0.0);
}

TEST_CASE("recomputing a sweep point from a retrained policy matches") {
  auto spec = tiny_sweep_spec();
  spec.methods = {LossSpec{LossKind::Odpo}};
  spec.betas = {0.5};
  spec.seeds = {1};
  auto result = run_sweep(spec, 1);
  REQUIRE(result.points.size() == 1);

  const auto task = make_synthetic_task(spec.task);
  auto dataset = build_preference_dataset(task, 1, 20, spec.samples_per_prompt,
                                          spec.scaling, 1.0);
  TrainConfig config = spec.train;
  config.loss = spec.methods[0];
  config.loss.beta = 0.5;
  config.loss.alpha = 1.0;
  config.seed = 1;
  auto trained = train(config, dataset, task.piref, &task.rewards);
  auto ev = evaluate_policy(trained.policy, task.piref, task.rewards);
  REQUIRE(std::abs(ev.kl_to_ref - result.points[0].kl) < 1e-12);
  REQUIRE(std::abs(ev.expected_reward - result.points[0].reward) < 1e-12);
}

TEST_CASE("ablate_scaling shares fingerprints across the three reports") {
  auto spec = tiny_sweep_spec();
  spec.betas = {0.3, 0.6};
  auto ablation = ablate_scaling(spec, 2);
  REQUIRE(ablation.fingerprints[0] == ablation.fingerprints[1]);
  REQUIRE(ablation.fingerprints[1] == ablation.fingerprints[2]);
  for (const auto& report : ablation.reports) {
    REQUIRE_FALSE(report.front.empty());
    // Delegated front is non-dominated per the oracle.
    auto brute = preflab::testing::brute_force_front(report.points);
    REQUIRE(report.front == brute);
  }
}

TEST_CASE("ablate_alpha covers exactly the published alpha grid") {
  auto spec = tiny_sweep_spec();
  spec.betas = {0.5};
  spec.seeds = {1};
  auto result = ablate_alpha(spec, 2);
  REQUIRE(result.failures.empty());
  std::vector<double> alphas;
  for (const auto& p : result.points) alphas.push_back(p.alpha);
  std::sort(alphas.begin(), alphas.end());
  alphas.erase(std::unique(alphas.begin(), alphas.end()), alphas.end());
  REQUIRE(alphas == alpha_ablation_grid());
}

TEST_CASE("beta grids match the published sweeps") {
  REQUIRE(sentiment_beta_grid().size() == 14);
  REQUIRE(toxicity_beta_grid() ==
          std::vector<double>{0.05, 0.1, 0.2, 0.3, 0.4, 0.5});
  REQUIRE(alpha_ablation_grid() ==
          std::vector<double>{0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0});
}

TEST_CASE("report CSV round-trips points exactly and marks the front") {
  auto spec = tiny_sweep_spec();
  auto result = run_sweep(spec, 2);
  auto report = pareto_share(result.points);

  const auto path = temp_file("report.csv");
  write_report(report, path);

  std::vector<bool> on_front;
  auto loaded = read_report(path, &on_front);
  REQUIRE(loaded.size() == report.points.size());

  // Points were written coordinate-sorted; they round-trip exactly.
  for (std::size_t i = 0; i < loaded.size(); ++i) {
    REQUIRE(loaded[i].method == report.points[i].method);
    REQUIRE(loaded[i].beta == report.points[i].beta);
    REQUIRE(loaded[i].alpha == report.points[i].alpha);
    REQUIRE(loaded[i].seed == report.points[i].seed);
    REQUIRE(loaded[i].dataset_size == report.points[i].dataset_size);
    REQUIRE(loaded[i].kl == report.points[i].kl);
    REQUIRE(loaded[i].reward == report.points[i].reward);
  }

  // on_front column agrees with a recomputation from the loaded points.
  auto recomputed = pareto_front(loaded);
  std::vector<bool> expect(loaded.size(), false);
  for (auto idx : recomputed) expect[idx] = true;
  REQUIRE(on_front == expect);

  // Byte-identical rewrite.
  auto reread = read_report(path);
  const auto path2 = temp_file("report2.csv");
  write_report(reread, path2);
  std::ifstream a(path, std::ios::binary), b(path2, std::ios::binary);
  std::string sa{std::istreambuf_iterator<char>(a), {}};
  std::string sb{std::istreambuf_iterator<char>(b), {}};
  REQUIRE(sa == sb);
}

TEST_CASE("manifest captures the sweep spec") {
  auto spec = tiny_sweep_spec();
  auto result = run_sweep(spec, 1);
  auto report = pareto_share(result.points);
  const auto path = temp_file("manifest.txt");
  write_manifest(spec, result, report.share_by_method, path);

  auto kv = parse_kv_file(path);
  REQUIRE(kv.at("version") == kVersion);
  REQUIRE(kv.at("task.n_prompts") == "6");
  REQUIRE(kv.at("task.reward_style") == "classifier-like");
  REQUIRE(kv.at("cells.failed") == "0");
  REQUIRE(kv.count("dataset.fingerprint.seed1.size20") == 1);
  REQUIRE(kv.count("share.dpo") == 1);
  REQUIRE(kv.count("share.odpo") == 1);
}
