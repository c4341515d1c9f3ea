#pragma once

#include <algorithm>
#include <array>
#include <atomic>
#include <cstdint>
#include <fstream>
#include <map>
#include <optional>
#include <string>
#include <thread>
#include <tuple>
#include <vector>

#include "preflab/core.hpp"
#include "preflab/datagen.hpp"
#include "preflab/io.hpp"
#include "preflab/policy.hpp"
#include "preflab/trainer.hpp"

namespace preflab {

// ---------------------------------------------------------------------------
// Paper-protocol grids
// ---------------------------------------------------------------------------

/// Sentiment-style sweep: {0.1, ..., 1.0} plus {2, 3, 4, 5}; 14 values.
inline std::vector<double> sentiment_beta_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0};
}

/// Toxicity-style sweep: 6 values, beta <= 0.5.
inline std::vector<double> toxicity_beta_grid() {
  return {0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
}

/// Scaling-function ablation sweep: {0.1, ..., 0.9} plus {1, 2, 3, 4, 5}.
inline std::vector<double> scaling_ablation_beta_grid() {
  return {0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9, 1.0, 2.0, 3.0, 4.0, 5.0};
}

/// Offset-scale ablation grid for alpha.
inline std::vector<double> alpha_ablation_grid() {
  return {0.0, 0.1, 0.2, 0.3, 0.5, 0.8, 1.0};
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  std::vector<LossSpec> methods;  // templates; beta/alpha come from the grids
  std::vector<double> betas;
  std::vector<double> alphas;
  std::vector<std::int64_t> seeds;         // dataset bootstrap seeds
  std::vector<std::int64_t> dataset_sizes;  // preference pairs per run
  SyntheticTaskSpec task;
  OffsetScaling scaling = OffsetScaling::LogOfDifference;
  int samples_per_prompt = 2;  // M responses drawn per prompt and round
  TrainConfig train;           // optimizer knobs; loss filled per cell
};

struct SweepFailure {
  std::string method;
  double beta = 0.0;
  double alpha = 0.0;
  std::int64_t seed = 0;
  std::int64_t dataset_size = 0;
  std::string message;
};

struct SweepResult {
  std::vector<ExperimentPoint> points;    // coordinate-sorted
  std::vector<SweepFailure> failures;     // divergent cells, coordinates kept
  std::map<std::string, std::uint64_t> dataset_fingerprints;  // per (seed, size)
  std::map<std::string, std::int64_t> negative_offset_counts;
};

namespace detail {

struct SweepCell {
  LossSpec loss;
  std::int64_t seed = 0;
  std::int64_t dataset_size = 0;
};

inline bool point_coord_less(const ExperimentPoint& a, const ExperimentPoint& b) {
  return std::tie(a.method, a.beta, a.alpha, a.seed, a.dataset_size, a.kl,
                  a.reward) < std::tie(b.method, b.beta, b.alpha, b.seed,
                                       b.dataset_size, b.kl, b.reward);
}

}  // namespace detail

/// Runs one training cell per (method, beta, alpha, seed, dataset_size)
/// element. Cells are independent and deterministic, so the result is
/// bit-identical for any worker count; points come back coordinate-sorted.
inline SweepResult run_sweep(const SweepSpec& spec, int jobs = 1) {
  if (spec.methods.empty() || spec.betas.empty() || spec.alphas.empty() ||
      spec.seeds.empty() || spec.dataset_sizes.empty())
    throw std::invalid_argument("run_sweep: all sweep lists must be non-empty");
  if (jobs < 1) throw std::invalid_argument("run_sweep: jobs must be >= 1");

  const Task task = make_synthetic_task(spec.task);

  std::vector<detail::SweepCell> cells;
  for (const auto& method : spec.methods)
    for (double beta : spec.betas)
      for (double alpha : spec.alphas)
        for (std::int64_t seed : spec.seeds)
          for (std::int64_t size : spec.dataset_sizes) {
            detail::SweepCell c;
            c.loss = method;
            c.loss.beta = beta;
            c.loss.alpha = alpha;
            c.loss.scaling = spec.scaling;
            c.seed = seed;
            c.dataset_size = size;
            cells.push_back(c);
          }

  SweepResult result;
  std::vector<std::optional<ExperimentPoint>> points(cells.size());
  std::vector<std::optional<SweepFailure>> failures(cells.size());

  auto run_cell = [&](std::size_t i) {
    const auto& cell = cells[i];
    try {
      auto dataset = build_preference_dataset(
          task, static_cast<std::uint64_t>(cell.seed),
          static_cast<std::size_t>(cell.dataset_size), spec.samples_per_prompt,
          cell.loss.scaling, cell.loss.alpha);
      TrainConfig config = spec.train;
      config.loss = cell.loss;
      config.seed = cell.seed;
      auto trained = train(config, dataset, task.piref, &task.rewards);
      auto ev = evaluate_policy(trained.policy, task.piref, task.rewards);
      ExperimentPoint p;
      p.method = loss_kind_name(cell.loss.kind);
      p.beta = cell.loss.beta;
      p.alpha = cell.loss.alpha;
      p.seed = cell.seed;
      p.kl = ev.kl_to_ref;
      p.reward = ev.expected_reward;
      p.dataset_size = cell.dataset_size;
      points[i] = p;
    } catch (const std::exception& e) {
      SweepFailure f;
      f.method = loss_kind_name(cell.loss.kind);
      f.beta = cell.loss.beta;
      f.alpha = cell.loss.alpha;
      f.seed = cell.seed;
      f.dataset_size = cell.dataset_size;
      f.message = e.what();
      failures[i] = f;
    }
  };

  const int workers =
      std::min<std::size_t>(static_cast<std::size_t>(jobs), cells.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < cells.size(); ++i) run_cell(i);
  } else {
    std::atomic<std::size_t> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        for (;;) {
          const std::size_t i = next.fetch_add(1);
          if (i >= cells.size()) return;
          run_cell(i);
        }
      });
    for (auto& t : pool) t.join();
  }

  for (auto& p : points)
    if (p) result.points.push_back(std::move(*p));
  for (auto& f : failures)
    if (f) result.failures.push_back(std::move(*f));
  std::sort(result.points.begin(), result.points.end(),
            detail::point_coord_less);

  // Pair structure per (seed, size) is offset-independent by construction;
  // fingerprints let callers check the controlled-variable property. The
  // negative-offset count is taken at alpha = 1 so it reflects the sign
  // profile of the scaling function, not the alpha grid.
  for (std::int64_t seed : spec.seeds)
    for (std::int64_t size : spec.dataset_sizes) {
      auto dataset = build_preference_dataset(
          task, static_cast<std::uint64_t>(seed),
          static_cast<std::size_t>(size), spec.samples_per_prompt,
          spec.scaling, 1.0);
      const std::string key =
          "seed" + std::to_string(seed) + ".size" + std::to_string(size);
      result.dataset_fingerprints[key] = dataset_fingerprint(dataset);
      result.negative_offset_counts[key] = count_negative_offsets(dataset);
    }
  return result;
}

// ---------------------------------------------------------------------------
// Pareto front
// ---------------------------------------------------------------------------

/// Indices of non-dominated points under minimize-KL / maximize-reward.
/// A point loses only to another with kl <= and reward >= and one strict;
/// exact-duplicate coordinates all stay on the front.
inline std::vector<std::size_t> pareto_front(
    const std::vector<ExperimentPoint>& points) {
  if (points.empty())
    throw std::invalid_argument("pareto_front: need at least one point");
  std::vector<std::size_t> order(points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    if (points[a].kl != points[b].kl) return points[a].kl < points[b].kl;
    return points[a].reward > points[b].reward;
  });

  std::vector<std::size_t> front;
  double best_reward = -std::numeric_limits<double>::infinity();
  std::size_t i = 0;
  while (i < order.size()) {
    // One group = all points at this KL; only its reward maximizers can
    // survive, and only if they strictly beat every smaller-KL reward.
    std::size_t j = i;
    const double kl = points[order[i]].kl;
    const double group_best = points[order[i]].reward;
    while (j < order.size() && points[order[j]].kl == kl) ++j;
    if (group_best > best_reward) {
      for (std::size_t k = i; k < j; ++k)
        if (points[order[k]].reward == group_best) front.push_back(order[k]);
      best_reward = group_best;
    }
    i = j;
  }
  std::sort(front.begin(), front.end());
  return front;
}

struct ParetoReport {
  std::vector<ExperimentPoint> points;
  std::vector<std::size_t> front;  // indices into points
  std::vector<std::pair<std::string, double>> share_by_method;  // percent
};

/// Front membership percentages per method; methods with no front points
/// are listed explicitly at 0%.
inline ParetoReport pareto_share(std::vector<ExperimentPoint> points) {
  ParetoReport report;
  report.front = pareto_front(points);
  report.points = std::move(points);
  std::map<std::string, std::size_t> on_front;
  for (const auto& p : report.points) on_front.emplace(p.method, 0);
  for (std::size_t idx : report.front) ++on_front[report.points[idx].method];
  const double denom = static_cast<double>(report.front.size());
  for (const auto& [method, count] : on_front)
    report.share_by_method.emplace_back(
        method, 100.0 * static_cast<double>(count) / denom);
  return report;
}

// ---------------------------------------------------------------------------
// Ablations
// ---------------------------------------------------------------------------

struct ScalingAblation {
  std::array<OffsetScaling, 3> scalings = {OffsetScaling::LogOfDifference,
                                           OffsetScaling::DifferenceOfLogs,
                                           OffsetScaling::Identity};
  std::array<ParetoReport, 3> reports;
  std::array<std::map<std::string, std::uint64_t>, 3> fingerprints;
};

/// DPO-vs-ODPO comparison repeated under the three offset scalings on
/// identical datasets: the bootstrap seed stream is shared, only the offset
/// computation differs, and the per-(seed,size) fingerprints prove it.
inline ScalingAblation ablate_scaling(const SweepSpec& base, int jobs = 1) {
  ScalingAblation out;
  for (std::size_t s = 0; s < out.scalings.size(); ++s) {
    SweepSpec spec = base;
    spec.methods = {LossSpec{LossKind::Dpo}, LossSpec{LossKind::Odpo}};
    spec.alphas = {1.0};
    spec.scaling = out.scalings[s];
    auto result = run_sweep(spec, jobs);
    if (!result.failures.empty())
      throw DivergenceError(-1, "ablate_scaling: cell failed: " +
                                    result.failures.front().message);
    out.reports[s] = pareto_share(std::move(result.points));
    out.fingerprints[s] = std::move(result.dataset_fingerprints);
  }
  return out;
}

/// ODPO alpha sweep over the fixed ablation grid.
inline SweepResult ablate_alpha(const SweepSpec& base, int jobs = 1) {
  SweepSpec spec = base;
  spec.methods = {LossSpec{LossKind::Odpo}};
  spec.alphas = alpha_ablation_grid();
  return run_sweep(spec, jobs);
}

// ---------------------------------------------------------------------------
// Report CSV
// ---------------------------------------------------------------------------

inline void write_report(const ParetoReport& report, const std::string& path) {
  std::vector<char> on_front(report.points.size(), 0);
  for (std::size_t idx : report.front) on_front[idx] = 1;

  // Rows sorted by coordinates; order[] tracks the permutation.
  std::vector<std::size_t> order(report.points.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return detail::point_coord_less(report.points[a], report.points[b]);
  });

  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "method,beta,alpha,seed,dataset_size,kl,reward,on_front\n";
  for (std::size_t i : order) {
    const auto& p = report.points[i];
    out << p.method << ',' << format_double(p.beta) << ','
        << format_double(p.alpha) << ',' << p.seed << ',' << p.dataset_size
        << ',' << format_double(p.kl) << ',' << format_double(p.reward) << ','
        << int(on_front[i]) << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

inline void write_report(const std::vector<ExperimentPoint>& points,
                         const std::string& path) {
  write_report(pareto_share(points), path);
}

/// Reads a report CSV back; on_front (when requested) mirrors the file.
inline std::vector<ExperimentPoint> read_report(
    const std::string& path, std::vector<bool>* on_front = nullptr) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open report file: " + path);
  std::string line;
  if (!std::getline(in, line))
    throw ValidationError("report file " + path + ": missing header");
  if (line != "method,beta,alpha,seed,dataset_size,kl,reward,on_front")
    throw ValidationError("report file " + path + ": unexpected header");
  std::vector<ExperimentPoint> points;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    auto fields = split_list(line);
    if (fields.size() != 8)
      throw ValidationError("report file " + path + " line " +
                            std::to_string(lineno) + ": expected 8 fields");
    const std::string where = path + " line " + std::to_string(lineno);
    ExperimentPoint p;
    p.method = fields[0];
    p.beta = parse_double(fields[1], where);
    p.alpha = parse_double(fields[2], where);
    p.seed = parse_int(fields[3], where);
    p.dataset_size = parse_int(fields[4], where);
    p.kl = parse_double(fields[5], where);
    p.reward = parse_double(fields[6], where);
    if (on_front) on_front->push_back(parse_int(fields[7], where) != 0);
    points.push_back(std::move(p));
  }
  return points;
}

// ---------------------------------------------------------------------------
// Run manifests
// ---------------------------------------------------------------------------

/// Flat key-value manifest capturing the sweep configuration and dataset
/// provenance, diff-friendly by construction.
inline void write_manifest(const SweepSpec& spec, const SweepResult& result,
                           const std::vector<std::pair<std::string, double>>&
                               shares,
                           const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "# preflab run manifest\n";
  out << "version = " << kVersion << "\n";
  out << "task.n_prompts = " << spec.task.n_prompts << "\n";
  out << "task.responses_per_prompt = " << spec.task.responses_per_prompt
      << "\n";
  out << "task.reward_style = " << reward_style_name(spec.task.reward_style)
      << "\n";
  out << "task.seed = " << spec.task.seed << "\n";
  out << "methods = ";
  for (std::size_t i = 0; i < spec.methods.size(); ++i)
    out << (i ? ", " : "") << loss_kind_name(spec.methods[i].kind);
  out << "\n";
  auto write_doubles = [&](const char* key, const std::vector<double>& v) {
    out << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i)
      out << (i ? ", " : "") << format_double(v[i]);
    out << "\n";
  };
  auto write_ints = [&](const char* key, const std::vector<std::int64_t>& v) {
    out << key << " = ";
    for (std::size_t i = 0; i < v.size(); ++i) out << (i ? ", " : "") << v[i];
    out << "\n";
  };
  write_doubles("betas", spec.betas);
  write_doubles("alphas", spec.alphas);
  write_ints("seeds", spec.seeds);
  write_ints("dataset_sizes", spec.dataset_sizes);
  out << "scaling = " << offset_scaling_name(spec.scaling) << "\n";
  out << "samples_per_prompt = " << spec.samples_per_prompt << "\n";
  out << "slic_margin = " << format_double(spec.methods.empty()
                                               ? 1.0
                                               : spec.methods.front().slic_margin)
      << "\n";
  out << "train.learning_rate = " << format_double(spec.train.learning_rate)
      << "\n";
  out << "train.max_steps = " << spec.train.max_steps << "\n";
  out << "train.grad_norm_tol = " << format_double(spec.train.grad_norm_tol)
      << "\n";
  out << "train.log_every = " << spec.train.log_every << "\n";
  for (const auto& [key, fp] : result.dataset_fingerprints) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%016llx",
                  static_cast<unsigned long long>(fp));
    out << "dataset.fingerprint." << key << " = " << buf << "\n";
  }
  for (const auto& [key, count] : result.negative_offset_counts)
    out << "dataset.negative_offsets." << key << " = " << count << "\n";
  out << "cells.failed = " << result.failures.size() << "\n";
  for (const auto& f : result.failures)
    out << "failure = " << f.method << " beta=" << format_double(f.beta)
        << " alpha=" << format_double(f.alpha) << " seed=" << f.seed
        << " size=" << f.dataset_size << " : " << f.message << "\n";
  for (const auto& [method, share] : shares) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", share);
    out << "share." << method << " = " << buf << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace preflab
