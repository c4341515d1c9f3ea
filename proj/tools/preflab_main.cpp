// preflab command-line interface.
//
// Exit codes: 0 success, 1 usage error, 2 validation error,
//             3 numerical divergence, 4 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "preflab/preflab.hpp"

namespace fs = std::filesystem;
using namespace preflab;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitUsage = 1;
constexpr int kExitValidation = 2;
constexpr int kExitDivergence = 3;
constexpr int kExitIo = 4;

// Flag > config file > default. Option presence is tracked through CLI11.
class ConfigLayer {
 public:
  void load(const std::string& path) {
    if (!path.empty()) kv_ = parse_kv_file(path);
  }
  bool has(const std::string& key) const { return kv_.count(key) > 0; }
  const std::string& raw(const std::string& key) const { return kv_.at(key); }

  double number(const CLI::Option* flag, double flag_value,
                const std::string& key, double fallback) const {
    if (flag->count() > 0) return flag_value;
    if (has(key)) return parse_double(raw(key), key);
    return fallback;
  }
  std::int64_t integer(const CLI::Option* flag, std::int64_t flag_value,
                       const std::string& key, std::int64_t fallback) const {
    if (flag->count() > 0) return flag_value;
    if (has(key)) return parse_int(raw(key), key);
    return fallback;
  }
  std::string text(const CLI::Option* flag, const std::string& flag_value,
                   const std::string& key, const std::string& fallback) const {
    if (flag->count() > 0) return flag_value;
    if (has(key)) return raw(key);
    return fallback;
  }

 private:
  std::map<std::string, std::string> kv_;
};

std::string fmt_prob(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.8f", v);
  return buf;
}

void ensure_parent_dir(const std::string& path) {
  const auto parent = fs::path(path).parent_path();
  if (!parent.empty()) {
    std::error_code ec;
    fs::create_directories(parent, ec);
    if (ec) throw IoError("cannot create directory " + parent.string());
  }
}

// ---------------------------------------------------------------------------
// gen
// ---------------------------------------------------------------------------

struct GenArgs {
  std::string config_path;
  std::int64_t prompts = 50;
  std::int64_t responses = 4;
  std::string style = "classifier-like";
  std::int64_t pairs_per_prompt = 1;
  std::int64_t samples_per_prompt = 0;  // 0: derived from pairs_per_prompt
  double alpha = 1.0;
  std::string scaling = "log-of-difference";
  std::int64_t seed = 0;
  std::string task_out = "task.json";
  std::string data_out = "pairs.jsonl";
  std::string likert_in;
};

int run_gen(const GenArgs& a) {
  if (!a.likert_in.empty()) {
    auto records = read_likert_records(a.likert_in);
    auto result = likert_pairs(records);
    ensure_parent_dir(a.data_out);
    write_dataset(result.examples, a.data_out);
    std::cout << "pairs=" << result.examples.size()
              << " dropped_ties=" << result.dropped_ties
              << " negative_offsets=" << count_negative_offsets(result.examples)
              << "\n";
    return kExitOk;
  }

  SyntheticTaskSpec spec;
  spec.n_prompts = a.prompts;
  spec.responses_per_prompt = a.responses;
  spec.reward_style = reward_style_from_name(a.style);
  spec.seed = derive_seed(static_cast<std::uint64_t>(a.seed), 0x7a51);
  Task task = make_synthetic_task(spec);

  if (a.pairs_per_prompt < 1)
    throw std::invalid_argument("gen: --pairs-per-prompt must be >= 1");
  std::int64_t m = a.samples_per_prompt;
  if (m == 0) {
    // Smallest m with m(m-1)/2 >= pairs_per_prompt.
    m = 2;
    while (m * (m - 1) / 2 < a.pairs_per_prompt) ++m;
  }
  if (m < 2) throw std::invalid_argument("gen: --samples-per-prompt must be >= 2");

  auto boot =
      bootstrap_preferences(task.piref, task.rewards, static_cast<int>(m),
                            derive_seed(static_cast<std::uint64_t>(a.seed), 0xda7a));

  // Cap pairs per prompt; bootstrap output is grouped by prompt already.
  std::vector<PreferenceExample> kept;
  std::vector<std::int64_t> per_prompt(task.n_prompts(), 0);
  for (const auto& ex : boot.examples)
    if (per_prompt[ex.prompt.index]++ < a.pairs_per_prompt) kept.push_back(ex);

  attach_offsets(kept, offset_scaling_from_name(a.scaling), a.alpha);

  ensure_parent_dir(a.task_out);
  ensure_parent_dir(a.data_out);
  write_task(task, a.task_out);
  write_dataset(kept, a.data_out);
  std::cout << "pairs=" << kept.size()
            << " dropped_same_response=" << boot.dropped_same_response
            << " dropped_equal_reward=" << boot.dropped_equal_reward
            << " negative_offsets=" << count_negative_offsets(kept) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// train
// ---------------------------------------------------------------------------

struct TrainArgs {
  std::string config_path;
  std::string data_path;
  std::string task_path;
  std::string loss = "dpo";
  double beta = 0.5;
  double slic_margin = 1.0;
  double lr = 0.05;
  std::int64_t max_steps = 2000;
  double grad_tol = 1e-7;
  std::int64_t log_every = 100;
  std::int64_t seed = 0;
  std::string policy_out = "policy.json";
  std::string trace_out = "trace.csv";
};

int run_train(const TrainArgs& a) {
  Task task = read_task(a.task_path);
  auto dataset = read_dataset(a.data_path);
  if (dataset.empty())
    throw ValidationError("dataset " + a.data_path + " contains no pairs");
  validate_dataset_against_task(dataset, task);

  TrainConfig config;
  config.loss.kind = loss_kind_from_name(a.loss);
  config.loss.beta = a.beta;
  config.loss.slic_margin = a.slic_margin;
  config.learning_rate = a.lr;
  config.max_steps = a.max_steps;
  config.grad_norm_tol = a.grad_tol;
  config.log_every = a.log_every;
  config.seed = a.seed;

  auto result = train(config, dataset, task.piref, &task.rewards);

  ensure_parent_dir(a.policy_out);
  ensure_parent_dir(a.trace_out);
  write_policy(result.policy, a.policy_out);
  write_trace_csv(result.trace, a.trace_out);

  const auto& last = result.trace.entries.back();
  std::cout << "steps=" << last.step << " loss=" << format_double(last.loss)
            << " grad_norm=" << format_double(last.grad_norm)
            << " kl=" << format_double(last.kl)
            << " reward=" << format_double(last.reward) << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------------------
// verify
// ---------------------------------------------------------------------------

int run_verify(std::int64_t n, std::int64_t seed) {
  const auto grid = default_verification_grid();
  int failed = 0;
  for (std::size_t i = 0; i < grid.size(); ++i) {
    const auto& c = grid[i];
    auto out = verify_case_with_retry(
        c, n, derive_seed(static_cast<std::uint64_t>(seed), i));
    if (!out.verdict.pass()) ++failed;
    std::cout << "theorem=" << c.theorem << " r_w=" << format_double(c.r_w)
              << " r_l=" << format_double(c.r_l)
              << " delta_r=" << format_double(c.delta_r) << " n=" << n
              << " analytic=" << fmt_prob(out.verdict.analytic)
              << " empirical=" << fmt_prob(out.verdict.empirical)
              << " abs_err=" << fmt_prob(out.verdict.abs_error)
              << " three_sigma=" << fmt_prob(out.verdict.three_sigma)
              << " attempts=" << out.attempts
              << " status=" << (out.verdict.pass() ? "PASS" : "FAIL") << "\n";
  }
  std::cout << "passed=" << (grid.size() - failed) << " failed=" << failed
            << "\n";
  return failed == 0 ? kExitOk : kExitValidation;
}

// ---------------------------------------------------------------------------
// sweep spec files
// ---------------------------------------------------------------------------

SweepSpec sweep_spec_from_file(const std::string& path) {
  auto kv = parse_kv_file(path);
  SweepSpec spec;
  spec.betas = sentiment_beta_grid();
  spec.alphas = {1.0};
  spec.dataset_sizes = {200};
  spec.task.n_prompts = 32;
  spec.task.responses_per_prompt = 4;
  spec.task.seed = 1;

  std::vector<std::string> methods = {"dpo", "odpo"};
  double slic_margin = 1.0;
  bool saw_seeds = false;

  for (const auto& [key, value] : kv) {
    if (key == "task.n_prompts") spec.task.n_prompts = parse_int(value, key);
    else if (key == "task.responses_per_prompt")
      spec.task.responses_per_prompt = parse_int(value, key);
    else if (key == "task.reward_style")
      spec.task.reward_style = reward_style_from_name(value);
    else if (key == "task.seed")
      spec.task.seed = static_cast<std::uint64_t>(parse_int(value, key));
    else if (key == "methods") methods = split_list(value);
    else if (key == "betas") spec.betas = parse_double_list(value, key);
    else if (key == "beta_grid") {
      if (value == "sentiment") spec.betas = sentiment_beta_grid();
      else if (value == "toxicity") spec.betas = toxicity_beta_grid();
      else if (value == "scaling-ablation") spec.betas = scaling_ablation_beta_grid();
      else throw ValidationError("unknown beta_grid: " + value);
    } else if (key == "alphas") spec.alphas = parse_double_list(value, key);
    else if (key == "seeds") {
      spec.seeds = parse_int_list(value, key);
      saw_seeds = true;
    } else if (key == "dataset_sizes")
      spec.dataset_sizes = parse_int_list(value, key);
    else if (key == "scaling") spec.scaling = offset_scaling_from_name(value);
    else if (key == "samples_per_prompt")
      spec.samples_per_prompt = static_cast<int>(parse_int(value, key));
    else if (key == "slic_margin") slic_margin = parse_double(value, key);
    else if (key == "train.learning_rate")
      spec.train.learning_rate = parse_double(value, key);
    else if (key == "train.max_steps") spec.train.max_steps = parse_int(value, key);
    else if (key == "train.grad_norm_tol")
      spec.train.grad_norm_tol = parse_double(value, key);
    else if (key == "train.log_every") spec.train.log_every = parse_int(value, key);
    else throw ValidationError(path + ": unknown key `" + key + "`");
  }
  if (!saw_seeds || spec.seeds.empty())
    throw ValidationError(path +
                          ": `seeds` must be listed explicitly (no hidden "
                          "entropy in generating commands)");

  spec.methods.clear();
  for (const auto& name : methods) {
    LossSpec loss;
    loss.kind = loss_kind_from_name(name);
    loss.slic_margin = slic_margin;
    spec.methods.push_back(loss);
  }
  return spec;
}

void print_shares(const ParetoReport& report, const std::string& label) {
  std::cout << label << " front=" << report.front.size() << "/"
            << report.points.size();
  for (const auto& [method, share] : report.share_by_method) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.1f", share);
    std::cout << " " << method << "=" << buf << "%";
  }
  std::cout << "\n";
}

void write_share_csv(const ParetoReport& report, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "method,front_points,total_points,share_pct\n";
  for (const auto& [method, share] : report.share_by_method) {
    std::size_t front_points = 0, total = 0;
    for (std::size_t i = 0; i < report.points.size(); ++i) {
      if (report.points[i].method != method) continue;
      ++total;
    }
    for (auto idx : report.front)
      if (report.points[idx].method == method) ++front_points;
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.6f", share);
    out << method << ',' << front_points << ',' << total << ',' << buf << "\n";
  }
  if (!out) throw IoError("write failed: " + path);
}

int run_sweep_cmd(const std::string& spec_path, const std::string& out_dir,
                  int jobs) {
  auto spec = sweep_spec_from_file(spec_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  auto result = run_sweep(spec, jobs);
  if (result.points.empty()) {
    write_manifest(spec, result, {}, (fs::path(out_dir) / "manifest.txt").string());
    throw DivergenceError(-1, "sweep: every cell failed; see manifest");
  }
  auto report = pareto_share(result.points);
  write_report(report, (fs::path(out_dir) / "points.csv").string());
  write_share_csv(report, (fs::path(out_dir) / "pareto.csv").string());
  write_manifest(spec, result, report.share_by_method,
                 (fs::path(out_dir) / "manifest.txt").string());
  print_shares(report, "sweep");
  if (!result.failures.empty()) {
    std::cerr << "sweep: " << result.failures.size()
              << " cell(s) diverged; partial results written, see manifest\n";
    return kExitDivergence;
  }
  return kExitOk;
}

int run_ablate_scaling(const std::string& spec_path, const std::string& out_dir,
                       int jobs) {
  auto spec = sweep_spec_from_file(spec_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  auto ablation = ablate_scaling(spec, jobs);
  bool fingerprints_match = true;
  for (std::size_t s = 0; s < ablation.reports.size(); ++s) {
    const std::string name = offset_scaling_name(ablation.scalings[s]);
    write_report(ablation.reports[s],
                 (fs::path(out_dir) / ("points_" + name + ".csv")).string());
    print_shares(ablation.reports[s], name);
    if (ablation.fingerprints[s] != ablation.fingerprints[0])
      fingerprints_match = false;
  }
  // One manifest for the shared configuration; fingerprints are common.
  SweepSpec manifest_spec = spec;
  manifest_spec.methods = {LossSpec{LossKind::Dpo}, LossSpec{LossKind::Odpo}};
  manifest_spec.alphas = {1.0};
  SweepResult fp;
  fp.dataset_fingerprints = ablation.fingerprints[0];
  write_manifest(manifest_spec, fp, {},
                 (fs::path(out_dir) / "manifest.txt").string());
  std::cout << "dataset_fingerprints_match="
            << (fingerprints_match ? "yes" : "no") << "\n";
  return fingerprints_match ? kExitOk : kExitValidation;
}

int run_ablate_alpha(const std::string& spec_path, const std::string& out_dir,
                     int jobs) {
  auto spec = sweep_spec_from_file(spec_path);
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create output directory " + out_dir);

  auto result = ablate_alpha(spec, jobs);
  auto report = pareto_share(result.points);
  write_report(report, (fs::path(out_dir) / "points.csv").string());
  SweepSpec used = spec;
  used.methods = {LossSpec{LossKind::Odpo}};
  used.alphas = alpha_ablation_grid();
  write_manifest(used, result, report.share_by_method,
                 (fs::path(out_dir) / "manifest.txt").string());

  // Which alpha values reach the front mirrors the published ablation plot.
  std::map<double, int> front_by_alpha;
  for (double a : alpha_ablation_grid()) front_by_alpha[a] = 0;
  for (auto idx : report.front) ++front_by_alpha[report.points[idx].alpha];
  std::cout << "ablate-alpha front=" << report.front.size() << "/"
            << report.points.size();
  for (const auto& [alpha, count] : front_by_alpha)
    std::cout << " alpha" << format_double(alpha) << "=" << count;
  std::cout << "\n";
  if (!result.failures.empty()) {
    std::cerr << "ablate-alpha: " << result.failures.size()
              << " cell(s) diverged; see manifest\n";
    return kExitDivergence;
  }
  return kExitOk;
}

int run_pareto(const std::string& points_path, const std::string& out_path) {
  auto points = read_report(points_path);
  if (points.empty())
    throw ValidationError(points_path + ": no points to rank");
  auto report = pareto_share(points);
  if (!out_path.empty()) {
    ensure_parent_dir(out_path);
    write_report(report, out_path);
  }
  print_shares(report, "pareto");
  for (auto idx : report.front) {
    const auto& p = report.points[idx];
    std::cout << "front: method=" << p.method << " beta=" << format_double(p.beta)
              << " alpha=" << format_double(p.alpha) << " seed=" << p.seed
              << " kl=" << format_double(p.kl)
              << " reward=" << format_double(p.reward) << "\n";
  }
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"preflab: exact DPO/ODPO experiments on tabular softmax policies"};
  app.require_subcommand(1);

  // --- gen ---
  GenArgs gen;
  auto* gen_cmd = app.add_subcommand(
      "gen", "Generate a synthetic task and bootstrap a preference dataset");
  gen_cmd->add_option("--config", gen.config_path, "Key-value config file");
  auto* gen_prompts = gen_cmd->add_option("--prompts", gen.prompts);
  auto* gen_responses = gen_cmd->add_option("--responses", gen.responses);
  auto* gen_style = gen_cmd->add_option(
      "--style", gen.style, "uniform-iid | two-cluster | classifier-like");
  auto* gen_ppp = gen_cmd->add_option("--pairs-per-prompt", gen.pairs_per_prompt);
  auto* gen_spp = gen_cmd->add_option(
      "--samples-per-prompt", gen.samples_per_prompt,
      "Responses sampled per prompt (default: derived from --pairs-per-prompt)");
  auto* gen_alpha = gen_cmd->add_option("--alpha", gen.alpha);
  auto* gen_scaling = gen_cmd->add_option(
      "--scaling", gen.scaling,
      "log-of-difference | difference-of-logs | identity");
  auto* gen_seed = gen_cmd->add_option("--seed", gen.seed)->required();
  auto* gen_task_out = gen_cmd->add_option("--task-out", gen.task_out);
  auto* gen_data_out = gen_cmd->add_option("--data-out", gen.data_out);
  gen_cmd->add_option("--likert-in", gen.likert_in,
                      "Convert Likert records instead of synthesizing");

  // --- train ---
  TrainArgs tr;
  auto* train_cmd =
      app.add_subcommand("train", "Fit a policy to a preference dataset");
  train_cmd->add_option("--config", tr.config_path, "Key-value config file");
  train_cmd->add_option("--data", tr.data_path, "Preference dataset (jsonl)")
      ->required();
  train_cmd->add_option("--task", tr.task_path, "Task file (json)")->required();
  auto* tr_loss = train_cmd->add_option(
      "--loss", tr.loss, "sft-nll | bt-reward | dpo | odpo | softmax-margin | slic");
  auto* tr_beta = train_cmd->add_option("--beta", tr.beta);
  auto* tr_margin = train_cmd->add_option("--slic-margin", tr.slic_margin);
  auto* tr_lr = train_cmd->add_option("--lr", tr.lr);
  auto* tr_steps = train_cmd->add_option("--max-steps", tr.max_steps);
  auto* tr_tol = train_cmd->add_option("--grad-tol", tr.grad_tol);
  auto* tr_log = train_cmd->add_option("--log-every", tr.log_every);
  train_cmd->add_option("--seed", tr.seed,
                        "Recorded for provenance; training is deterministic");
  train_cmd->add_option("--policy-out", tr.policy_out);
  train_cmd->add_option("--trace-out", tr.trace_out);

  // --- verify ---
  std::int64_t verify_n = 1'000'000;
  std::int64_t verify_seed = 0;
  auto* verify_cmd = app.add_subcommand(
      "verify", "Monte Carlo check of the Gumbel/Bradley-Terry theorems");
  verify_cmd->add_option("--n", verify_n, "Samples per configuration (>= 1e4)");
  verify_cmd->add_option("--seed", verify_seed)->required();

  // --- sweep / ablations ---
  std::string spec_path, out_dir;
  int jobs = 1;
  auto* sweep_cmd = app.add_subcommand("sweep", "Run a hyperparameter sweep");
  sweep_cmd->add_option("--spec", spec_path, "Sweep spec file")->required();
  sweep_cmd->add_option("--out", out_dir, "Output directory")->required();
  sweep_cmd->add_option("--jobs", jobs, "Worker threads (results identical)");

  std::string abl_spec, abl_out;
  int abl_jobs = 1;
  auto* ablate_scaling_cmd = app.add_subcommand(
      "ablate-scaling", "Compare the three offset scalings on shared datasets");
  ablate_scaling_cmd->add_option("--spec", abl_spec)->required();
  ablate_scaling_cmd->add_option("--out", abl_out)->required();
  ablate_scaling_cmd->add_option("--jobs", abl_jobs);

  std::string alpha_spec, alpha_out;
  int alpha_jobs = 1;
  auto* ablate_alpha_cmd = app.add_subcommand(
      "ablate-alpha", "Sweep the offset scale alpha over the published grid");
  ablate_alpha_cmd->add_option("--spec", alpha_spec)->required();
  ablate_alpha_cmd->add_option("--out", alpha_out)->required();
  ablate_alpha_cmd->add_option("--jobs", alpha_jobs);

  // --- pareto ---
  std::string pareto_points, pareto_out;
  auto* pareto_cmd =
      app.add_subcommand("pareto", "Recompute the Pareto front of a points CSV");
  pareto_cmd->add_option("--points", pareto_points)->required();
  pareto_cmd->add_option("--out", pareto_out, "Optional rewritten report CSV");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitUsage;
  }

  try {
    if (*gen_cmd) {
      ConfigLayer cfg;
      cfg.load(gen.config_path);
      gen.prompts = cfg.integer(gen_prompts, gen.prompts, "prompts", gen.prompts);
      gen.responses =
          cfg.integer(gen_responses, gen.responses, "responses", gen.responses);
      gen.style = cfg.text(gen_style, gen.style, "style", gen.style);
      gen.pairs_per_prompt = cfg.integer(gen_ppp, gen.pairs_per_prompt,
                                         "pairs_per_prompt", gen.pairs_per_prompt);
      gen.samples_per_prompt =
          cfg.integer(gen_spp, gen.samples_per_prompt, "samples_per_prompt",
                      gen.samples_per_prompt);
      gen.alpha = cfg.number(gen_alpha, gen.alpha, "alpha", gen.alpha);
      gen.scaling = cfg.text(gen_scaling, gen.scaling, "scaling", gen.scaling);
      gen.seed = cfg.integer(gen_seed, gen.seed, "seed", gen.seed);
      gen.task_out = cfg.text(gen_task_out, gen.task_out, "task_out", gen.task_out);
      gen.data_out = cfg.text(gen_data_out, gen.data_out, "data_out", gen.data_out);
      return run_gen(gen);
    }
    if (*train_cmd) {
      ConfigLayer cfg;
      cfg.load(tr.config_path);
      tr.loss = cfg.text(tr_loss, tr.loss, "loss", tr.loss);
      tr.beta = cfg.number(tr_beta, tr.beta, "beta", tr.beta);
      tr.slic_margin =
          cfg.number(tr_margin, tr.slic_margin, "slic_margin", tr.slic_margin);
      tr.lr = cfg.number(tr_lr, tr.lr, "train.learning_rate", tr.lr);
      tr.max_steps =
          cfg.integer(tr_steps, tr.max_steps, "train.max_steps", tr.max_steps);
      tr.grad_tol =
          cfg.number(tr_tol, tr.grad_tol, "train.grad_norm_tol", tr.grad_tol);
      tr.log_every =
          cfg.integer(tr_log, tr.log_every, "train.log_every", tr.log_every);
      return run_train(tr);
    }
    if (*verify_cmd) return run_verify(verify_n, verify_seed);
    if (*sweep_cmd) return run_sweep_cmd(spec_path, out_dir, jobs);
    if (*ablate_scaling_cmd) return run_ablate_scaling(abl_spec, abl_out, abl_jobs);
    if (*ablate_alpha_cmd) return run_ablate_alpha(alpha_spec, alpha_out, alpha_jobs);
    if (*pareto_cmd) return run_pareto(pareto_points, pareto_out);
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const ValidationError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::out_of_range& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitValidation;
  }
  return kExitUsage;
}
