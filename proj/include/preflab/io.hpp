#pragma once

#include <cstdint>
#include <cstdio>
#include <fstream>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "preflab/core.hpp"
#include "preflab/datagen.hpp"
#include "preflab/trainer.hpp"

namespace preflab {

// Field order in emitted records is fixed so reruns are byte-identical.
using Json = nlohmann::ordered_json;

// ---------------------------------------------------------------------------
// Formatting
// ---------------------------------------------------------------------------

/// 17 significant digits: enough to round-trip any double exactly.
inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

// ---------------------------------------------------------------------------
// Dataset interchange: one PreferenceExample per line
// ---------------------------------------------------------------------------

inline Json preference_example_to_json(const PreferenceExample& ex) {
  Json j;
  j["prompt"] = ex.prompt.index;
  j["y_w"] = ex.preferred.index;
  j["y_l"] = ex.dispreferred.index;
  j["score_w"] = ex.score_w ? Json(*ex.score_w) : Json(nullptr);
  j["score_l"] = ex.score_l ? Json(*ex.score_l) : Json(nullptr);
  j["offset"] = ex.offset;
  return j;
}

inline PreferenceExample preference_example_from_json(const Json& j) {
  PreferenceExample ex;
  ex.prompt = PromptId{j.at("prompt").get<std::size_t>()};
  ex.preferred = ResponseId{j.at("y_w").get<std::size_t>()};
  ex.dispreferred = ResponseId{j.at("y_l").get<std::size_t>()};
  if (!j.at("score_w").is_null()) ex.score_w = j.at("score_w").get<double>();
  if (!j.at("score_l").is_null()) ex.score_l = j.at("score_l").get<double>();
  ex.offset = j.at("offset").get<double>();
  return ex;
}

/// Validates the documented record invariants; names the offending line.
inline void validate_preference_example(const PreferenceExample& ex,
                                        std::size_t line) {
  const std::string where = "dataset line " + std::to_string(line + 1) + ": ";
  if (ex.preferred == ex.dispreferred)
    throw ValidationError(where + "preferred equals dispreferred");
  if (ex.score_w.has_value() != ex.score_l.has_value())
    throw ValidationError(where + "scores must be present in pairs");
  if (ex.score_w && !(*ex.score_w > *ex.score_l))
    throw ValidationError(where + "score_w must exceed score_l strictly");
  if (!std::isfinite(ex.offset))
    throw ValidationError(where + "offset is not finite");
}

inline void write_dataset(const std::vector<PreferenceExample>& examples,
                          const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& ex : examples)
    out << preference_example_to_json(ex).dump() << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline std::vector<PreferenceExample> read_dataset(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open dataset file: " + path);
  std::vector<PreferenceExample> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (line.empty()) { ++lineno; continue; }
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("dataset line " + std::to_string(lineno + 1) +
                            ": " + e.what());
    }
    PreferenceExample ex = preference_example_from_json(j);
    validate_preference_example(ex, lineno);
    out.push_back(ex);
    ++lineno;
  }
  return out;
}

/// Cross-checks dataset indices against a task's shape.
inline void validate_dataset_against_task(
    const std::vector<PreferenceExample>& examples, const Task& task) {
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& ex = examples[i];
    if (ex.prompt.index >= task.n_prompts())
      throw ValidationError("dataset line " + std::to_string(i + 1) +
                            ": prompt index out of range");
    const std::size_t k = task.n_responses(ex.prompt);
    if (ex.preferred.index >= k || ex.dispreferred.index >= k)
      throw ValidationError("dataset line " + std::to_string(i + 1) +
                            ": response index out of range");
  }
}

// ---------------------------------------------------------------------------
// Likert records, same line-delimited encoding
// ---------------------------------------------------------------------------

inline std::vector<LikertRecord> read_likert_records(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open likert file: " + path);
  std::vector<LikertRecord> out;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    if (line.empty()) { ++lineno; continue; }
    Json j;
    try {
      j = Json::parse(line);
    } catch (const nlohmann::json::exception& e) {
      throw ValidationError("likert line " + std::to_string(lineno + 1) +
                            ": " + e.what());
    }
    LikertRecord rec;
    rec.prompt = PromptId{j.at("prompt").get<std::size_t>()};
    rec.response_a = ResponseId{j.at("response_a").get<std::size_t>()};
    rec.response_b = ResponseId{j.at("response_b").get<std::size_t>()};
    rec.score_a = j.at("score_a").get<int>();
    rec.score_b = j.at("score_b").get<int>();
    out.push_back(rec);
    ++lineno;
  }
  return out;
}

inline void write_likert_records(const std::vector<LikertRecord>& records,
                                 const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  for (const auto& rec : records) {
    Json j;
    j["prompt"] = rec.prompt.index;
    j["response_a"] = rec.response_a.index;
    j["response_b"] = rec.response_b.index;
    j["score_a"] = rec.score_a;
    j["score_b"] = rec.score_b;
    out << j.dump() << '\n';
  }
  if (!out) throw IoError("write failed: " + path);
}

// ---------------------------------------------------------------------------
// Task and policy files
// ---------------------------------------------------------------------------

inline void write_task(const Task& task, const std::string& path) {
  Json j;
  j["prompts"] = task.n_prompts();
  std::vector<std::size_t> counts;
  counts.reserve(task.n_prompts());
  for (std::size_t x = 0; x < task.n_prompts(); ++x)
    counts.push_back(task.rewards.values[x].size());
  j["responses"] = counts;
  j["rewards"] = task.rewards.values;
  j["piref_logits"] = task.piref.logits;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline Task read_task(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open task file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("task file " + path + ": " + e.what());
  }
  Task task;
  task.rewards.values = j.at("rewards").get<std::vector<std::vector<double>>>();
  task.piref.logits =
      j.at("piref_logits").get<std::vector<std::vector<double>>>();
  const auto prompts = j.at("prompts").get<std::size_t>();
  const auto counts = j.at("responses").get<std::vector<std::size_t>>();
  if (prompts != task.rewards.values.size() || counts.size() != prompts)
    throw ValidationError("task file " + path +
                          ": prompt count disagrees with table rows");
  for (std::size_t x = 0; x < prompts; ++x)
    if (counts[x] != task.rewards.values[x].size())
      throw ValidationError("task file " + path + ": response count for prompt " +
                            std::to_string(x) + " disagrees with reward row");
  auto report = validate_task(task);
  if (!report.ok())
    throw ValidationError("task file " + path + ": " + report.violations.front());
  return task;
}

inline void write_policy(const TabularPolicy& policy, const std::string& path) {
  Json j;
  j["logits"] = policy.logits;
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

inline TabularPolicy read_policy(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open policy file: " + path);
  Json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("policy file " + path + ": " + e.what());
  }
  TabularPolicy p;
  p.logits = j.at("logits").get<std::vector<std::vector<double>>>();
  return p;
}

// ---------------------------------------------------------------------------
// Flat key-value config files: `key = value`, '#' comments, dotted keys
// ---------------------------------------------------------------------------

inline std::map<std::string, std::string> parse_kv_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file: " + path);
  std::map<std::string, std::string> kv;
  std::string line;
  std::size_t lineno = 0;
  auto trim = [](std::string s) {
    const auto a = s.find_first_not_of(" \t\r");
    const auto b = s.find_last_not_of(" \t\r");
    return a == std::string::npos ? std::string() : s.substr(a, b - a + 1);
  };
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos)
      throw ValidationError(path + " line " + std::to_string(lineno) +
                            ": expected `key = value`");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty())
      throw ValidationError(path + " line " + std::to_string(lineno) +
                            ": empty key");
    kv[key] = value;
  }
  return kv;
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::string item;
  std::stringstream ss(s);
  while (std::getline(ss, item, ',')) {
    const auto a = item.find_first_not_of(" \t");
    const auto b = item.find_last_not_of(" \t");
    if (a != std::string::npos) out.push_back(item.substr(a, b - a + 1));
  }
  return out;
}

inline double parse_double(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const double v = std::stod(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse `" + s + "` as a number for " + what);
  }
}

inline std::int64_t parse_int(const std::string& s, const std::string& what) {
  try {
    std::size_t pos = 0;
    const std::int64_t v = std::stoll(s, &pos);
    if (pos != s.size()) throw std::invalid_argument(s);
    return v;
  } catch (const std::exception&) {
    throw ValidationError("cannot parse `" + s + "` as an integer for " + what);
  }
}

inline std::vector<double> parse_double_list(const std::string& s,
                                             const std::string& what) {
  std::vector<double> out;
  for (const auto& item : split_list(s)) out.push_back(parse_double(item, what));
  return out;
}

inline std::vector<std::int64_t> parse_int_list(const std::string& s,
                                                const std::string& what) {
  std::vector<std::int64_t> out;
  for (const auto& item : split_list(s)) out.push_back(parse_int(item, what));
  return out;
}

// ---------------------------------------------------------------------------
// Name <-> enum maps shared by CLI flags and config files
// ---------------------------------------------------------------------------

inline LossKind loss_kind_from_name(const std::string& name) {
  if (name == "sft-nll" || name == "sft") return LossKind::SftNll;
  if (name == "bt-reward") return LossKind::BtReward;
  if (name == "dpo") return LossKind::Dpo;
  if (name == "odpo") return LossKind::Odpo;
  if (name == "softmax-margin") return LossKind::SoftmaxMargin;
  if (name == "slic") return LossKind::Slic;
  throw ValidationError("unknown loss kind: " + name);
}

inline const char* offset_scaling_name(OffsetScaling s) {
  switch (s) {
    case OffsetScaling::LogOfDifference: return "log-of-difference";
    case OffsetScaling::DifferenceOfLogs: return "difference-of-logs";
    case OffsetScaling::Identity: return "identity";
  }
  return "unknown";
}

inline OffsetScaling offset_scaling_from_name(const std::string& name) {
  if (name == "log-of-difference") return OffsetScaling::LogOfDifference;
  if (name == "difference-of-logs") return OffsetScaling::DifferenceOfLogs;
  if (name == "identity") return OffsetScaling::Identity;
  throw ValidationError("unknown offset scaling: " + name);
}

inline RewardStyle reward_style_from_name(const std::string& name) {
  if (name == "uniform-iid") return RewardStyle::UniformIid;
  if (name == "two-cluster") return RewardStyle::TwoCluster;
  if (name == "classifier-like") return RewardStyle::ClassifierLike;
  throw ValidationError("unknown reward style: " + name);
}

// ---------------------------------------------------------------------------
// Trace CSV
// ---------------------------------------------------------------------------

inline void write_trace_csv(const TrainTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot open for writing: " + path);
  out << "step,loss,grad_norm,kl,reward\n";
  for (const auto& e : trace.entries)
    out << e.step << ',' << format_double(e.loss) << ','
        << format_double(e.grad_norm) << ',' << format_double(e.kl) << ','
        << format_double(e.reward) << '\n';
  if (!out) throw IoError("write failed: " + path);
}

}  // namespace preflab
