/*
 * Copyright 2026 The Forge Authors
 *
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 * http://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

#include "cli.hpp"

#include <CLI11.hpp>
#include <fstream>
#include <iostream>
#include <iterator>
#include <map>
#include <sstream>

#include "forge/concurrency.hpp"
#include "forge/error.hpp"
#include "forge/jsonl.hpp"
#include "forge/lint.hpp"
#include "forge/log.hpp"
#include "forge/metrics.hpp"
#include "forge/mixer.hpp"
#include "forge/pipeline.hpp"
#include "forge/records.hpp"

namespace forge::cli {

namespace fs = std::filesystem;
using nlohmann::json;

int exit_code_for(const std::exception& e) {
  if (dynamic_cast<const SchemaError*>(&e) || dynamic_cast<const ConfigError*>(&e) ||
      dynamic_cast<const InvalidArgument*>(&e) || dynamic_cast<const InsufficientSamples*>(&e) ||
      dynamic_cast<const SimplexViolation*>(&e) || dynamic_cast<const EmptySubset*>(&e) ||
      dynamic_cast<const MissingCell*>(&e) || dynamic_cast<const BetaOutOfRange*>(&e) ||
      dynamic_cast<const EmptyGroup*>(&e) || dynamic_cast<const UnparseableReply*>(&e) ||
      dynamic_cast<const NoCodeBlock*>(&e) || dynamic_cast<const json::exception*>(&e)) {
    return kValidation;
  }
  return kInfrastructure;
}

namespace {

/// Flag values in command-line order, applied on top of the config file.
struct Settings {
  std::string config_path;
  std::vector<std::pair<std::string, std::string>> items;

  PipelineConfig resolve() const {
    PipelineConfig c;
    if (!config_path.empty()) c = load_config(config_path, c);
    for (const auto& [key, value] : items) apply_setting(c, key, value);
    return c;
  }
};

void setting(CLI::App* app, Settings& s, const std::string& flag, const std::string& key, const std::string& help) {
  app->add_option_function<std::string>(
      flag, [&s, key](const std::string& v) { s.items.emplace_back(key, v); }, help);
}

void config_flag(CLI::App* app, Settings& s) {
  app->add_option("--config", s.config_path, "key = value settings file")->check(CLI::ExistingFile);
}

void io_flags(CLI::App* app, Settings& s) {
  setting(app, s, "--tasks", "tasks", "tasks JSONL");
  setting(app, s, "--responses", "responses", "candidate responses JSONL");
  setting(app, s, "--out", "out_dir", "output directory");
}

void verify_flags(CLI::App* app, Settings& s) {
  setting(app, s, "--judge", "judge", "stub|remote");
  setting(app, s, "--runner-cmd", "runner_cmd", "kernel runner command (default $FORGE_RUNNER_CMD)");
  setting(app, s, "--timeout", "budget_seconds", "per-candidate wall-clock budget in seconds");
  setting(app, s, "--memory-cap", "memory_cap_bytes", "per-runner memory cap in bytes");
  setting(app, s, "--repetitions", "repetitions", "timed repetitions");
  setting(app, s, "--warmups", "warmups", "untimed warmup runs");
  setting(app, s, "--atol", "atol", "absolute output tolerance");
  setting(app, s, "--rtol", "rtol", "relative output tolerance");
  setting(app, s, "--devices", "devices", "comma-separated device tokens");
  setting(app, s, "--workers", "workers", "concurrent tasks");
  setting(app, s, "--robust", "robust", "on|off; off also executes func-rejected candidates");
  setting(app, s, "--resume", "resume", "on|off");
}

void reward_flags(CLI::App* app, Settings& s) {
  setting(app, s, "--mode", "mode", "hier|uniform");
  setting(app, s, "--alpha", "alpha", "plan-loss weight");
  setting(app, s, "--beta", "beta", "correctness weight of the uniform reward");
  setting(app, s, "--epsilon", "epsilon", "clipping range");
  setting(app, s, "--group-size", "group_size", "samples per task (0: take what is there)");
  setting(app, s, "--normalize-std", "normalize_std", "on|off");
  setting(app, s, "--tokens", "tokens", "per-token ratios JSONL");
}

void eval_flags(CLI::App* app, Settings& s, bool with_robust) {
  setting(app, s, "--k", "k", "comma-separated k values");
  setting(app, s, "--fast", "fast", "comma-separated speedup thresholds");
  if (with_robust) setting(app, s, "--robust", "robust", "on|off");
  setting(app, s, "--unbiased", "unbiased", "on|off");
  setting(app, s, "--allow-short", "allow_short", "on|off");
}

ReportLayout layout_from(const std::string& name) {
  if (name == "table") return ReportLayout::Table;
  if (name == "json") return ReportLayout::Json;
  if (name == "markdown" || name == "md") return ReportLayout::Markdown;
  throw ConfigError("unknown format '" + name + "'");
}

std::string slurp(std::istream& in) {
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

std::string read_source(const std::string& path) {
  if (path == "-") return slurp(std::cin);
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open " + path);
  return slurp(in);
}

int do_lint(const std::string& path, const std::string& reference) {
  const std::string code = read_source(path);
  lint::LintOptions options;
  if (!reference.empty()) options.input_shape_values = lint::input_shape_values(read_source(reference));
  lint::LintReport report = lint::lint_functionality(code, options);
  std::cout << json(report).dump(2) << "\n";
  if (!report.parse_error.empty()) return kInfrastructure;
  return report.rule_valid() ? kOk : kValidation;
}

std::vector<VerdictRecord> read_verdicts(const std::string& path) {
  if (path.empty()) throw ConfigError("--verdicts is required");
  return jsonl::read_records<VerdictRecord>(path);
}

int do_reward(const Settings& s, const std::string& verdicts_path, const std::string& out) {
  PipelineConfig c = s.resolve();
  validate_config(c, false);
  auto verdicts = read_verdicts(verdicts_path);
  std::vector<TokenRecord> tokens;
  if (!c.tokens.empty()) {
    std::vector<CandidateResponse> responses;
    if (!c.responses.empty()) responses = load_responses(c.responses);
    tokens = load_tokens(c.tokens, responses);
  }
  jsonl::write_atomic(out, jsonl::dump(compute_reward_rows(verdicts, tokens, c)));
  return kOk;
}

int do_eval(const Settings& s, const std::string& verdicts_path, const std::string& out, const std::string& format) {
  PipelineConfig c = s.resolve();
  validate_config(c, false);
  auto summaries = compute_metrics(read_verdicts(verdicts_path), c, fs::path(verdicts_path).stem().string());
  jsonl::write_atomic(out, metrics_document(summaries).dump(2) + "\n");
  std::cout << render_report(summaries, layout_from(format));
  return kOk;
}

int do_verify(const Settings& s) {
  PipelineConfig c = s.resolve();
  VerifyResult r = run_verify(c);
  log::info("verified " + std::to_string(r.verdicts.size()) + " candidates, " + std::to_string(r.executed) +
            " executed, " + std::to_string(r.resumed) + " resumed");
  return kOk;
}

int do_run(const Settings& s, const std::string& format) {
  PipelineConfig c = s.resolve();
  PipelineResult r = run_pipeline(c);
  std::cout << render_report(r.metrics, layout_from(format));
  return kOk;
}

int do_label(const std::string& tasks_path, const std::string& mode, std::size_t workers, const std::string& out) {
  auto tasks = load_tasks(tasks_path);
  auto labeler = make_labeler(mode);
  std::vector<DifficultyLabel> labels(tasks.size());
  parallel_for_index(tasks.size(), workers, [&](std::size_t i) { labels[i] = labeler->label(tasks[i]); });
  jsonl::write_atomic(out, jsonl::dump_records(labels));
  return kOk;
}

std::vector<double> parse_list(const std::string& raw) {
  std::vector<double> out;
  std::stringstream ss(raw);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t used = 0;
      out.push_back(std::stod(item, &used));
      if (item.find_first_not_of(" \t", used) != std::string::npos) throw std::invalid_argument(item);
    } catch (const std::logic_error&) {
      throw ConfigError("not a number: '" + item + "'");
    }
  }
  return out;
}

int do_mix(const std::string& p, std::size_t n, std::uint64_t seed, const std::string& labels_path,
           const std::string& tasks_path, const std::string& subsets, const std::string& out) {
  MixtureConfig config;
  config.p = parse_list(p);
  config.sample_count = n;
  config.seed = seed;
  if (!subsets.empty()) {
    config.subset_ids.clear();
    for (double d : parse_list(subsets)) config.subset_ids.push_back(static_cast<int>(d));
  }
  std::map<int, std::vector<std::string>> pools;
  if (!tasks_path.empty()) {
    for (const auto& t : load_tasks(tasks_path)) {
      if (t.difficulty) pools[*t.difficulty].push_back(t.task_id);
    }
  } else {
    for (const auto& l : jsonl::read_records<DifficultyLabel>(labels_path)) pools[l.level].push_back(l.task_id);
  }
  jsonl::write_atomic(out, jsonl::dump_records(sample_mixture(pools, config)));
  return kOk;
}

std::vector<MetricsSummary> read_metrics(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  try {
    json doc = json::parse(in);
    check_version(doc);
    return doc.at("summaries").get<std::vector<MetricsSummary>>();
  } catch (const json::exception& e) {
    throw SchemaError(path + ": " + e.what());
  }
}

/// {"test_subsets": [1, 2], "mixtures": [{"p": [1, 0], "metrics": {"1": "a.json", "2": "b.json"}}]}
/// Each metrics file contributes its first robust summary.
int do_rank(const std::string& path, const std::string& by) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open " + path);
  json doc = json::parse(in);
  const fs::path base = fs::path(path).parent_path();
  std::vector<MixtureCandidate> mixtures;
  for (const auto& m : doc.at("mixtures")) {
    MixtureCandidate c;
    c.p = m.at("p").get<std::vector<double>>();
    const json cells = m.value("metrics", json::object());
    for (const auto& [subset, file] : cells.items()) {
      fs::path f = file.get<std::string>();
      if (f.is_relative()) f = base / f;
      auto summaries = read_metrics(f.string());
      auto it = std::find_if(summaries.begin(), summaries.end(), [](const auto& s) { return s.robust; });
      if (it == summaries.end()) throw SchemaError(f.string() + ": no robust summary");
      c.per_subset[std::stoi(subset)] = *it;
    }
    mixtures.push_back(std::move(c));
  }
  auto subsets = doc.at("test_subsets").get<std::vector<int>>();
  MixtureScoreBy score_by;
  if (by == "correct") score_by = MixtureScoreBy::Correct;
  else if (by == "speedup") score_by = MixtureScoreBy::MeanSpeedup;
  else throw ConfigError("--score-by must be correct or speedup");
  json out = json::array();
  for (const auto& s : score_mixture(mixtures, subsets, score_by)) {
    out.push_back({{"index", s.index}, {"p", s.p}, {"score", s.score}});
  }
  std::cout << out.dump(2) << "\n";
  return kOk;
}

int do_report(const std::vector<std::string>& files, const std::string& format) {
  std::vector<MetricsSummary> all;
  for (const auto& f : files) {
    for (auto& s : read_metrics(f)) all.push_back(std::move(s));
  }
  std::cout << render_report(all, layout_from(format));
  return kOk;
}

}  // namespace

int run(int argc, char** argv) {
  CLI::App app{"Verification, reward and evaluation tooling for generated Triton kernels", "forge"};
  app.require_subcommand(1);
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "log progress to stderr");

  std::string lint_path, lint_reference;
  auto* lint_cmd = app.add_subcommand("lint", "print the rule-based report for one candidate");
  lint_cmd->add_option("file", lint_path, "candidate source, - for stdin")->required();
  lint_cmd->add_option("--reference", lint_reference, "task reference, for hardcoded-shape warnings");

  Settings verify_s;
  auto* verify_cmd = app.add_subcommand("verify", "run the verification cascade over a corpus");
  config_flag(verify_cmd, verify_s);
  io_flags(verify_cmd, verify_s);
  verify_flags(verify_cmd, verify_s);

  Settings reward_s;
  std::string reward_verdicts, reward_out = "rewards.jsonl";
  auto* reward_cmd = app.add_subcommand("reward", "group rewards, advantages and clipped objectives");
  config_flag(reward_cmd, reward_s);
  reward_cmd->add_option("--verdicts", reward_verdicts, "verdicts JSONL")->required();
  setting(reward_cmd, reward_s, "--responses", "responses", "responses JSONL, for token offsets");
  reward_flags(reward_cmd, reward_s);
  reward_cmd->add_option("--out", reward_out, "output JSONL");

  Settings eval_s;
  std::string eval_verdicts, eval_out = "metrics.json", eval_format = "table";
  auto* eval_cmd = app.add_subcommand("eval", "pass@k metrics over verdicts");
  config_flag(eval_cmd, eval_s);
  eval_cmd->add_option("--verdicts", eval_verdicts, "verdicts JSONL")->required();
  eval_flags(eval_cmd, eval_s, true);
  eval_cmd->add_option("--format", eval_format, "table|markdown|json");
  eval_cmd->add_option("--out", eval_out, "metrics JSON");

  std::string label_tasks, label_mode = "stub", label_out = "labels.jsonl";
  std::size_t label_workers = 8;
  auto* label_cmd = app.add_subcommand("label", "assign difficulty levels to tasks");
  label_cmd->add_option("--tasks", label_tasks, "tasks JSONL")->required()->check(CLI::ExistingFile);
  label_cmd->add_option("--labeler", label_mode, "stub|remote");
  label_cmd->add_option("--workers", label_workers, "concurrent requests")->check(CLI::PositiveNumber);
  label_cmd->add_option("--out", label_out, "labels JSONL");

  std::string mix_p, mix_labels = "labels.jsonl", mix_tasks, mix_subsets, mix_out = "mixture.jsonl";
  std::size_t mix_n = 1000;
  std::uint64_t mix_seed = 0;
  auto* mix_cmd = app.add_subcommand("mix", "sample training tasks from difficulty subsets");
  mix_cmd->add_option("--p", mix_p, "mixing probabilities, one per subset")->required();
  mix_cmd->add_option("--n", mix_n, "number of draws");
  mix_cmd->add_option("--seed", mix_seed, "RNG seed");
  mix_cmd->add_option("--labels", mix_labels, "labels JSONL");
  mix_cmd->add_option("--tasks", mix_tasks, "tasks JSONL carrying difficulty (instead of --labels)");
  mix_cmd->add_option("--subsets", mix_subsets, "difficulty level of each p component (default 1,2)");
  mix_cmd->add_option("--out", mix_out, "output JSONL");

  std::vector<std::string> report_files;
  std::string report_format = "table", report_mixtures, report_score_by = "correct";
  auto* report_cmd = app.add_subcommand("report", "render metrics files, or rank candidate mixtures");
  report_cmd->add_option("metrics", report_files, "metrics.json files")->check(CLI::ExistingFile);
  report_cmd->add_option("--format", report_format, "table|markdown|json");
  report_cmd->add_option("--mixtures", report_mixtures, "mixture ranking file")->check(CLI::ExistingFile);
  report_cmd->add_option("--score-by", report_score_by, "correct|speedup");

  Settings run_s;
  std::string run_format = "table";
  auto* run_cmd = app.add_subcommand("run", "verify, reward and evaluate in one pass");
  config_flag(run_cmd, run_s);
  io_flags(run_cmd, run_s);
  verify_flags(run_cmd, run_s);
  reward_flags(run_cmd, run_s);
  eval_flags(run_cmd, run_s, false);
  run_cmd->add_option("--format", run_format, "table|markdown|json");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kValidation;
  }
  if (verbose) log::set_min_level(log::Level::Info);

  try {
    if (*lint_cmd) return do_lint(lint_path, lint_reference);
    if (*verify_cmd) return do_verify(verify_s);
    if (*reward_cmd) return do_reward(reward_s, reward_verdicts, reward_out);
    if (*eval_cmd) return do_eval(eval_s, eval_verdicts, eval_out, eval_format);
    if (*label_cmd) return do_label(label_tasks, label_mode, label_workers, label_out);
    if (*mix_cmd) return do_mix(mix_p, mix_n, mix_seed, mix_labels, mix_tasks, mix_subsets, mix_out);
    if (*report_cmd) {
      if (!report_mixtures.empty()) return do_rank(report_mixtures, report_score_by);
      return do_report(report_files, report_format);
    }
    if (*run_cmd) return do_run(run_s, run_format);
  } catch (const std::exception& e) {
    std::cerr << "forge: " << e.what() << "\n";
    return exit_code_for(e);
  }
  return kOk;
}

}  // namespace forge::cli
