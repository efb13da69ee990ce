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

#include "forge/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <map>
#include <sstream>

#include "forge/error.hpp"

namespace forge {

namespace {

struct ExecBits {
  int compiled;
  int correct;
  double speedup;
};

ExecBits exec_bits(const VerdictRecord& v, bool robust) {
  if (!robust && v.ungated) return {v.ungated->compiled, v.ungated->correct, v.ungated->speedup};
  return {v.compiled, v.correct, v.speedup};
}

int front_gate(const VerdictRecord& v, bool robust) { return robust ? v.syntax * v.func : v.syntax; }

std::size_t window(const TaskSamples& t, int k, bool allow_short) {
  if (k < 1) throw InsufficientSamples("k must be at least 1");
  if (t.samples.size() < static_cast<std::size_t>(k)) {
    if (!allow_short) {
      throw InsufficientSamples("task " + t.task_id + " has " + std::to_string(t.samples.size()) +
                                " samples, fewer than k=" + std::to_string(k));
    }
    return t.samples.size();
  }
  return static_cast<std::size_t>(k);
}

int best_indicator(const TaskSamples& t, std::size_t n, Metric m, double p, bool robust) {
  int best = 0;
  for (std::size_t i = 0; i < n && !best; ++i) best = indicator(t.samples[i], m, p, robust);
  return best;
}

double best_speedup(const TaskSamples& t, std::size_t n, bool robust) {
  double best = 0.0;
  for (std::size_t i = 0; i < n; ++i) best = std::max(best, gated_speedup(t.samples[i], robust));
  return best;
}

/// 1 - C(n-c, k)/C(n, k) as a running product.
double unbiased_one(std::size_t n, std::size_t c, std::size_t k) {
  if (n - c < k) return 1.0;
  double miss = 1.0;
  for (std::size_t i = n - c + 1; i <= n; ++i) miss *= 1.0 - static_cast<double>(k) / static_cast<double>(i);
  return 1.0 - miss;
}

double unbiased_task(const TaskSamples& t, std::size_t k, Metric m, double p, bool robust) {
  std::size_t c = 0;
  for (const auto& s : t.samples) c += static_cast<std::size_t>(indicator(s, m, p, robust));
  return unbiased_one(t.samples.size(), c, k);
}

TaskRow evaluate_task(const TaskSamples& t, int k, std::span<const double> fast_p, const EvalOptions& o) {
  TaskRow row;
  row.task_id = t.task_id;
  std::size_t n = window(t, k, o.allow_short);
  row.samples = n;
  row.valid = best_indicator(t, n, Metric::Valid, 0.0, o.robust);
  row.compiled = best_indicator(t, n, Metric::Compiled, 0.0, o.robust);
  row.correct = best_indicator(t, n, Metric::Correct, 0.0, o.robust);
  for (double p : fast_p) row.fast.push_back(best_indicator(t, n, Metric::Fast, p, o.robust));
  row.best_speedup = best_speedup(t, n, o.robust);
  return row;
}

struct Fractions {
  double valid = 0, compiled = 0, correct = 0, speedup = 0;
  std::vector<double> fast;
};

Fractions task_fractions(const TaskSamples& t, const TaskRow& row, int k, std::span<const double> fast_p,
                         const EvalOptions& o) {
  Fractions f;
  f.speedup = row.best_speedup;
  if (o.unbiased) {
    std::size_t kk = std::min<std::size_t>(static_cast<std::size_t>(k), t.samples.size());
    f.valid = unbiased_task(t, kk, Metric::Valid, 0.0, o.robust);
    f.compiled = unbiased_task(t, kk, Metric::Compiled, 0.0, o.robust);
    f.correct = unbiased_task(t, kk, Metric::Correct, 0.0, o.robust);
    for (double p : fast_p) f.fast.push_back(unbiased_task(t, kk, Metric::Fast, p, o.robust));
  } else {
    f.valid = row.valid;
    f.compiled = row.compiled;
    f.correct = row.correct;
    for (int x : row.fast) f.fast.push_back(x);
  }
  return f;
}

MetricsSummary reduce(std::span<const TaskSamples> tasks, int k, std::span<const double> fast_p,
                      const EvalOptions& o, std::vector<TaskRow> rows, const std::vector<Fractions>& parts) {
  MetricsSummary s;
  s.k = k;
  s.N = tasks.size();
  s.robust = o.robust;
  s.unbiased = o.unbiased;
  s.fast_p.assign(fast_p.begin(), fast_p.end());
  s.fast.assign(fast_p.size(), 0.0);
  for (const auto& f : parts) {
    s.valid += f.valid;
    s.compiled += f.compiled;
    s.correct += f.correct;
    s.mean_speedup += f.speedup;
    for (std::size_t j = 0; j < f.fast.size(); ++j) s.fast[j] += f.fast[j];
  }
  if (s.N > 0) {
    const double n = static_cast<double>(s.N);
    s.valid /= n;
    s.compiled /= n;
    s.correct /= n;
    s.mean_speedup /= n;
    for (double& x : s.fast) x /= n;
  }
  s.rows = std::move(rows);
  return s;
}

void check_k(int k) {
  if (k < 1) throw InsufficientSamples("k must be at least 1");
}

}  // namespace

std::vector<TaskSamples> group_by_task(std::span<const VerdictRecord> verdicts, bool skip_unjudged,
                                       std::size_t* skipped) {
  std::map<std::string, std::vector<VerdictRecord>> by_task;
  std::size_t dropped = 0;
  for (const auto& v : verdicts) {
    auto& bucket = by_task[v.task_id];
    if (skip_unjudged && v.judge_unavailable) {
      ++dropped;
      continue;
    }
    bucket.push_back(v);
  }
  std::vector<TaskSamples> out;
  for (auto& [id, samples] : by_task) {
    std::sort(samples.begin(), samples.end(),
              [](const VerdictRecord& a, const VerdictRecord& b) { return a.sample_index < b.sample_index; });
    for (std::size_t i = 1; i < samples.size(); ++i) {
      if (samples[i].sample_index == samples[i - 1].sample_index) {
        throw SchemaError("duplicate verdict for task " + id + " sample " + std::to_string(samples[i].sample_index));
      }
    }
    if (samples.empty()) continue;
    out.push_back({id, std::move(samples)});
  }
  if (skipped) *skipped = dropped;
  return out;
}

int indicator(const VerdictRecord& v, Metric metric, double p, bool robust) {
  const int gate = front_gate(v, robust);
  const ExecBits e = exec_bits(v, robust);
  switch (metric) {
    case Metric::Valid: return gate;
    case Metric::Compiled: return gate * e.compiled;
    case Metric::Correct: return gate * e.correct;
    case Metric::Fast: return gate * e.correct * (e.speedup > p ? 1 : 0);
  }
  return 0;
}

double gated_speedup(const VerdictRecord& v, bool robust) {
  const ExecBits e = exec_bits(v, robust);
  return front_gate(v, robust) && e.correct ? e.speedup : 0.0;
}

double pass_at_k(std::span<const TaskSamples> tasks, int k, Metric metric, double p, bool robust) {
  check_k(k);
  if (tasks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : tasks) sum += best_indicator(t, window(t, k, false), metric, p, robust);
  return sum / static_cast<double>(tasks.size());
}

double mean_speedup(std::span<const TaskSamples> tasks, int k, bool robust) {
  check_k(k);
  if (tasks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : tasks) sum += best_speedup(t, window(t, k, false), robust);
  return sum / static_cast<double>(tasks.size());
}

double pass_at_k_unbiased(std::span<const TaskSamples> tasks, int k, Metric metric, double p, bool robust) {
  check_k(k);
  if (tasks.empty()) return 0.0;
  double sum = 0.0;
  for (const auto& t : tasks) {
    window(t, k, false);
    sum += unbiased_task(t, static_cast<std::size_t>(k), metric, p, robust);
  }
  return sum / static_cast<double>(tasks.size());
}

MetricsSummary summarize_serial(std::span<const TaskSamples> tasks, int k, std::span<const double> fast_p,
                                const EvalOptions& options) {
  check_k(k);
  std::vector<TaskRow> rows;
  std::vector<Fractions> parts;
  for (const auto& t : tasks) {
    rows.push_back(evaluate_task(t, k, fast_p, options));
    parts.push_back(task_fractions(t, rows.back(), k, fast_p, options));
  }
  return reduce(tasks, k, fast_p, options, std::move(rows), parts);
}

MetricsSummary summarize(std::span<const TaskSamples> tasks, int k, std::span<const double> fast_p,
                         const EvalOptions& options) {
  check_k(k);
  std::vector<TaskRow> rows(tasks.size());
  std::vector<Fractions> parts(tasks.size());
  std::exception_ptr failure;
  const auto n = static_cast<std::ptrdiff_t>(tasks.size());
#pragma omp parallel for schedule(dynamic, 8)
  for (std::ptrdiff_t i = 0; i < n; ++i) {
    const auto u = static_cast<std::size_t>(i);
    try {
      rows[u] = evaluate_task(tasks[u], k, fast_p, options);
      parts[u] = task_fractions(tasks[u], rows[u], k, fast_p, options);
    } catch (...) {
#pragma omp critical(forge_metrics_failure)
      if (!failure) failure = std::current_exception();
    }
  }
  if (failure) std::rethrow_exception(failure);
  // Reduction runs in task order, so sums match the serial path exactly.
  return reduce(tasks, k, fast_p, options, std::move(rows), parts);
}

void to_json(nlohmann::json& j, const MetricsSummary& s) {
  nlohmann::json fast = nlohmann::json::object();
  for (std::size_t i = 0; i < s.fast_p.size(); ++i) {
    char key[32];
    std::snprintf(key, sizeof key, "fast_%g", s.fast_p[i]);
    fast[key] = s.fast[i];
  }
  nlohmann::json rows = nlohmann::json::array();
  for (const auto& r : s.rows) {
    rows.push_back({{"task_id", r.task_id},
                    {"samples", r.samples},
                    {"valid", r.valid},
                    {"compiled", r.compiled},
                    {"correct", r.correct},
                    {"fast", r.fast},
                    {"best_speedup", r.best_speedup}});
  }
  j = nlohmann::json{{"label", s.label},
                     {"k", s.k},
                     {"N", s.N},
                     {"valid", s.valid},
                     {"compiled", s.compiled},
                     {"correct", s.correct},
                     {"fast_p", s.fast_p},
                     {"fast", fast},
                     {"mean_speedup", s.mean_speedup},
                     {"robust", s.robust},
                     {"estimator", s.unbiased ? "unbiased" : "max_over_k"},
                     {"skipped", s.skipped},
                     {"tasks", rows}};
}

void from_json(const nlohmann::json& j, MetricsSummary& s) {
  s = MetricsSummary{};
  s.label = j.value("label", std::string());
  s.k = j.at("k").get<int>();
  s.N = j.at("N").get<std::size_t>();
  s.valid = j.at("valid").get<double>();
  s.compiled = j.at("compiled").get<double>();
  s.correct = j.at("correct").get<double>();
  s.fast_p = j.at("fast_p").get<std::vector<double>>();
  const auto& fast = j.at("fast");
  for (double p : s.fast_p) {
    char key[32];
    std::snprintf(key, sizeof key, "fast_%g", p);
    s.fast.push_back(fast.at(key).get<double>());
  }
  s.mean_speedup = j.at("mean_speedup").get<double>();
  s.robust = j.value("robust", true);
  s.unbiased = j.value("estimator", std::string("max_over_k")) == "unbiased";
  s.skipped = j.value("skipped", std::size_t{0});
  for (const auto& r : j.value("tasks", nlohmann::json::array())) {
    TaskRow row;
    row.task_id = r.at("task_id").get<std::string>();
    row.samples = r.at("samples").get<std::size_t>();
    row.valid = r.at("valid").get<int>();
    row.compiled = r.at("compiled").get<int>();
    row.correct = r.at("correct").get<int>();
    row.fast = r.at("fast").get<std::vector<int>>();
    row.best_speedup = r.at("best_speedup").get<double>();
    s.rows.push_back(std::move(row));
  }
}

namespace {

std::string pct(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.1f", 100.0 * x);
  return buf;
}

std::string num(double x) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", x);
  return buf;
}

std::string fast_name(double p) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "fast_%g", p);
  return buf;
}

struct PairedRow {
  const MetricsSummary* robust = nullptr;
  const MetricsSummary* plain = nullptr;
};

std::vector<std::string> metric_cells(const MetricsSummary* s, std::size_t n_fast) {
  std::vector<std::string> cells;
  if (!s) {
    cells.assign(4 + n_fast, "-");
    return cells;
  }
  cells.push_back(pct(s->valid));
  cells.push_back(pct(s->compiled));
  cells.push_back(pct(s->correct));
  for (std::size_t i = 0; i < n_fast; ++i) cells.push_back(i < s->fast.size() ? pct(s->fast[i]) : "-");
  cells.push_back(num(s->mean_speedup));
  return cells;
}

}  // namespace

std::string render_report(std::span<const MetricsSummary> summaries, ReportLayout layout) {
  if (summaries.empty()) return "";
  if (layout == ReportLayout::Json) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& s : summaries) arr.push_back(s);
    return arr.dump(2) + "\n";
  }

  std::vector<std::pair<std::string, int>> order;
  std::map<std::pair<std::string, int>, PairedRow> rows;
  std::vector<double> fast_p;
  bool any_plain = false;
  for (const auto& s : summaries) {
    auto key = std::make_pair(s.label, s.k);
    if (!rows.count(key)) order.push_back(key);
    PairedRow& r = rows[key];
    (s.robust ? r.robust : r.plain) = &s;
    any_plain |= !s.robust;
    if (s.fast_p.size() > fast_p.size()) fast_p = s.fast_p;
  }

  std::vector<std::string> header = {"model", "k", "valid", "compiled", "correct"};
  for (double p : fast_p) header.push_back(fast_name(p));
  header.push_back("mean_speedup");
  if (any_plain) {
    for (std::string h : {"valid", "compiled", "correct"}) header.push_back(h + " (w/o robust)");
    for (double p : fast_p) header.push_back(fast_name(p) + " (w/o robust)");
    header.push_back("mean_speedup (w/o robust)");
  }
  std::vector<std::vector<std::string>> body;
  for (const auto& key : order) {
    const PairedRow& r = rows[key];
    std::vector<std::string> line = {key.first.empty() ? "-" : key.first, std::to_string(key.second)};
    auto a = metric_cells(r.robust, fast_p.size());
    line.insert(line.end(), a.begin(), a.end());
    if (any_plain) {
      auto b = metric_cells(r.plain, fast_p.size());
      line.insert(line.end(), b.begin(), b.end());
    }
    body.push_back(std::move(line));
  }

  std::ostringstream out;
  if (layout == ReportLayout::Markdown) {
    auto emit = [&](const std::vector<std::string>& cells) {
      out << '|';
      for (const auto& c : cells) out << ' ' << c << " |";
      out << '\n';
    };
    emit(header);
    out << '|';
    for (std::size_t i = 0; i < header.size(); ++i) out << (i < 2 ? " --- |" : " ---: |");
    out << '\n';
    for (const auto& line : body) emit(line);
    return out.str();
  }
  std::vector<std::size_t> width(header.size());
  for (std::size_t i = 0; i < header.size(); ++i) width[i] = header[i].size();
  for (const auto& line : body) {
    for (std::size_t i = 0; i < line.size(); ++i) width[i] = std::max(width[i], line[i].size());
  }
  auto emit = [&](const std::vector<std::string>& cells) {
    for (std::size_t i = 0; i < cells.size(); ++i) {
      if (i) out << "  ";
      out << cells[i];
      if (i + 1 < cells.size()) out << std::string(width[i] - cells[i].size(), ' ');
    }
    out << '\n';
  };
  emit(header);
  for (const auto& line : body) emit(line);
  return out.str();
}

}  // namespace forge
