// Copyright 2026 The Comsync Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "comsync/evaluation.h"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>

#include "comsync/errors.h"
#include "comsync/reranker.h"
#include "comsync/text_units.h"

namespace comsync {
namespace {

constexpr size_t kRecallDepth = 5;

double fraction(size_t num, size_t den) {
  return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den);
}

// floor(10 * num / den) clamped to the last bin, in integers.
size_t bin_of(const Ratio& r) {
  return std::min<size_t>(10 * r.numerator / r.denominator, 9);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

nlohmann::json optional_json(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

nlohmann::json histogram_json(const Histogram& h) {
  auto mass = h.mass();
  return {{"bins", h.bins},
          {"mass", std::vector<double>(mass.begin(), mass.end())},
          {"covered", h.covered}};
}

}  // namespace

bool exact_match(std::string_view candidate, std::string_view reference) {
  return tokenize(candidate, TextKind::kComment).texts() ==
         tokenize(reference, TextKind::kComment).texts();
}

size_t word_edit_distance(std::string_view a, std::string_view b) {
  return edit_distance(tokenize(a, TextKind::kComment).texts(),
                       tokenize(b, TextKind::kComment).texts());
}

EvalReport score_corpus(std::span<const ScoredTarget> targets) {
  EvalReport report;
  TrialMetrics m;
  m.targets = targets.size();
  for (const auto& t : targets) {
    if (!t.reference) throw MissingReference(t.target_id);
    if (t.ranked.empty()) {
      throw std::invalid_argument("target '" + t.target_id + "' has no candidates");
    }
    SampleRecord rec;
    rec.target_id = t.target_id;
    for (size_t k = 0; k < t.ranked.size(); ++k) {
      if (exact_match(t.ranked[k], *t.reference)) {
        rec.matched_rank = k + 1;
        break;
      }
    }
    rec.ed_diff = static_cast<int64_t>(word_edit_distance(t.ranked[0], *t.reference)) -
                  static_cast<int64_t>(word_edit_distance(t.old_comment, *t.reference));
    if (rec.matched_rank && *rec.matched_rank <= kRecallDepth) {
      ++m.top5;
      if (*rec.matched_rank == 1) ++m.top1;
    }
    if (rec.ed_diff < 0) ++m.ess;
    report.samples.push_back(std::move(rec));
  }
  std::sort(report.samples.begin(), report.samples.end(),
            [](const SampleRecord& a, const SampleRecord& b) {
              return a.target_id < b.target_id;
            });
  m.accuracy = fraction(m.top1, m.targets);
  m.recall_at_5 = fraction(m.top5, m.targets);
  m.ess_ratio = fraction(m.ess, m.targets);
  report.trials.push_back(m);
  report.accuracy = {m.accuracy, 0.0};
  report.recall_at_5 = {m.recall_at_5, 0.0};
  report.ess_ratio = {m.ess_ratio, 0.0};
  return report;
}

MetricSummary summarize(std::span<const double> values) {
  MetricSummary s;
  if (values.empty()) return s;
  double sum = 0.0;
  for (double v : values) sum += v;
  s.mean = sum / static_cast<double>(values.size());
  double sq = 0.0;
  for (double v : values) sq += (v - s.mean) * (v - s.mean);
  s.stddev = std::sqrt(sq / static_cast<double>(values.size()));
  return s;
}

EvalReport aggregate_trials(std::span<const EvalReport> reports) {
  if (reports.empty()) throw std::invalid_argument("no trials to aggregate");
  EvalReport out;
  for (const auto& r : reports) {
    out.trials.insert(out.trials.end(), r.trials.begin(), r.trials.end());
    out.samples.insert(out.samples.end(), r.samples.begin(), r.samples.end());
  }
  std::vector<double> acc, rec, ess;
  for (const auto& t : out.trials) {
    acc.push_back(t.accuracy);
    rec.push_back(t.recall_at_5);
    ess.push_back(t.ess_ratio);
  }
  out.accuracy = summarize(acc);
  out.recall_at_5 = summarize(rec);
  out.ess_ratio = summarize(ess);
  out.ledger = reports.back().ledger;
  return out;
}

std::array<double, 10> Histogram::mass() const {
  std::array<double, 10> m{};
  for (size_t k = 0; k < bins.size(); ++k) m[k] = fraction(bins[k], covered);
  return m;
}

CorpusAnalysis analyze_corpus(std::span<const CCSample> corpus) {
  CorpusAnalysis a;
  size_t novel_below = 0;
  size_t edit_below = 0;
  for (const auto& s : corpus) {
    if (!s.new_comment) continue;
    ++a.samples;
    const auto ctx = TargetContext::from_sample(s);
    const auto reference = subtokens_of(*s.new_comment, TextKind::kComment);

    if (!ctx.removed_in_comment.empty()) {
      ++a.propagation_subset;
      if (surviving_name_subtokens(ctx, reference).empty()) ++a.propagated;
    }

    const Ratio novel = novel_subtoken_ratio(ctx.old_comment, reference);
    if (novel.denominator > 0) {
      ++a.novel_ratio.covered;
      ++a.novel_ratio.bins[bin_of(novel)];
      if (10 * novel.numerator < 4 * novel.denominator) ++novel_below;
    }
    const Ratio edit = edit_distance_ratio(ctx.old_comment, reference);
    if (edit.denominator > 0) {
      ++a.edit_ratio.covered;
      ++a.edit_ratio.bins[bin_of(edit)];
      if (10 * edit.numerator < 6 * edit.denominator) ++edit_below;
    }
  }
  if (a.propagation_subset > 0) {
    a.propagation_rate = fraction(a.propagated, a.propagation_subset);
  }
  if (a.novel_ratio.covered > 0) {
    a.novel_share_below_04 = fraction(novel_below, a.novel_ratio.covered);
  }
  if (a.edit_ratio.covered > 0) {
    a.edit_share_below_06 = fraction(edit_below, a.edit_ratio.covered);
  }
  return a;
}

nlohmann::json to_json(const EvalReport& report) {
  nlohmann::json trials = nlohmann::json::array();
  for (const auto& t : report.trials) {
    trials.push_back({{"targets", t.targets},
                      {"top1", t.top1},
                      {"top5", t.top5},
                      {"ess", t.ess},
                      {"accuracy", t.accuracy},
                      {"recall_at_5", t.recall_at_5},
                      {"ess_ratio", t.ess_ratio}});
  }
  nlohmann::json samples = nlohmann::json::array();
  for (const auto& s : report.samples) {
    samples.push_back({{"target_id", s.target_id},
                       {"matched_rank", s.matched_rank
                                            ? nlohmann::json(*s.matched_rank)
                                            : nlohmann::json(nullptr)},
                       {"ed_diff", s.ed_diff}});
  }
  auto summary = [](const MetricSummary& m) {
    return nlohmann::json{{"mean", m.mean}, {"std", m.stddev}};
  };
  nlohmann::json out = {{"trials", trials},
                        {"accuracy", summary(report.accuracy)},
                        {"recall_at_5", summary(report.recall_at_5)},
                        {"ess_ratio", summary(report.ess_ratio)},
                        {"samples", samples}};
  if (!report.ledger.is_null()) out["ledger"] = report.ledger;
  return out;
}

nlohmann::json to_json(const CorpusAnalysis& a) {
  return {{"samples", a.samples},
          {"propagation",
           {{"subset", a.propagation_subset},
            {"propagated", a.propagated},
            {"rate", optional_json(a.propagation_rate)}}},
          {"novel_ratio", histogram_json(a.novel_ratio)},
          {"edit_ratio", histogram_json(a.edit_ratio)},
          {"novel_share_below_0.4", optional_json(a.novel_share_below_04)},
          {"edit_share_below_0.6", optional_json(a.edit_share_below_06)}};
}

std::string metrics_csv(const EvalReport& report) {
  std::string out = "trial,accuracy,recall_at_5,ess_ratio\n";
  for (size_t i = 0; i < report.trials.size(); ++i) {
    const auto& t = report.trials[i];
    out += std::to_string(i) + "," + fmt(t.accuracy) + "," +
           fmt(t.recall_at_5) + "," + fmt(t.ess_ratio) + "\n";
  }
  out += "mean," + fmt(report.accuracy.mean) + "," +
         fmt(report.recall_at_5.mean) + "," + fmt(report.ess_ratio.mean) + "\n";
  out += "std," + fmt(report.accuracy.stddev) + "," +
         fmt(report.recall_at_5.stddev) + "," + fmt(report.ess_ratio.stddev) +
         "\n";
  return out;
}

std::string samples_csv(const EvalReport& report) {
  std::string out = "target_id,matched_rank,ed_diff\n";
  for (const auto& s : report.samples) {
    // Ids are validated to be plain strings; quote them in case of commas.
    std::string id = s.target_id;
    if (id.find_first_of(",\"\n") != std::string::npos) {
      std::string q = "\"";
      for (char c : id) {
        if (c == '"') q += '"';
        q += c;
      }
      id = q + "\"";
    }
    out += id + "," + (s.matched_rank ? std::to_string(*s.matched_rank) : "") +
           "," + std::to_string(s.ed_diff) + "\n";
  }
  return out;
}

std::string histogram_csv(const CorpusAnalysis& a) {
  std::string out = "bin_low,bin_high,novel_count,novel_mass,edit_count,edit_mass\n";
  const auto nm = a.novel_ratio.mass();
  const auto em = a.edit_ratio.mass();
  for (size_t k = 0; k < 10; ++k) {
    char lo[8], hi[8];
    std::snprintf(lo, sizeof(lo), "%.1f", k / 10.0);
    std::snprintf(hi, sizeof(hi), "%.1f", (k + 1) / 10.0);
    out += std::string(lo) + "," + (k == 9 ? std::string("inf") : std::string(hi)) +
           "," + std::to_string(a.novel_ratio.bins[k]) + "," + fmt(nm[k]) + "," +
           std::to_string(a.edit_ratio.bins[k]) + "," + fmt(em[k]) + "\n";
  }
  return out;
}

}  // namespace comsync
