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

#ifndef COMSYNC_EVALUATION_H_
#define COMSYNC_EVALUATION_H_

#include <array>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "comsync/sample.h"

namespace comsync {

// Comment token sequences are equal, case-sensitive. Whitespace is ignored.
bool exact_match(std::string_view candidate, std::string_view reference);

// Word-level (comment token) edit distance.
size_t word_edit_distance(std::string_view a, std::string_view b);

struct ScoredTarget {
  std::string target_id;
  std::string old_comment;
  std::optional<std::string> reference;
  std::vector<std::string> ranked;  // best first
};

struct SampleRecord {
  std::string target_id;
  std::optional<size_t> matched_rank;  // 1-based, first exact match at any depth
  int64_t ed_diff = 0;  // ED(top-1, ref) - ED(old comment, ref)
};

struct TrialMetrics {
  size_t targets = 0;
  size_t top1 = 0;
  size_t top5 = 0;
  size_t ess = 0;
  double accuracy = 0.0;
  double recall_at_5 = 0.0;
  double ess_ratio = 0.0;
};

struct MetricSummary {
  double mean = 0.0;
  double stddev = 0.0;  // population
};

struct EvalReport {
  std::vector<TrialMetrics> trials;
  MetricSummary accuracy;
  MetricSummary recall_at_5;
  MetricSummary ess_ratio;
  std::vector<SampleRecord> samples;  // sorted by target id; last trial only
                                      // after aggregation
  nlohmann::json ledger;              // null when no ledger was attached
};

// One trial. Throws MissingReference when a target has no reference, and
// std::invalid_argument when one has no candidates.
EvalReport score_corpus(std::span<const ScoredTarget> targets);

// Mean and population standard deviation over the trials of every report.
// Sample records of all reports are concatenated.
EvalReport aggregate_trials(std::span<const EvalReport> reports);

MetricSummary summarize(std::span<const double> values);

struct Histogram {
  std::array<size_t, 10> bins{};  // bin k covers [k/10, (k+1)/10); the last
                                  // one is open above
  size_t covered = 0;
  std::array<double, 10> mass() const;
};

struct CorpusAnalysis {
  size_t samples = 0;
  size_t propagation_subset = 0;
  size_t propagated = 0;
  std::optional<double> propagation_rate;  // empty subset -> none
  Histogram novel_ratio;
  Histogram edit_ratio;
  std::optional<double> novel_share_below_04;
  std::optional<double> edit_share_below_06;
};

// Samples without a reference new comment are skipped. The ratios come from
// the same functions the reranker uses, with the reference as candidate.
CorpusAnalysis analyze_corpus(std::span<const CCSample> corpus);

nlohmann::json to_json(const EvalReport& report);
nlohmann::json to_json(const CorpusAnalysis& analysis);

// Header plus one row per trial, then "mean" and "std" rows.
std::string metrics_csv(const EvalReport& report);
// target_id,matched_rank,ed_diff
std::string samples_csv(const EvalReport& report);
// bin_low,bin_high,novel_count,novel_mass,edit_count,edit_mass
std::string histogram_csv(const CorpusAnalysis& analysis);

}  // namespace comsync

#endif  // COMSYNC_EVALUATION_H_
