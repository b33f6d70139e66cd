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

#ifndef COMSYNC_RERANKER_H_
#define COMSYNC_RERANKER_H_

#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "comsync/sample.h"
#include "comsync/text_units.h"

namespace comsync {

// Rules run from weak to severe:
//   1. a function-name sub-token that was renamed away and appears in the
//      old comment must not survive in the candidate;
//   2. novel sub-tokens / candidate sub-tokens < sigma;
//   3. edit distance to the old comment / old comment sub-tokens < epsilon.
// A ratio equal to its threshold is a violation.
struct RerankConfig {
  double sigma = 0.35;
  double epsilon = 0.25;
  std::vector<int> rules{1, 2, 3};
  bool distinct_novel = false;     // count distinct novel sub-tokens for rule 2
  bool case_sensitive_ed = true;   // rule 3 edit distance

  // Throws ConfigError.
  void validate() const;
  // "liu", "panth" or "pai".
  static RerankConfig preset(std::string_view dataset);
};

// "1,2,3" -> {1, 2, 3}; throws ConfigError.
std::vector<int> parse_rules(std::string_view text);

struct Ratio {
  size_t numerator = 0;
  size_t denominator = 0;
  // numerator / denominator; callers decide the empty-denominator convention.
  double value() const {
    return static_cast<double>(numerator) / static_cast<double>(denominator);
  }
};

// Shared by the re-ranking rules and the corpus analysis.
Ratio novel_subtoken_ratio(const SubTokenSeq& old_comment,
                           const SubTokenSeq& new_comment,
                           bool distinct = false);
Ratio edit_distance_ratio(const SubTokenSeq& old_comment,
                          const SubTokenSeq& new_comment,
                          bool case_sensitive = true);

// Per-target state the rules need, computed once per target.
struct TargetContext {
  SubTokenSeq old_comment;
  std::set<std::string> old_comment_lower;
  bool name_changed = false;
  // Lower-cased sub-tokens removed from the function name that also occur in
  // the old comment.
  std::vector<std::string> removed_in_comment;

  static TargetContext from_sample(const CCSample& sample);
};

// Removed name sub-tokens still present in `comment` (lower-cased).
std::vector<std::string> surviving_name_subtokens(const TargetContext& ctx,
                                                  const SubTokenSeq& comment);

struct Rule1Result {
  bool violated = false;
  std::vector<std::string> evidence;
};

struct RatioCheck {
  bool violated = false;
  double ratio = 0.0;
  Ratio parts;
  bool vacuous = false;  // rule skipped (empty old comment)
};

Rule1Result check_rule1(const TargetContext& ctx, std::string_view candidate);
RatioCheck check_rule2(const TargetContext& ctx, std::string_view candidate,
                       double sigma, bool distinct = false);
RatioCheck check_rule3(const TargetContext& ctx, std::string_view candidate,
                       double epsilon, bool case_sensitive = true);

struct CandidateDiagnostics {
  Rule1Result rule1;
  RatioCheck rule2;
  RatioCheck rule3;
  std::vector<int> violations;  // enabled rules this candidate breaks
};

struct RerankOutcome {
  std::vector<size_t> order;                // final order, candidate indices
  std::vector<std::vector<size_t>> passes;  // order after each enabled rule
  std::vector<CandidateDiagnostics> diagnostics;  // by candidate index
};

// For each enabled rule in ascending order, stable-partitions the current
// order into passing candidates followed by violators.
RerankOutcome rerank(const TargetContext& ctx,
                     const std::vector<std::string>& candidates,
                     const RerankConfig& config);

// The ordering step alone: violations[r][i] says whether candidate i breaks
// the r-th pass. Returns the order after every pass.
std::vector<std::vector<size_t>> multi_turn_passes(
    size_t candidate_count, const std::vector<std::vector<bool>>& violations);

nlohmann::json to_json(const CandidateDiagnostics& d);

}  // namespace comsync

#endif  // COMSYNC_RERANKER_H_
