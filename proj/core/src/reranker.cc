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

#include "comsync/reranker.h"

#include <algorithm>
#include <numeric>

#include "comsync/change_analysis.h"
#include "comsync/errors.h"

namespace comsync {
namespace {

std::set<std::string> lowered(const SubTokenSeq& seq) {
  std::set<std::string> out;
  for (const auto& s : seq.subtokens) out.insert(to_lower(s));
  return out;
}

}  // namespace

void RerankConfig::validate() const {
  if (!(sigma > 0.0 && sigma <= 1.0)) throw ConfigError("sigma must be in (0, 1]");
  if (!(epsilon > 0.0)) throw ConfigError("epsilon must be > 0");
  for (size_t i = 0; i < rules.size(); ++i) {
    if (rules[i] < 1 || rules[i] > 3) throw ConfigError("rules must be 1, 2 or 3");
    if (i > 0 && rules[i] <= rules[i - 1]) {
      throw ConfigError("rules must be listed once each in ascending order");
    }
  }
}

RerankConfig RerankConfig::preset(std::string_view dataset) {
  RerankConfig c;
  if (dataset == "liu") {
    c.sigma = 0.35;
    c.epsilon = 0.25;
  } else if (dataset == "panth") {
    c.sigma = 0.35;
    c.epsilon = 0.55;
  } else if (dataset == "pai") {
    c.sigma = 0.35;
    c.epsilon = 0.2;
  } else {
    throw ConfigError("unknown dataset preset '" + std::string(dataset) + "'");
  }
  return c;
}

std::vector<int> parse_rules(std::string_view text) {
  std::vector<int> rules;
  size_t start = 0;
  while (start <= text.size()) {
    size_t comma = text.find(',', start);
    std::string_view part = text.substr(
        start, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - start);
    while (!part.empty() && part.front() == ' ') part.remove_prefix(1);
    while (!part.empty() && part.back() == ' ') part.remove_suffix(1);
    if (part == "1" || part == "2" || part == "3") {
      rules.push_back(part[0] - '0');
    } else if (!part.empty()) {
      throw ConfigError("bad rule '" + std::string(part) + "'");
    }
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  std::sort(rules.begin(), rules.end());
  rules.erase(std::unique(rules.begin(), rules.end()), rules.end());
  return rules;
}

Ratio novel_subtoken_ratio(const SubTokenSeq& old_comment,
                           const SubTokenSeq& new_comment, bool distinct) {
  const auto known = lowered(old_comment);
  Ratio r;
  r.denominator = new_comment.size();
  std::set<std::string> novel;
  for (const auto& s : new_comment.subtokens) {
    auto lower = to_lower(s);
    if (known.contains(lower)) continue;
    if (distinct) {
      novel.insert(std::move(lower));
    } else {
      ++r.numerator;
    }
  }
  if (distinct) r.numerator = novel.size();
  return r;
}

Ratio edit_distance_ratio(const SubTokenSeq& old_comment,
                          const SubTokenSeq& new_comment, bool case_sensitive) {
  return {edit_distance(old_comment, new_comment, case_sensitive),
          old_comment.size()};
}

TargetContext TargetContext::from_sample(const CCSample& sample) {
  TargetContext ctx;
  ctx.old_comment = subtokens_of(sample.old_comment, TextKind::kComment);
  ctx.old_comment_lower = lowered(ctx.old_comment);
  auto old_name = extract_function_name(sample.old_code, sample.language);
  auto new_name = extract_function_name(sample.new_code, sample.language);
  if (!old_name || !new_name || *old_name == *new_name) return ctx;
  ctx.name_changed = true;
  std::set<std::string> kept;
  for (const auto& s : split_identifier(*new_name)) kept.insert(to_lower(s));
  std::set<std::string> removed;
  for (const auto& s : split_identifier(*old_name)) {
    auto lower = to_lower(s);
    if (!kept.contains(lower) && ctx.old_comment_lower.contains(lower)) {
      removed.insert(std::move(lower));
    }
  }
  ctx.removed_in_comment.assign(removed.begin(), removed.end());
  return ctx;
}

std::vector<std::string> surviving_name_subtokens(const TargetContext& ctx,
                                                  const SubTokenSeq& comment) {
  std::vector<std::string> out;
  if (ctx.removed_in_comment.empty()) return out;
  const auto present = lowered(comment);
  for (const auto& r : ctx.removed_in_comment) {
    if (present.contains(r)) out.push_back(r);
  }
  return out;
}

Rule1Result check_rule1(const TargetContext& ctx, std::string_view candidate) {
  Rule1Result r;
  r.evidence = surviving_name_subtokens(
      ctx, subtokens_of(candidate, TextKind::kComment));
  r.violated = !r.evidence.empty();
  return r;
}

RatioCheck check_rule2(const TargetContext& ctx, std::string_view candidate,
                       double sigma, bool distinct) {
  RatioCheck c;
  const auto subs = subtokens_of(candidate, TextKind::kComment);
  c.parts = novel_subtoken_ratio(ctx.old_comment, subs, distinct);
  if (c.parts.denominator == 0) {
    // An empty candidate is never an acceptable update.
    c.ratio = 1.0;
    c.violated = true;
    return c;
  }
  c.ratio = c.parts.value();
  c.violated = !(c.ratio < sigma);
  return c;
}

RatioCheck check_rule3(const TargetContext& ctx, std::string_view candidate,
                       double epsilon, bool case_sensitive) {
  RatioCheck c;
  const auto subs = subtokens_of(candidate, TextKind::kComment);
  c.parts = edit_distance_ratio(ctx.old_comment, subs, case_sensitive);
  if (c.parts.denominator == 0) {
    c.vacuous = true;
    return c;
  }
  c.ratio = c.parts.value();
  c.violated = !(c.ratio < epsilon);
  return c;
}

std::vector<std::vector<size_t>> multi_turn_passes(
    size_t candidate_count, const std::vector<std::vector<bool>>& violations) {
  std::vector<size_t> order(candidate_count);
  std::iota(order.begin(), order.end(), size_t{0});
  std::vector<std::vector<size_t>> passes;
  for (const auto& broken : violations) {
    std::stable_partition(order.begin(), order.end(),
                          [&](size_t i) { return !broken[i]; });
    passes.push_back(order);
  }
  return passes;
}

RerankOutcome rerank(const TargetContext& ctx,
                     const std::vector<std::string>& candidates,
                     const RerankConfig& config) {
  config.validate();
  RerankOutcome out;
  out.diagnostics.resize(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) {
    auto& d = out.diagnostics[i];
    d.rule1 = check_rule1(ctx, candidates[i]);
    d.rule2 = check_rule2(ctx, candidates[i], config.sigma, config.distinct_novel);
    d.rule3 = check_rule3(ctx, candidates[i], config.epsilon,
                          config.case_sensitive_ed);
  }

  std::vector<std::vector<bool>> violations;
  for (int rule : config.rules) {
    std::vector<bool> broken(candidates.size());
    for (size_t i = 0; i < candidates.size(); ++i) {
      const auto& d = out.diagnostics[i];
      broken[i] = rule == 1   ? d.rule1.violated
                  : rule == 2 ? d.rule2.violated
                              : d.rule3.violated;
      if (broken[i]) out.diagnostics[i].violations.push_back(rule);
    }
    violations.push_back(std::move(broken));
  }
  out.passes = multi_turn_passes(candidates.size(), violations);
  if (out.passes.empty()) {
    out.order.resize(candidates.size());
    std::iota(out.order.begin(), out.order.end(), size_t{0});
  } else {
    out.order = out.passes.back();
  }
  return out;
}

nlohmann::json to_json(const CandidateDiagnostics& d) {
  auto ratio = [](const RatioCheck& c) {
    return nlohmann::json{{"violated", c.violated},
                          {"ratio", c.ratio},
                          {"numerator", c.parts.numerator},
                          {"denominator", c.parts.denominator},
                          {"vacuous", c.vacuous}};
  };
  return {{"rule1", {{"violated", d.rule1.violated}, {"evidence", d.rule1.evidence}}},
          {"rule2", ratio(d.rule2)},
          {"rule3", ratio(d.rule3)},
          {"violations", d.violations}};
}

}  // namespace comsync
