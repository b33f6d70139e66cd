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

#include "comsync/expert_features.h"

#include <cmath>
#include <set>
#include <string>

#include "comsync/errors.h"

namespace comsync {
namespace {

bool has_alnum(const std::string& s) {
  for (unsigned char c : s) {
    if (std::isalnum(c) || c >= 0x80) return true;
  }
  return false;
}

std::set<std::string> lowered_words(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    if (has_alnum(t)) out.insert(to_lower(t));
  }
  return out;
}

std::set<std::string> lowered_subtokens(const std::vector<std::string>& tokens) {
  std::set<std::string> out;
  for (const auto& t : tokens) {
    for (const auto& s : split_identifier(t)) out.insert(to_lower(s));
  }
  return out;
}

// |{w in comment : w in before, w not in after}|
uint64_t count_disappearing(const std::set<std::string>& comment,
                            const std::set<std::string>& before,
                            const std::set<std::string>& after) {
  uint64_t n = 0;
  for (const auto& w : comment) {
    if (before.contains(w) && !after.contains(w)) ++n;
  }
  return n;
}

}  // namespace

std::array<double, FeatureVector::kEncodedDims> FeatureVector::encode() const {
  std::array<double, kEncodedDims> out{};
  const uint64_t counts[kCountDims] = {nms,   nmt,   nml,  nmc,
                                       nntrp, nnsrp, ntod, nsod};
  for (size_t i = 0; i < kCountDims; ++i) {
    out[i] = static_cast<double>(counts[i]);
  }
  for (size_t block = 0; block < 3; ++block) {
    out[kCountDims + block * kStatementTypeCount +
        static_cast<size_t>(ts[block])] = 1.0;
  }
  return out;
}

FeatureVector featurize(const CodeChange& change,
                        std::string_view old_comment) {
  FeatureVector v;
  v.nms = change.modified_sub_tokens;
  v.nmt = change.modified_tokens;
  v.nml = change.modified_lines;
  v.nmc = change.modified_chunks;
  v.nntrp = change.token_replacements.size();
  v.nnsrp = change.subtoken_replacements.size();
  v.ts = change.changed_statement_types;

  const auto comment_tokens = tokenize(old_comment, TextKind::kComment).texts();
  v.ntod = count_disappearing(lowered_words(comment_tokens),
                              lowered_words(change.old_changed_tokens),
                              lowered_words(change.new_changed_tokens));
  v.nsod = count_disappearing(lowered_subtokens(comment_tokens),
                              lowered_subtokens(change.old_changed_tokens),
                              lowered_subtokens(change.new_changed_tokens));
  return v;
}

double feature_similarity(const FeatureVector& a, const FeatureVector& b) {
  const auto x = a.encode();
  const auto y = b.encode();
  double dot = 0.0, xx = 0.0, yy = 0.0;
  for (size_t i = 0; i < x.size(); ++i) {
    dot += x[i] * y[i];
    xx += x[i] * x[i];
    yy += y[i] * y[i];
  }
  if (xx == 0.0 || yy == 0.0) return (xx == 0.0 && yy == 0.0) ? 1.0 : 0.0;
  return dot / (std::sqrt(xx) * std::sqrt(yy));
}

nlohmann::json to_json(const FeatureVector& v) {
  return {{"nms", v.nms},
          {"nmt", v.nmt},
          {"nml", v.nml},
          {"nmc", v.nmc},
          {"nntrp", v.nntrp},
          {"nnsrp", v.nnsrp},
          {"ntod", v.ntod},
          {"nsod", v.nsod},
          {"ts",
           {std::string(to_string(v.ts[0])), std::string(to_string(v.ts[1])),
            std::string(to_string(v.ts[2]))}}};
}

FeatureVector feature_vector_from_json(const nlohmann::json& j) {
  try {
    FeatureVector v;
    v.nms = j.at("nms").get<uint64_t>();
    v.nmt = j.at("nmt").get<uint64_t>();
    v.nml = j.at("nml").get<uint64_t>();
    v.nmc = j.at("nmc").get<uint64_t>();
    v.nntrp = j.at("nntrp").get<uint64_t>();
    v.nnsrp = j.at("nnsrp").get<uint64_t>();
    v.ntod = j.at("ntod").get<uint64_t>();
    v.nsod = j.at("nsod").get<uint64_t>();
    const auto& ts = j.at("ts");
    if (!ts.is_array() || ts.size() != 3) {
      throw SchemaError("'ts' must hold three statement types");
    }
    for (size_t i = 0; i < 3; ++i) {
      v.ts[i] = parse_statement_type(ts[i].get<std::string>());
    }
    return v;
  } catch (const nlohmann::json::exception& e) {
    throw SchemaError(std::string("bad feature vector: ") + e.what());
  }
}

}  // namespace comsync
