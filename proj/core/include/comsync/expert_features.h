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

#ifndef COMSYNC_EXPERT_FEATURES_H_
#define COMSYNC_EXPERT_FEATURES_H_

#include <array>
#include <cstdint>
#include <string_view>

#include <nlohmann/json.hpp>

#include "comsync/change_analysis.h"
#include "comsync/text_units.h"

namespace comsync {

// Eleven change-pattern features: eight counts describing the complexity of
// the code change and its overlap with the old comment, plus the statement
// types of the first three changed tokens.
struct FeatureVector {
  uint64_t nms = 0;    // modified sub-tokens
  uint64_t nmt = 0;    // modified tokens
  uint64_t nml = 0;    // modified lines
  uint64_t nmc = 0;    // modified chunks
  uint64_t nntrp = 0;  // distinct token replacement pairs
  uint64_t nnsrp = 0;  // distinct sub-token replacement pairs
  uint64_t ntod = 0;   // comment tokens that disappear with the change
  uint64_t nsod = 0;   // comment sub-tokens that disappear with the change
  std::array<StatementType, 3> ts{StatementType::kNone, StatementType::kNone,
                                  StatementType::kNone};

  static constexpr size_t kCountDims = 8;
  static constexpr size_t kEncodedDims = kCountDims + 3 * kStatementTypeCount;

  // Raw counts followed by three one-hot statement-type blocks.
  std::array<double, kEncodedDims> encode() const;

  bool operator==(const FeatureVector&) const = default;
};

// `old_comment` is the old comment text; it is tokenized as a comment.
FeatureVector featurize(const CodeChange& change, std::string_view old_comment);

// Cosine similarity of the encoded vectors. When either encoding is all
// zero the result is 1 if both are, otherwise 0.
double feature_similarity(const FeatureVector& a, const FeatureVector& b);

nlohmann::json to_json(const FeatureVector& v);
FeatureVector feature_vector_from_json(const nlohmann::json& j);

}  // namespace comsync

#endif  // COMSYNC_EXPERT_FEATURES_H_
