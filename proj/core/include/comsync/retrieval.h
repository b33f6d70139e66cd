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

#ifndef COMSYNC_RETRIEVAL_H_
#define COMSYNC_RETRIEVAL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "comsync/embeddings.h"
#include "comsync/expert_features.h"
#include "comsync/sample.h"

namespace comsync {

enum class Strategy { kRandom, kExpert, kSemantic, kEhr };
enum class Pool { kSemantic, kExpert, kRandom };

std::string_view to_string(Strategy s);
std::string_view to_string(Pool p);
// Throws ConfigError on unknown names.
Strategy parse_strategy(std::string_view name);

struct IndexEntry {
  std::string id;
  std::string digest;  // payload_digest() of the sample
  SemanticVector semantic;
  FeatureVector expert;
};

// Dual demonstration pool. Entries are sorted by id and immutable once
// built, so concurrent queries are safe.
struct DemonstrationIndex {
  ProviderFingerprint provider;
  std::string corpus_fingerprint;
  std::vector<IndexEntry> entries;

  size_t size() const { return entries.size(); }
  // nullptr when absent.
  const IndexEntry* find(std::string_view id) const;
};

// Hex SHA-256 of the corpus sorted by id, one compact JSON record per line
// (each terminated by '\n').
std::string corpus_fingerprint(const std::vector<CCSample>& corpus);

// Expert features of one sample; wraps FeaturizeError around failures.
FeatureVector sample_features(const CCSample& sample);

// Throws EmbeddingError from the provider, FeaturizeError naming the sample,
// or Error for an empty corpus or duplicate ids.
DemonstrationIndex build_index(const std::vector<CCSample>& corpus,
                               const EmbeddingProvider& provider,
                               size_t parallelism = 1);

// File format: a JSON header line {"format", "version", "provider",
// "dimension", "count", "corpus_fingerprint"} followed by one JSON entry per
// line {"id", "digest", "semantic": [...], "expert": {...}}.
std::string serialize_index(const DemonstrationIndex& index);
DemonstrationIndex parse_index(std::string_view text);
void save_index(const std::string& path, const DemonstrationIndex& index);
DemonstrationIndex load_index(const std::string& path);

struct Query {
  std::string id;
  std::string digest;
  SemanticVector semantic;
  FeatureVector expert;
};

Query make_query(const CCSample& target, const EmbeddingProvider& provider);

struct Demo {
  std::string id;
  Pool pool = Pool::kSemantic;
  double score = 0.0;
  size_t rank = 0;  // 0-based rank inside its pool
};

struct RetrievalResult {
  std::vector<Demo> demos;
  std::vector<std::string> ids() const;
};

// Entries other than the query itself (by id or by identical payload),
// sorted by descending similarity then ascending id.
std::vector<Demo> rank_pool(const DemonstrationIndex& index, const Query& query,
                            Pool pool);

// `shots` must be >= 2, and even for kEhr. EHR takes the top shots/2 of the
// semantic pool, then the top shots/2 of the expert pool skipping demos
// already taken, then backfills from the semantic ranking. Throws
// PoolTooSmall when fewer than `shots` eligible demos exist.
RetrievalResult retrieve(const DemonstrationIndex& index, const Query& query,
                         Strategy strategy, size_t shots, uint64_t seed);

nlohmann::json to_json(const RetrievalResult& result);

}  // namespace comsync

#endif  // COMSYNC_RETRIEVAL_H_
