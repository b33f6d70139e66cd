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

#include "comsync/retrieval.h"

#include <algorithm>
#include <fstream>
#include <limits>
#include <random>
#include <set>
#include <sstream>
#include <unordered_set>

#include "comsync/errors.h"
#include "comsync/hashing.h"
#include "comsync/parallel.h"

namespace comsync {
namespace {

constexpr std::string_view kIndexFormat = "comsync-index";
constexpr int kIndexVersion = 1;

// Uniform draw in [0, n) from the raw 64-bit engine output. The standard
// distributions are implementation-defined, this is not.
uint64_t bounded(std::mt19937_64& rng, uint64_t n) {
  const uint64_t limit = std::numeric_limits<uint64_t>::max() -
                         std::numeric_limits<uint64_t>::max() % n;
  for (;;) {
    uint64_t x = rng();
    if (x < limit) return x % n;
  }
}

}  // namespace

std::string_view to_string(Strategy s) {
  switch (s) {
    case Strategy::kRandom:
      return "random";
    case Strategy::kExpert:
      return "expert";
    case Strategy::kSemantic:
      return "semantic";
    case Strategy::kEhr:
      return "ehr";
  }
  return "?";
}

std::string_view to_string(Pool p) {
  switch (p) {
    case Pool::kSemantic:
      return "semantic";
    case Pool::kExpert:
      return "expert";
    case Pool::kRandom:
      return "random";
  }
  return "?";
}

Strategy parse_strategy(std::string_view name) {
  for (auto s : {Strategy::kRandom, Strategy::kExpert, Strategy::kSemantic,
                 Strategy::kEhr}) {
    if (to_string(s) == name) return s;
  }
  if (name == "codebert") return Strategy::kSemantic;
  throw ConfigError("unknown retrieval strategy '" + std::string(name) + "'");
}

const IndexEntry* DemonstrationIndex::find(std::string_view id) const {
  auto it = std::lower_bound(
      entries.begin(), entries.end(), id,
      [](const IndexEntry& e, std::string_view key) { return e.id < key; });
  return (it != entries.end() && it->id == id) ? &*it : nullptr;
}

std::string corpus_fingerprint(const std::vector<CCSample>& corpus) {
  std::vector<const CCSample*> sorted;
  for (const auto& s : corpus) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const CCSample* a, const CCSample* b) { return a->id < b->id; });
  std::string canonical;
  for (const auto* s : sorted) {
    canonical += to_json(*s).dump();
    canonical += '\n';
  }
  return sha256_hex(canonical);
}

FeatureVector sample_features(const CCSample& sample) {
  try {
    return featurize(diff_code(sample.old_code, sample.new_code,
                               sample.language),
                     sample.old_comment);
  } catch (const Error& e) {
    throw FeaturizeError(sample.id, e.what());
  }
}

DemonstrationIndex build_index(const std::vector<CCSample>& corpus,
                               const EmbeddingProvider& provider,
                               size_t parallelism) {
  if (corpus.empty()) throw Error("cannot index an empty corpus");
  std::vector<const CCSample*> sorted;
  for (const auto& s : corpus) sorted.push_back(&s);
  std::sort(sorted.begin(), sorted.end(),
            [](const CCSample* a, const CCSample* b) { return a->id < b->id; });
  for (size_t i = 1; i < sorted.size(); ++i) {
    if (sorted[i]->id == sorted[i - 1]->id) {
      throw Error("duplicate sample id '" + sorted[i]->id + "'");
    }
  }

  DemonstrationIndex index;
  index.provider = provider.fingerprint();
  index.corpus_fingerprint = corpus_fingerprint(corpus);
  index.entries.resize(sorted.size());
  parallel_for(sorted.size(), parallelism, [&](size_t i) {
    const CCSample& s = *sorted[i];
    IndexEntry& e = index.entries[i];
    e.id = s.id;
    e.digest = payload_digest(s);
    e.expert = sample_features(s);
    e.semantic = embed_sample(provider, s.old_code, s.old_comment, s.new_code);
  });
  return index;
}

std::string serialize_index(const DemonstrationIndex& index) {
  nlohmann::json header = {{"format", kIndexFormat},
                           {"version", kIndexVersion},
                           {"provider", to_json(index.provider)},
                           {"dimension", index.provider.dimension},
                           {"count", index.entries.size()},
                           {"corpus_fingerprint", index.corpus_fingerprint}};
  std::string out = header.dump();
  out += '\n';
  for (const auto& e : index.entries) {
    nlohmann::json j = {{"id", e.id},
                        {"digest", e.digest},
                        {"semantic", e.semantic.values()},
                        {"expert", to_json(e.expert)}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

DemonstrationIndex parse_index(std::string_view text) {
  std::istringstream in{std::string(text)};
  std::string line;
  if (!std::getline(in, line)) throw IndexFormatError("empty index file");
  DemonstrationIndex index;
  size_t count = 0;
  try {
    auto header = nlohmann::json::parse(line);
    if (header.value("format", "") != kIndexFormat ||
        header.value("version", 0) != kIndexVersion) {
      throw IndexFormatError("not a comsync index (version 1)");
    }
    index.provider = provider_fingerprint_from_json(header.at("provider"));
    index.corpus_fingerprint = header.at("corpus_fingerprint").get<std::string>();
    count = header.at("count").get<size_t>();
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      auto j = nlohmann::json::parse(line);
      IndexEntry e;
      e.id = j.at("id").get<std::string>();
      e.digest = j.at("digest").get<std::string>();
      e.semantic = SemanticVector(j.at("semantic").get<std::vector<double>>());
      e.expert = feature_vector_from_json(j.at("expert"));
      if (e.semantic.dimension() != index.provider.dimension) {
        throw IndexFormatError("entry '" + e.id + "' has dimension " +
                               std::to_string(e.semantic.dimension()));
      }
      if (!index.entries.empty() && !(index.entries.back().id < e.id)) {
        throw IndexFormatError("entries must be sorted by unique id");
      }
      index.entries.push_back(std::move(e));
    }
  } catch (const nlohmann::json::exception& e) {
    throw IndexFormatError(std::string("malformed index: ") + e.what());
  } catch (const SchemaError& e) {
    throw IndexFormatError(std::string("malformed index: ") + e.what());
  }
  if (index.entries.size() != count) {
    throw IndexFormatError("index header announces " + std::to_string(count) +
                           " entries, found " +
                           std::to_string(index.entries.size()));
  }
  return index;
}

void save_index(const std::string& path, const DemonstrationIndex& index) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IndexFormatError("cannot write index '" + path + "'");
  out << serialize_index(index);
}

DemonstrationIndex load_index(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IndexFormatError("cannot open index '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_index(buffer.str());
}

Query make_query(const CCSample& target, const EmbeddingProvider& provider) {
  return {target.id, payload_digest(target),
          embed_sample(provider, target.old_code, target.old_comment,
                       target.new_code),
          sample_features(target)};
}

std::vector<std::string> RetrievalResult::ids() const {
  std::vector<std::string> out;
  for (const auto& d : demos) out.push_back(d.id);
  return out;
}

std::vector<Demo> rank_pool(const DemonstrationIndex& index, const Query& query,
                            Pool pool) {
  std::vector<Demo> ranked;
  ranked.reserve(index.entries.size());
  for (const auto& e : index.entries) {
    if (e.id == query.id || e.digest == query.digest) continue;
    double score = 0.0;
    if (pool == Pool::kSemantic) {
      score = cosine_similarity(query.semantic, e.semantic);
    } else if (pool == Pool::kExpert) {
      score = feature_similarity(query.expert, e.expert);
    }
    ranked.push_back({e.id, pool, score, 0});
  }
  // Entries are id-sorted, so a stable sort leaves ties in ascending id.
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const Demo& a, const Demo& b) { return a.score > b.score; });
  for (size_t i = 0; i < ranked.size(); ++i) ranked[i].rank = i;
  return ranked;
}

RetrievalResult retrieve(const DemonstrationIndex& index, const Query& query,
                         Strategy strategy, size_t shots, uint64_t seed) {
  if (shots < 2) throw ConfigError("shot count must be at least 2");
  if (strategy == Strategy::kEhr && shots % 2 != 0) {
    throw ConfigError("EHR needs an even shot count");
  }
  if (index.entries.empty()) throw PoolTooSmall("demonstration index is empty");

  RetrievalResult result;
  if (strategy == Strategy::kRandom) {
    auto pool = rank_pool(index, query, Pool::kRandom);
    if (pool.size() < shots) {
      throw PoolTooSmall("need " + std::to_string(shots) + " demos, pool has " +
                         std::to_string(pool.size()));
    }
    std::mt19937_64 rng(seed);
    for (size_t i = 0; i < shots; ++i) {
      size_t j = i + static_cast<size_t>(bounded(rng, pool.size() - i));
      std::swap(pool[i], pool[j]);
      pool[i].rank = i;
      result.demos.push_back(pool[i]);
    }
    return result;
  }

  if (strategy == Strategy::kSemantic || strategy == Strategy::kExpert) {
    auto pool = rank_pool(index, query, strategy == Strategy::kSemantic
                                            ? Pool::kSemantic
                                            : Pool::kExpert);
    if (pool.size() < shots) {
      throw PoolTooSmall("need " + std::to_string(shots) + " demos, pool has " +
                         std::to_string(pool.size()));
    }
    pool.resize(shots);
    result.demos = std::move(pool);
    return result;
  }

  const auto semantic = rank_pool(index, query, Pool::kSemantic);
  if (semantic.size() < shots) {
    throw PoolTooSmall("need " + std::to_string(shots) + " demos, pool has " +
                       std::to_string(semantic.size()));
  }
  const auto expert = rank_pool(index, query, Pool::kExpert);
  const size_t half = shots / 2;
  std::unordered_set<std::string> taken;
  for (size_t i = 0; i < half; ++i) {
    taken.insert(semantic[i].id);
    result.demos.push_back(semantic[i]);
  }
  for (size_t i = 0; i < half; ++i) {
    if (taken.insert(expert[i].id).second) result.demos.push_back(expert[i]);
  }
  for (size_t i = half; i < semantic.size() && result.demos.size() < shots;
       ++i) {
    if (taken.insert(semantic[i].id).second) result.demos.push_back(semantic[i]);
  }
  return result;
}

nlohmann::json to_json(const RetrievalResult& result) {
  nlohmann::json demos = nlohmann::json::array();
  for (const auto& d : result.demos) {
    demos.push_back({{"id", d.id},
                     {"pool", std::string(to_string(d.pool))},
                     {"score", d.score},
                     {"rank", d.rank}});
  }
  return demos;
}

}  // namespace comsync
