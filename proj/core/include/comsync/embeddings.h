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

#ifndef COMSYNC_EMBEDDINGS_H_
#define COMSYNC_EMBEDDINGS_H_

#include <chrono>
#include <cstdint>
#include <memory>
#include <optional>
#include <semaphore>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace comsync {

// A dense vector with its Euclidean norm cached at construction.
class SemanticVector {
 public:
  SemanticVector() = default;
  explicit SemanticVector(std::vector<double> values);
  static SemanticVector zeros(size_t dimension);

  const std::vector<double>& values() const { return values_; }
  size_t dimension() const { return values_.size(); }
  double norm() const { return norm_; }
  bool is_zero() const { return norm_ == 0.0; }

  SemanticVector& operator+=(const SemanticVector& other);
  SemanticVector scaled(double factor) const;
  SemanticVector normalized() const;

  bool operator==(const SemanticVector& o) const { return values_ == o.values_; }

 private:
  std::vector<double> values_;
  double norm_ = 0.0;
};

// Cosine similarity; a zero vector is similar (1.0) only to another zero
// vector and 0.0 to everything else.
double cosine_similarity(const SemanticVector& a, const SemanticVector& b);

enum class EmbeddingKind { kFallback, kRemote };

struct EmbeddingConfig {
  EmbeddingKind kind = EmbeddingKind::kFallback;
  std::string endpoint;  // base URL of the /embed service (remote only)
  size_t dimension = 256;
  std::chrono::milliseconds timeout{30000};
  size_t max_input_tokens = 512;  // prefix kept, counted in sub-tokens
  bool normalize_inputs = false;  // L2-normalize each input before summing
  uint64_t hash_seed = 0;
  size_t parallelism = 4;  // concurrent remote requests
};

// Identifies which embedding space an index lives in.
struct ProviderFingerprint {
  std::string kind;
  size_t dimension = 0;
  uint64_t hash_seed = 0;
  bool operator==(const ProviderFingerprint&) const = default;
};

class EmbeddingProvider {
 public:
  virtual ~EmbeddingProvider() = default;

  // One vector per input, each of dimension(). Inputs are already
  // normalized and non-empty.
  virtual std::vector<SemanticVector> embed_batch(
      std::span<const std::string> texts) const = 0;

  virtual size_t dimension() const = 0;
  virtual ProviderFingerprint fingerprint() const = 0;
  virtual size_t max_input_tokens() const = 0;
  virtual bool normalize_inputs() const { return false; }
};

// Hashed bag of sub-tokens: each sub-token of the text is hashed with
// FNV-1a 64 (seeded via the offset basis) and counted in bucket
// hash % dimension; the term-frequency vector is then L2-normalized.
// Sub-tokens are case-folded before hashing.
class HashingEmbedder : public EmbeddingProvider {
 public:
  explicit HashingEmbedder(size_t dimension = 256, uint64_t seed = 0,
                           size_t max_input_tokens = 512);

  std::vector<SemanticVector> embed_batch(
      std::span<const std::string> texts) const override;
  size_t dimension() const override { return dimension_; }
  ProviderFingerprint fingerprint() const override;
  size_t max_input_tokens() const override { return max_input_tokens_; }

 private:
  size_t dimension_;
  uint64_t seed_;
  size_t max_input_tokens_;
};

// Client for an HTTP encoder service:
//   POST {endpoint}/embed  {"texts": [...]}
//   -> {"vectors": [[...], ...], "dimension": N}
// Throws ProviderUnavailable on transport failure or non-200 status and
// DimensionMismatch when the service disagrees with the configured size.
class RemoteEmbedder : public EmbeddingProvider {
 public:
  explicit RemoteEmbedder(EmbeddingConfig config);

  std::vector<SemanticVector> embed_batch(
      std::span<const std::string> texts) const override;
  size_t dimension() const override { return config_.dimension; }
  ProviderFingerprint fingerprint() const override;
  size_t max_input_tokens() const override { return config_.max_input_tokens; }
  bool normalize_inputs() const override { return config_.normalize_inputs; }

 private:
  EmbeddingConfig config_;
  mutable std::counting_semaphore<64> slots_;
};

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingConfig& config);

// Trims whitespace and keeps the prefix covering the first `max_sub_tokens`
// sub-tokens.
std::string truncate_to_subtokens(std::string_view text, size_t max_sub_tokens);

// Empty text (after normalization) maps to the zero vector without a call
// to the provider.
SemanticVector embed_text(const EmbeddingProvider& provider,
                          std::string_view text);

// Sum of the per-input vectors for old code, old comment and new code. The
// sum is not re-normalized.
SemanticVector embed_sample(const EmbeddingProvider& provider,
                            std::string_view old_code,
                            std::string_view old_comment,
                            std::string_view new_code);

nlohmann::json to_json(const ProviderFingerprint& fp);
ProviderFingerprint provider_fingerprint_from_json(const nlohmann::json& j);

}  // namespace comsync

#endif  // COMSYNC_EMBEDDINGS_H_
