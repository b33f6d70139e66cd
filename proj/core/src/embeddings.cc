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

#include "comsync/embeddings.h"

#include <httplib.h>

#include <algorithm>
#include <cmath>

#include "comsync/errors.h"
#include "comsync/hashing.h"
#include "comsync/text_units.h"
#include "http_util.h"

namespace comsync {
namespace {

constexpr size_t kRemoteChunk = 32;

double l2(const std::vector<double>& v) {
  double sum = 0.0;
  for (double x : v) sum += x * x;
  return std::sqrt(sum);
}

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(b, e - b + 1);
}

}  // namespace

SemanticVector::SemanticVector(std::vector<double> values)
    : values_(std::move(values)), norm_(l2(values_)) {}

SemanticVector SemanticVector::zeros(size_t dimension) {
  return SemanticVector(std::vector<double>(dimension, 0.0));
}

SemanticVector& SemanticVector::operator+=(const SemanticVector& other) {
  if (other.dimension() != dimension()) {
    throw DimensionMismatch("cannot add vectors of dimension " +
                            std::to_string(dimension()) + " and " +
                            std::to_string(other.dimension()));
  }
  for (size_t i = 0; i < values_.size(); ++i) values_[i] += other.values_[i];
  norm_ = l2(values_);
  return *this;
}

SemanticVector SemanticVector::scaled(double factor) const {
  std::vector<double> out(values_);
  for (double& x : out) x *= factor;
  return SemanticVector(std::move(out));
}

SemanticVector SemanticVector::normalized() const {
  return is_zero() ? *this : scaled(1.0 / norm_);
}

double cosine_similarity(const SemanticVector& a, const SemanticVector& b) {
  if (a.is_zero() || b.is_zero()) {
    return (a.is_zero() && b.is_zero()) ? 1.0 : 0.0;
  }
  if (a.dimension() != b.dimension()) {
    throw DimensionMismatch("cosine over vectors of different dimension");
  }
  double dot = 0.0;
  for (size_t i = 0; i < a.dimension(); ++i) {
    dot += a.values()[i] * b.values()[i];
  }
  return dot / (a.norm() * b.norm());
}

HashingEmbedder::HashingEmbedder(size_t dimension, uint64_t seed,
                                 size_t max_input_tokens)
    : dimension_(dimension), seed_(seed), max_input_tokens_(max_input_tokens) {
  if (dimension_ == 0) throw EmbeddingError("dimension must be positive");
}

std::vector<SemanticVector> HashingEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  std::vector<SemanticVector> out;
  out.reserve(texts.size());
  for (const auto& text : texts) {
    std::vector<double> counts(dimension_, 0.0);
    const auto subs = subtokens_of(text, TextKind::kCode);
    const size_t n = std::min(subs.size(), max_input_tokens_);
    for (size_t i = 0; i < n; ++i) {
      counts[fnv1a64(to_lower(subs.subtokens[i]), seed_) % dimension_] += 1.0;
    }
    out.push_back(SemanticVector(std::move(counts)).normalized());
  }
  return out;
}

ProviderFingerprint HashingEmbedder::fingerprint() const {
  return {"fallback", dimension_, seed_};
}

RemoteEmbedder::RemoteEmbedder(EmbeddingConfig config)
    : config_(std::move(config)),
      slots_(static_cast<std::ptrdiff_t>(
          std::clamp<size_t>(config_.parallelism, 1, 64))) {
  if (config_.endpoint.empty()) {
    throw EmbeddingError("remote embedder needs an endpoint");
  }
  if (config_.dimension == 0) throw EmbeddingError("dimension must be positive");
}

ProviderFingerprint RemoteEmbedder::fingerprint() const {
  return {"remote:" + config_.endpoint, config_.dimension, 0};
}

std::vector<SemanticVector> RemoteEmbedder::embed_batch(
    std::span<const std::string> texts) const {
  const auto url = internal::split_url(config_.endpoint);
  std::vector<SemanticVector> out;
  out.reserve(texts.size());
  for (size_t begin = 0; begin < texts.size(); begin += kRemoteChunk) {
    const auto chunk = texts.subspan(begin, std::min(kRemoteChunk,
                                                     texts.size() - begin));
    nlohmann::json body = {{"texts", nlohmann::json::array()}};
    for (const auto& t : chunk) body["texts"].push_back(t);

    httplib::Result res;
    {
      slots_.acquire();
      struct Release {
        std::counting_semaphore<64>& s;
        ~Release() { s.release(); }
      } release{slots_};
      httplib::Client client(url.origin);
      auto secs = std::chrono::duration_cast<std::chrono::seconds>(
          config_.timeout);
      auto usecs = std::chrono::duration_cast<std::chrono::microseconds>(
          config_.timeout - secs);
      client.set_connection_timeout(secs.count(), usecs.count());
      client.set_read_timeout(secs.count(), usecs.count());
      client.set_write_timeout(secs.count(), usecs.count());
      res = client.Post(url.path + "/embed", body.dump(), "application/json");
    }
    if (!res) {
      throw ProviderUnavailable("embedding endpoint " + config_.endpoint +
                                ": " + httplib::to_string(res.error()));
    }
    if (res->status != 200) {
      throw ProviderUnavailable("embedding endpoint returned HTTP " +
                                std::to_string(res->status));
    }
    nlohmann::json reply;
    try {
      reply = nlohmann::json::parse(res->body);
    } catch (const nlohmann::json::exception& e) {
      throw EmbeddingError(std::string("malformed /embed response: ") +
                           e.what());
    }
    const auto& vectors = reply.value("vectors", nlohmann::json::array());
    if (reply.contains("dimension") &&
        reply["dimension"].get<size_t>() != config_.dimension) {
      throw DimensionMismatch(
          "service dimension " + std::to_string(reply["dimension"].get<size_t>()) +
          " != configured " + std::to_string(config_.dimension));
    }
    if (!vectors.is_array() || vectors.size() != chunk.size()) {
      throw EmbeddingError("expected " + std::to_string(chunk.size()) +
                           " vectors from /embed");
    }
    for (const auto& v : vectors) {
      auto values = v.get<std::vector<double>>();
      if (values.size() != config_.dimension) {
        throw DimensionMismatch("vector of length " +
                                std::to_string(values.size()) +
                                " != configured " +
                                std::to_string(config_.dimension));
      }
      out.emplace_back(std::move(values));
    }
  }
  return out;
}

std::unique_ptr<EmbeddingProvider> make_embedding_provider(
    const EmbeddingConfig& config) {
  if (config.kind == EmbeddingKind::kRemote) {
    return std::make_unique<RemoteEmbedder>(config);
  }
  return std::make_unique<HashingEmbedder>(config.dimension, config.hash_seed,
                                           config.max_input_tokens);
}

std::string truncate_to_subtokens(std::string_view text,
                                  size_t max_sub_tokens) {
  text = trim(text);
  const auto tokens = tokenize(text, TextKind::kCode);
  const auto subs = split_subtokens(tokens);
  if (subs.size() <= max_sub_tokens) return std::string(text);
  // Cut before the token holding the first sub-token past the limit.
  const size_t cut = tokens.tokens[subs.parent[max_sub_tokens]].offset;
  return std::string(trim(text.substr(0, cut)));
}

SemanticVector embed_text(const EmbeddingProvider& provider,
                          std::string_view text) {
  std::string normalized =
      truncate_to_subtokens(text, provider.max_input_tokens());
  if (normalized.empty()) return SemanticVector::zeros(provider.dimension());
  auto vectors = provider.embed_batch(std::span<const std::string>(&normalized, 1));
  if (vectors.size() != 1 || vectors[0].dimension() != provider.dimension()) {
    throw DimensionMismatch("provider returned an unexpected vector shape");
  }
  return provider.normalize_inputs() ? vectors[0].normalized() : vectors[0];
}

SemanticVector embed_sample(const EmbeddingProvider& provider,
                            std::string_view old_code,
                            std::string_view old_comment,
                            std::string_view new_code) {
  const std::string_view inputs[] = {old_code, old_comment, new_code};
  std::vector<std::string> texts;
  std::vector<size_t> slots;
  for (size_t i = 0; i < 3; ++i) {
    auto t = truncate_to_subtokens(inputs[i], provider.max_input_tokens());
    if (!t.empty()) {
      texts.push_back(std::move(t));
      slots.push_back(i);
    }
  }
  SemanticVector sum = SemanticVector::zeros(provider.dimension());
  if (texts.empty()) return sum;
  auto vectors = provider.embed_batch(texts);
  if (vectors.size() != texts.size()) {
    throw EmbeddingError("provider returned the wrong number of vectors");
  }
  for (auto& v : vectors) {
    if (v.dimension() != provider.dimension()) {
      throw DimensionMismatch("provider returned a vector of length " +
                              std::to_string(v.dimension()));
    }
    sum += provider.normalize_inputs() ? v.normalized() : v;
  }
  return sum;
}

nlohmann::json to_json(const ProviderFingerprint& fp) {
  return {{"kind", fp.kind},
          {"dimension", fp.dimension},
          {"hash_seed", fp.hash_seed}};
}

ProviderFingerprint provider_fingerprint_from_json(const nlohmann::json& j) {
  try {
    return {j.at("kind").get<std::string>(), j.at("dimension").get<size_t>(),
            j.at("hash_seed").get<uint64_t>()};
  } catch (const nlohmann::json::exception& e) {
    throw IndexFormatError(std::string("bad provider fingerprint: ") +
                           e.what());
  }
}

}  // namespace comsync
