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

#include <atomic>
#include <cmath>
#include <mutex>
#include <string>
#include <vector>

#include <gtest/gtest.h>
#include <httplib.h>
#include <nlohmann/json.hpp>

#include "comsync/errors.h"
#include "support/support.h"

namespace comsync {
namespace {

using testing_support::LocalServer;

TEST(SemanticVectorTest, NormAndCosine) {
  SemanticVector a({3.0, 4.0});
  EXPECT_DOUBLE_EQ(a.norm(), 5.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, a), 1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, SemanticVector({-4.0, 3.0})), 0.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(SemanticVector::zeros(2), SemanticVector::zeros(2)),
                   1.0);
  EXPECT_DOUBLE_EQ(cosine_similarity(a, SemanticVector::zeros(2)), 0.0);
}

TEST(HashingEmbedderTest, EmptyTextIsZeroVector) {
  HashingEmbedder e(64);
  auto v = embed_text(e, "   ");
  EXPECT_EQ(v.dimension(), 64u);
  EXPECT_TRUE(v.is_zero());
}

TEST(HashingEmbedderTest, DeterministicAndUnitLength) {
  HashingEmbedder e(128, 17);
  auto a = embed_text(e, "Returns the conversation panel.");
  auto b = embed_text(e, "Returns the conversation panel.");
  EXPECT_EQ(a, b);
  EXPECT_NEAR(a.norm(), 1.0, 1e-12);
}

TEST(HashingEmbedderTest, BagOfSubTokens) {
  HashingEmbedder e(256);
  auto a = embed_text(e, "getConversationPanel");
  auto b = embed_text(e, "panel conversation GET");
  EXPECT_NEAR(cosine_similarity(a, b), 1.0, 1e-12);
}

TEST(HashingEmbedderTest, SeedChangesSpace) {
  HashingEmbedder a(256, 0), b(256, 1);
  EXPECT_NE(embed_text(a, "close the stream"), embed_text(b, "close the stream"));
  EXPECT_NE(a.fingerprint(), b.fingerprint());
}

TEST(EmbedSampleTest, SumOfParts) {
  HashingEmbedder e(64);
  auto total = embed_sample(e, "int f() {}", "Returns f.", "int g() {}");
  auto parts = embed_text(e, "int f() {}");
  parts += embed_text(e, "Returns f.");
  parts += embed_text(e, "int g() {}");
  ASSERT_EQ(total.dimension(), parts.dimension());
  for (size_t i = 0; i < total.dimension(); ++i) {
    EXPECT_NEAR(total.values()[i], parts.values()[i], 1e-12);
  }
}

TEST(TruncateTest, KeepsSubTokenPrefix) {
  EXPECT_EQ(truncate_to_subtokens("  getFooBar baz qux ", 3), "getFooBar");
  EXPECT_EQ(truncate_to_subtokens("a b c", 10), "a b c");
  EXPECT_EQ(truncate_to_subtokens("a b c", 2), "a b");
}

TEST(FingerprintTest, JsonRoundTrip) {
  ProviderFingerprint fp{"fallback", 256, 9};
  EXPECT_EQ(provider_fingerprint_from_json(to_json(fp)), fp);
}

// Fake encoder: each text maps to (length, 1, 0, ...).
void serve_embed(httplib::Server& s, size_t dim, std::atomic<int>* calls,
                 std::vector<size_t>* batch_sizes, std::mutex* mu) {
  s.Post("/embed", [=](const httplib::Request& req, httplib::Response& res) {
    ++*calls;
    auto body = nlohmann::json::parse(req.body);
    nlohmann::json vectors = nlohmann::json::array();
    for (const auto& t : body.at("texts")) {
      std::vector<double> v(dim, 0.0);
      v[0] = static_cast<double>(t.get<std::string>().size());
      if (dim > 1) v[1] = 1.0;
      vectors.push_back(v);
    }
    {
      std::lock_guard lock(*mu);
      batch_sizes->push_back(body.at("texts").size());
    }
    res.set_content(nlohmann::json{{"vectors", vectors}, {"dimension", dim}}.dump(),
                    "application/json");
  });
}

TEST(RemoteEmbedderTest, PostsTextsAndChunks) {
  std::atomic<int> calls{0};
  std::vector<size_t> sizes;
  std::mutex mu;
  LocalServer server([&](httplib::Server& s) { serve_embed(s, 4, &calls, &sizes, &mu); });

  EmbeddingConfig cfg;
  cfg.kind = EmbeddingKind::kRemote;
  cfg.endpoint = server.url();
  cfg.dimension = 4;
  cfg.parallelism = 2;
  RemoteEmbedder e(cfg);

  std::vector<std::string> texts;
  for (int i = 0; i < 70; ++i) texts.push_back(std::string(i + 1, 'x'));
  auto out = e.embed_batch(texts);
  ASSERT_EQ(out.size(), 70u);
  for (size_t i = 0; i < out.size(); ++i) {
    EXPECT_DOUBLE_EQ(out[i].values()[0], static_cast<double>(i + 1));
  }
  EXPECT_EQ(calls.load(), 3);
  std::sort(sizes.begin(), sizes.end());
  EXPECT_EQ(sizes, (std::vector<size_t>{6, 32, 32}));
}

TEST(RemoteEmbedderTest, ServerErrorIsUnavailable) {
  LocalServer server([](httplib::Server& s) {
    s.Post("/embed", [](const httplib::Request&, httplib::Response& res) {
      res.status = 500;
    });
  });
  EmbeddingConfig cfg;
  cfg.kind = EmbeddingKind::kRemote;
  cfg.endpoint = server.url();
  RemoteEmbedder e(cfg);
  std::vector<std::string> texts{"a"};
  EXPECT_THROW(e.embed_batch(texts), ProviderUnavailable);
}

TEST(RemoteEmbedderTest, WrongDimension) {
  std::atomic<int> calls{0};
  std::vector<size_t> sizes;
  std::mutex mu;
  LocalServer server([&](httplib::Server& s) { serve_embed(s, 3, &calls, &sizes, &mu); });
  EmbeddingConfig cfg;
  cfg.kind = EmbeddingKind::kRemote;
  cfg.endpoint = server.url();
  cfg.dimension = 8;
  RemoteEmbedder e(cfg);
  std::vector<std::string> texts{"a", "b"};
  EXPECT_THROW(e.embed_batch(texts), DimensionMismatch);
}

TEST(RemoteEmbedderTest, UnreachableEndpoint) {
  int port = 0;
  {
    LocalServer probe([](httplib::Server&) {});
    port = probe.port();
  }
  EmbeddingConfig cfg;
  cfg.kind = EmbeddingKind::kRemote;
  cfg.endpoint = "http://127.0.0.1:" + std::to_string(port);
  cfg.timeout = std::chrono::milliseconds(2000);
  RemoteEmbedder e(cfg);
  std::vector<std::string> texts{"a"};
  EXPECT_THROW(e.embed_batch(texts), ProviderUnavailable);
}

TEST(RemoteEmbedderTest, NormalizesInputsWhenAsked) {
  std::atomic<int> calls{0};
  std::vector<size_t> sizes;
  std::mutex mu;
  LocalServer server([&](httplib::Server& s) { serve_embed(s, 2, &calls, &sizes, &mu); });
  EmbeddingConfig cfg;
  cfg.kind = EmbeddingKind::kRemote;
  cfg.endpoint = server.url();
  cfg.dimension = 2;
  cfg.normalize_inputs = true;
  auto provider = make_embedding_provider(cfg);
  auto v = embed_text(*provider, "abc");
  EXPECT_NEAR(v.norm(), 1.0, 1e-12);
  EXPECT_NEAR(v.values()[0], 3.0 / std::sqrt(10.0), 1e-12);
}

}  // namespace
}  // namespace comsync
