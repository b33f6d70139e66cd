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

#ifndef COMSYNC_LLM_GATEWAY_H_
#define COMSYNC_LLM_GATEWAY_H_

#include <atomic>
#include <chrono>
#include <cstdint>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "comsync/prompting.h"

namespace comsync {

struct SamplingConfig {
  double temperature = 0.8;
  double top_p = 0.95;
  int sampling_number = 10;
  int max_output_tokens = 128;

  // Throws ConfigError when a field is out of range.
  void validate() const;
};

struct Usage {
  uint64_t input_tokens = 0;
  uint64_t output_tokens = 0;

  Usage& operator+=(const Usage& o) {
    input_tokens += o.input_tokens;
    output_tokens += o.output_tokens;
    return *this;
  }
  bool operator==(const Usage&) const = default;
};

struct Prices {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

double cost_of(const Usage& usage, const Prices& prices);

// Thread-safe record of every request's token usage.
class TokenLedger {
 public:
  struct Entry {
    std::string label;
    Usage usage;
  };

  void record(std::string label, const Usage& usage);
  Usage total() const;
  // Sorted by label, so the listing does not depend on completion order.
  std::vector<Entry> entries() const;
  size_t request_count() const;
  double cost(const Prices& prices) const { return cost_of(total(), prices); }
  nlohmann::json snapshot(const std::optional<Prices>& prices) const;

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
  Usage total_;
};

struct CleaningConfig {
  bool strip_fences = true;     // ```lang ... ``` wrappers
  bool strip_labels = true;     // "New comment:" and similar prefixes
  bool first_line_only = false; // keep the first non-empty line
};

std::string clean_completion(std::string_view raw, const CleaningConfig& config);

struct Candidate {
  std::string raw;
  std::string text;  // cleaned
  size_t generation_index = 0;
};

// Provider order with duplicates (after cleaning) removed, first kept.
struct CandidateSet {
  std::string target_id;
  std::vector<Candidate> candidates;
  Usage usage;
  size_t requests = 0;

  std::vector<std::string> texts() const;
};

struct ChatRequest {
  std::string model;
  std::string system;
  std::string user;
  double temperature = 0.8;
  double top_p = 0.95;
  int n = 1;
  int max_tokens = 128;
  // Not sent on the wire; lets scripted providers tell requests apart.
  std::string target_id;
  int sample_index = 0;
  uint64_t seed = 0;
};

struct ChatResponse {
  std::vector<std::string> completions;
  Usage usage;
  int retries = 0;
};

class ChatProvider {
 public:
  virtual ~ChatProvider() = default;
  // Throws ProviderError.
  virtual ChatResponse complete(const ChatRequest& request) const = 0;
  // Whether one request may ask for several completions (the `n` field).
  virtual bool supports_n() const = 0;
};

struct OpenAIConfig {
  std::string base_url = "https://api.openai.com/v1";
  std::string model = "gpt-3.5-turbo";
  std::string api_key_env = "OPENAI_API_KEY";
  bool supports_n = true;
  int max_retries = 3;
  std::chrono::milliseconds initial_backoff{500};
  std::chrono::milliseconds timeout{120000};
};

// OpenAI-compatible POST {base_url}/chat/completions. Transport failures and
// HTTP 408/429/5xx are retried with exponential backoff.
class OpenAIChatProvider : public ChatProvider {
 public:
  explicit OpenAIChatProvider(OpenAIConfig config);

  ChatResponse complete(const ChatRequest& request) const override;
  bool supports_n() const override { return config_.supports_n; }

  static nlohmann::json request_body(const ChatRequest& request);
  // Throws ProviderError on a malformed body.
  static ChatResponse parse_response(const nlohmann::json& body);

 private:
  OpenAIConfig config_;
};

// Scripted provider for tests and offline runs. Lookup order for a request:
// prompt digest, target id, default script, then the synthesizer.
//
// Fixture file:
//   {"supports_n": true,
//    "prompts": {"<digest>": SCRIPT}, "targets": {"<id>": SCRIPT},
//    "default": SCRIPT}
//   SCRIPT = {"completions": [...], "usage": {"input": N, "output": M},
//             "error": "message"}
//
// With n > 1 the first n scripted completions are returned; with n == 1
// completion[sample_index % size] is returned. Without scripted usage, the
// input count is the number of whitespace-separated words in the prompt and
// the output count the number in the completions.
class MockChatProvider : public ChatProvider {
 public:
  struct Script {
    std::vector<std::string> completions;
    std::optional<Usage> usage;
    std::optional<std::string> error;
  };
  using Synthesizer = std::function<std::vector<std::string>(const ChatRequest&)>;

  MockChatProvider() = default;
  MockChatProvider(MockChatProvider&& other) noexcept;
  MockChatProvider& operator=(MockChatProvider&& other) noexcept;
  static MockChatProvider from_json(const nlohmann::json& fixtures);
  static MockChatProvider from_file(const std::string& path);

  void add_prompt_script(std::string digest, Script script);
  void add_target_script(std::string target_id, Script script);
  void set_default_script(Script script) { default_ = std::move(script); }
  void set_synthesizer(Synthesizer fn) { synthesizer_ = std::move(fn); }
  void set_supports_n(bool value) { supports_n_ = value; }

  ChatResponse complete(const ChatRequest& request) const override;
  bool supports_n() const override { return supports_n_; }
  size_t calls() const { return calls_.load(); }

 private:
  std::map<std::string, Script> by_digest_;
  std::map<std::string, Script> by_target_;
  std::optional<Script> default_;
  Synthesizer synthesizer_;
  bool supports_n_ = true;
  mutable std::atomic<size_t> calls_{0};
};

struct GenerationSettings {
  std::string model;
  SamplingConfig sampling;
  CleaningConfig cleaning;
};

struct GenerationJob {
  std::string target_id;
  RenderedPrompt prompt;
  uint64_t seed = 0;
};

// One request for sampling_number completions, or sampling_number requests
// when the provider lacks n-sampling. Each request is recorded in `ledger`
// (if given) under "<target id>#<request index>". Throws ProviderError, or
// EmptyGeneration when nothing survives cleaning.
CandidateSet generate(const ChatProvider& provider,
                      const GenerationSettings& settings,
                      const GenerationJob& job, TokenLedger* ledger = nullptr);

struct BatchOutcome {
  std::string target_id;
  std::optional<CandidateSet> result;
  std::string error;  // set when result is empty
};

// Results come back in job order; a failing job does not stop the batch.
std::vector<BatchOutcome> batch_generate(const ChatProvider& provider,
                                         const GenerationSettings& settings,
                                         const std::vector<GenerationJob>& jobs,
                                         size_t parallelism,
                                         TokenLedger* ledger = nullptr);

}  // namespace comsync

#endif  // COMSYNC_LLM_GATEWAY_H_
