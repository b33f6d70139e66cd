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

#include "comsync/llm_gateway.h"

#include <httplib.h>

#include <algorithm>
#include <cstdlib>
#include <fstream>
#include <regex>
#include <set>
#include <sstream>
#include <thread>

#include "comsync/errors.h"
#include "comsync/parallel.h"
#include "http_util.h"

namespace comsync {
namespace {

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(b, e - b + 1);
}

uint64_t count_words(std::string_view s) {
  uint64_t n = 0;
  bool in_word = false;
  for (char c : s) {
    bool space = c == ' ' || c == '\t' || c == '\n' || c == '\r' ||
                 c == '\f' || c == '\v';
    if (!space && !in_word) ++n;
    in_word = !space;
  }
  return n;
}

bool is_transient(int status) {
  return status == 408 || status == 429 || status >= 500;
}

MockChatProvider::Script script_from_json(const nlohmann::json& j) {
  MockChatProvider::Script s;
  for (const auto& [key, _] : j.items()) {
    if (key != "completions" && key != "usage" && key != "error") {
      throw ConfigError("unknown mock script key '" + key + "'");
    }
  }
  if (j.contains("completions")) {
    s.completions = j.at("completions").get<std::vector<std::string>>();
  }
  if (j.contains("usage")) {
    const auto& u = j.at("usage");
    s.usage = Usage{u.value("input", uint64_t{0}), u.value("output", uint64_t{0})};
  }
  if (j.contains("error")) s.error = j.at("error").get<std::string>();
  return s;
}

}  // namespace

void SamplingConfig::validate() const {
  if (!(temperature >= 0.0)) throw ConfigError("temperature must be >= 0");
  if (!(top_p > 0.0 && top_p <= 1.0)) throw ConfigError("top_p must be in (0, 1]");
  if (sampling_number < 1) throw ConfigError("sampling_number must be >= 1");
  if (max_output_tokens < 1) throw ConfigError("max_output_tokens must be >= 1");
}

double cost_of(const Usage& usage, const Prices& prices) {
  return static_cast<double>(usage.input_tokens) / 1e6 *
             prices.input_per_million +
         static_cast<double>(usage.output_tokens) / 1e6 *
             prices.output_per_million;
}

void TokenLedger::record(std::string label, const Usage& usage) {
  std::lock_guard<std::mutex> lock(mutex_);
  entries_.push_back({std::move(label), usage});
  total_ += usage;
}

Usage TokenLedger::total() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return total_;
}

std::vector<TokenLedger::Entry> TokenLedger::entries() const {
  std::vector<Entry> out;
  {
    std::lock_guard<std::mutex> lock(mutex_);
    out = entries_;
  }
  std::stable_sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return a.label < b.label;
  });
  return out;
}

size_t TokenLedger::request_count() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return entries_.size();
}

nlohmann::json TokenLedger::snapshot(const std::optional<Prices>& prices) const {
  const Usage t = total();
  nlohmann::json j = {{"requests", request_count()},
                      {"input_tokens", t.input_tokens},
                      {"output_tokens", t.output_tokens}};
  if (prices) j["cost_usd"] = cost_of(t, *prices);
  return j;
}

std::string clean_completion(std::string_view raw, const CleaningConfig& config) {
  std::string text(trim(raw));
  if (config.strip_fences && text.starts_with("```")) {
    size_t nl = text.find('\n');
    text = nl == std::string::npos ? std::string() : text.substr(nl + 1);
    std::string_view body = trim(text);
    if (body.ends_with("```")) body.remove_suffix(3);
    text = std::string(trim(body));
  }
  if (config.strip_labels) {
    static const std::regex kLabel(
        R"(^\s*(?:(?:new|updated)[ _]*comment|comment|output|answer)\s*:\s*)",
        std::regex::icase);
    for (;;) {
      std::smatch m;
      if (!std::regex_search(text, m, kLabel) || m.length(0) == 0) break;
      text = text.substr(static_cast<size_t>(m.length(0)));
    }
  }
  if (config.first_line_only) {
    std::istringstream lines(text);
    std::string line;
    std::string first;
    while (std::getline(lines, line)) {
      if (!trim(line).empty()) {
        first = line;
        break;
      }
    }
    text = first;
  }
  return std::string(trim(text));
}

std::vector<std::string> CandidateSet::texts() const {
  std::vector<std::string> out;
  for (const auto& c : candidates) out.push_back(c.text);
  return out;
}

OpenAIChatProvider::OpenAIChatProvider(OpenAIConfig config)
    : config_(std::move(config)) {}

nlohmann::json OpenAIChatProvider::request_body(const ChatRequest& r) {
  return {{"model", r.model},
          {"messages",
           {{{"role", "system"}, {"content", r.system}},
            {{"role", "user"}, {"content", r.user}}}},
          {"temperature", r.temperature},
          {"top_p", r.top_p},
          {"n", r.n},
          {"max_tokens", r.max_tokens}};
}

ChatResponse OpenAIChatProvider::parse_response(const nlohmann::json& body) {
  ChatResponse out;
  try {
    const auto& choices = body.at("choices");
    std::vector<std::pair<int64_t, std::string>> indexed;
    for (size_t i = 0; i < choices.size(); ++i) {
      const auto& c = choices[i];
      const auto& content = c.at("message").at("content");
      indexed.emplace_back(c.value("index", static_cast<int64_t>(i)),
                           content.is_null() ? "" : content.get<std::string>());
    }
    std::stable_sort(indexed.begin(), indexed.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    for (auto& [_, text] : indexed) out.completions.push_back(std::move(text));
    if (body.contains("usage")) {
      const auto& u = body["usage"];
      out.usage.input_tokens = u.value("prompt_tokens", uint64_t{0});
      out.usage.output_tokens = u.value("completion_tokens", uint64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProviderError(std::string("malformed chat completion: ") + e.what(), 0);
  }
  return out;
}

ChatResponse OpenAIChatProvider::complete(const ChatRequest& request) const {
  const auto url = internal::split_url(config_.base_url);
  const std::string body = request_body(request).dump();
  httplib::Headers headers;
  if (const char* key = std::getenv(config_.api_key_env.c_str()); key && *key) {
    headers.emplace("Authorization", std::string("Bearer ") + key);
  }

  auto secs = std::chrono::duration_cast<std::chrono::seconds>(config_.timeout);
  auto usecs =
      std::chrono::duration_cast<std::chrono::microseconds>(config_.timeout - secs);
  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      std::this_thread::sleep_for(config_.initial_backoff * (1 << (attempt - 1)));
    }
    httplib::Client client(url.origin);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    auto res = client.Post(url.path + "/chat/completions", headers, body,
                           "application/json");
    if (!res) {
      last_error = "transport error: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 200) {
      nlohmann::json parsed;
      try {
        parsed = nlohmann::json::parse(res->body);
      } catch (const nlohmann::json::exception& e) {
        throw ProviderError(std::string("invalid JSON from provider: ") + e.what(),
                            attempt);
      }
      ChatResponse out = parse_response(parsed);
      out.retries = attempt;
      return out;
    }
    last_error = "HTTP " + std::to_string(res->status);
    if (!is_transient(res->status)) throw ProviderError(last_error, attempt);
  }
  throw ProviderError(last_error, config_.max_retries);
}

MockChatProvider::MockChatProvider(MockChatProvider&& other) noexcept {
  *this = std::move(other);
}

MockChatProvider& MockChatProvider::operator=(MockChatProvider&& other) noexcept {
  by_digest_ = std::move(other.by_digest_);
  by_target_ = std::move(other.by_target_);
  default_ = std::move(other.default_);
  synthesizer_ = std::move(other.synthesizer_);
  supports_n_ = other.supports_n_;
  calls_.store(other.calls_.load());
  return *this;
}

MockChatProvider MockChatProvider::from_json(const nlohmann::json& fixtures) {
  MockChatProvider mock;
  if (!fixtures.is_object()) throw ConfigError("mock fixtures must be an object");
  for (const auto& [key, _] : fixtures.items()) {
    if (key != "supports_n" && key != "prompts" && key != "targets" &&
        key != "default") {
      throw ConfigError("unknown mock fixture key '" + key + "'");
    }
  }
  try {
    mock.supports_n_ = fixtures.value("supports_n", true);
    if (fixtures.contains("prompts")) {
      for (const auto& [digest, s] : fixtures["prompts"].items()) {
        mock.by_digest_[digest] = script_from_json(s);
      }
    }
    if (fixtures.contains("targets")) {
      for (const auto& [id, s] : fixtures["targets"].items()) {
        mock.by_target_[id] = script_from_json(s);
      }
    }
    if (fixtures.contains("default")) {
      mock.default_ = script_from_json(fixtures["default"]);
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("bad mock fixtures: ") + e.what());
  }
  return mock;
}

MockChatProvider MockChatProvider::from_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open mock fixtures '" + path + "'");
  try {
    return from_json(nlohmann::json::parse(in));
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError("bad mock fixtures '" + path + "': " + e.what());
  }
}

void MockChatProvider::add_prompt_script(std::string digest, Script script) {
  by_digest_[std::move(digest)] = std::move(script);
}

void MockChatProvider::add_target_script(std::string target_id, Script script) {
  by_target_[std::move(target_id)] = std::move(script);
}

ChatResponse MockChatProvider::complete(const ChatRequest& request) const {
  calls_.fetch_add(1);
  const Script* script = nullptr;
  const std::string digest = prompt_digest({request.system, request.user});
  if (auto it = by_digest_.find(digest); it != by_digest_.end()) {
    script = &it->second;
  } else if (auto jt = by_target_.find(request.target_id);
             jt != by_target_.end()) {
    script = &jt->second;
  } else if (default_) {
    script = &*default_;
  }

  ChatResponse out;
  std::vector<std::string> pool;
  if (script) {
    if (script->error) throw ProviderError(*script->error, 0);
    pool = script->completions;
  } else if (synthesizer_) {
    pool = synthesizer_(request);
  } else {
    for (int k = 0; k < std::max(request.n, request.sample_index + 1); ++k) {
      pool.push_back("mock completion " + std::to_string(k) + " " +
                     digest.substr(0, 8));
    }
  }

  if (!pool.empty()) {
    if (request.n > 1) {
      const size_t n = std::min(pool.size(), static_cast<size_t>(request.n));
      out.completions.assign(pool.begin(), pool.begin() + static_cast<long>(n));
    } else {
      out.completions.push_back(
          pool[static_cast<size_t>(request.sample_index) % pool.size()]);
    }
  }
  if (script && script->usage) {
    out.usage = *script->usage;
  } else {
    out.usage.input_tokens = count_words(request.system) + count_words(request.user);
    for (const auto& c : out.completions) out.usage.output_tokens += count_words(c);
  }
  return out;
}

CandidateSet generate(const ChatProvider& provider,
                      const GenerationSettings& settings,
                      const GenerationJob& job, TokenLedger* ledger) {
  settings.sampling.validate();
  const int samples = settings.sampling.sampling_number;
  ChatRequest request;
  request.model = settings.model;
  request.system = job.prompt.system;
  request.user = job.prompt.user;
  request.temperature = settings.sampling.temperature;
  request.top_p = settings.sampling.top_p;
  request.max_tokens = settings.sampling.max_output_tokens;
  request.target_id = job.target_id;
  request.seed = job.seed;

  CandidateSet set;
  set.target_id = job.target_id;
  std::vector<std::string> raw;
  auto issue = [&](int n, int sample_index) {
    request.n = n;
    request.sample_index = sample_index;
    ChatResponse response = provider.complete(request);
    if (ledger) {
      ledger->record(job.target_id + "#" + std::to_string(set.requests),
                     response.usage);
    }
    set.usage += response.usage;
    ++set.requests;
    for (auto& c : response.completions) raw.push_back(std::move(c));
  };
  if (provider.supports_n()) {
    issue(samples, 0);
  } else {
    for (int k = 0; k < samples; ++k) issue(1, k);
  }

  std::set<std::string> seen;
  for (size_t i = 0; i < raw.size(); ++i) {
    std::string text = clean_completion(raw[i], settings.cleaning);
    if (text.empty() || !seen.insert(text).second) continue;
    set.candidates.push_back({raw[i], std::move(text), i});
  }
  if (set.candidates.empty()) {
    throw EmptyGeneration("no usable completion for target '" + job.target_id +
                          "'");
  }
  return set;
}

std::vector<BatchOutcome> batch_generate(const ChatProvider& provider,
                                         const GenerationSettings& settings,
                                         const std::vector<GenerationJob>& jobs,
                                         size_t parallelism,
                                         TokenLedger* ledger) {
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  std::vector<BatchOutcome> out(jobs.size());
  parallel_for(jobs.size(), parallelism, [&](size_t i) {
    out[i].target_id = jobs[i].target_id;
    try {
      out[i].result = generate(provider, settings, jobs[i], ledger);
    } catch (const Error& e) {
      out[i].error = e.what();
    }
  });
  return out;
}

}  // namespace comsync
