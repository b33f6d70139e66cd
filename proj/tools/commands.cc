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

#include "commands.h"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>
#include <unordered_map>

#include "comsync/change_analysis.h"
#include "comsync/errors.h"
#include "comsync/hashing.h"
#include "comsync/parallel.h"
#include "comsync/text_units.h"

namespace comsync::cli {
namespace fs = std::filesystem;
using nlohmann::json;

namespace {

// JSON helpers ------------------------------------------------------------

void check_keys(const json& j, std::initializer_list<const char*> allowed,
                const std::string& where) {
  if (!j.is_object()) throw ConfigError(where + " must be an object");
  for (const auto& [key, value] : j.items()) {
    bool known = false;
    for (const char* a : allowed) known = known || key == a;
    if (!known) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
  if (auto it = j.find(key); it != j.end()) {
    try {
      out = it->get<T>();
    } catch (const json::exception&) {
      throw ConfigError(std::string("bad value for '") + key + "'");
    }
  }
}

std::string resolve(const std::string& base_dir, const std::string& p) {
  if (p.empty() || base_dir.empty() || fs::path(p).is_absolute()) return p;
  return (fs::path(base_dir) / p).lexically_normal().string();
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

void write_file(const fs::path& path, std::string_view content) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw ConfigError("cannot write '" + path.string() + "'");
  out << content;
}

std::string utc_timestamp() {
  std::time_t now = std::chrono::system_clock::to_time_t(
      std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  char buf[32];
  std::strftime(buf, sizeof(buf), "%Y-%m-%dT%H:%M:%SZ", &tm);
  return buf;
}

std::string_view to_string(DemoOrder o) {
  return o == DemoOrder::kSemanticFirst ? "semantic_first" : "expert_first";
}

DemoOrder parse_demo_order(std::string_view s) {
  if (s == "semantic_first") return DemoOrder::kSemanticFirst;
  if (s == "expert_first") return DemoOrder::kExpertFirst;
  throw ConfigError("unknown demo_order '" + std::string(s) + "'");
}

json usage_json(const Usage& u) {
  return {{"input", u.input_tokens}, {"output", u.output_tokens}};
}

// Corpora and providers ---------------------------------------------------

std::unique_ptr<ChatProvider> make_chat_provider(
    const RunConfig& config, const std::vector<CCSample>& targets) {
  if (config.llm == LlmKind::kOpenAI) {
    return std::make_unique<OpenAIChatProvider>(config.openai);
  }
  auto mock = config.mock_fixtures.empty()
                  ? MockChatProvider()
                  : MockChatProvider::from_file(config.mock_fixtures);
  std::map<std::string, CCSample> by_id;
  for (const auto& t : targets) by_id.emplace(t.id, t);
  mock.set_synthesizer(make_offline_synthesizer(std::move(by_id)));
  return std::make_unique<MockChatProvider>(std::move(mock));
}

DemonstrationIndex obtain_index(const RunConfig& config,
                                const std::vector<CCSample>& train,
                                const EmbeddingProvider& embedder) {
  if (config.index_path.empty()) {
    return build_index(train, embedder, config.parallelism);
  }
  DemonstrationIndex index = load_index(config.index_path);
  if (!(index.provider == embedder.fingerprint())) {
    throw ConfigError("index '" + config.index_path +
                      "' was built with a different embedding provider");
  }
  if (index.corpus_fingerprint != corpus_fingerprint(train)) {
    throw ConfigError("index '" + config.index_path +
                      "' does not match the training corpus");
  }
  return index;
}

std::vector<CCSample> read_required(const std::string& path, const char* what) {
  if (path.empty()) throw ConfigError(std::string("config has no ") + what + " path");
  return read_corpus(path);
}

// Mock synthesis ------------------------------------------------------------

std::string match_case(std::string word, std::string_view like) {
  if (!word.empty() && !like.empty()) {
    const bool upper = std::isupper(static_cast<unsigned char>(like[0]));
    word[0] = static_cast<char>(upper ? std::toupper(word[0])
                                      : std::tolower(word[0]));
  }
  return word;
}

// Rewrites words of the comment that belong to the old function name.
std::string propagate_rename(const CCSample& s) {
  auto old_name = extract_function_name(s.old_code, s.language);
  auto new_name = extract_function_name(s.new_code, s.language);
  if (!old_name || !new_name || *old_name == *new_name) return s.old_comment;
  std::set<std::string> old_lower, new_lower;
  for (const auto& p : split_identifier(*old_name)) old_lower.insert(to_lower(p));
  for (const auto& p : split_identifier(*new_name)) new_lower.insert(to_lower(p));
  std::string added;
  for (const auto& p : split_identifier(*new_name)) {
    if (old_lower.contains(to_lower(p))) continue;
    if (!added.empty()) added += ' ';
    added += to_lower(p);
  }

  TokenSeq seq = tokenize(s.old_comment, TextKind::kComment);
  bool used_added = false;
  for (auto& tok : seq.tokens) {
    if (tok.text == *old_name) {
      tok.text = *new_name;
      continue;
    }
    const std::string lower = to_lower(tok.text);
    if (old_lower.contains(lower) && !new_lower.contains(lower) &&
        split_identifier(tok.text).size() == 1 && !added.empty() && !used_added) {
      tok.text = match_case(added, tok.text);
      used_added = true;
    }
  }
  return seq.reconstruct();
}

std::string trim_copy(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::string drop_last_word(const std::string& text) {
  TokenSeq seq = tokenize(text, TextKind::kComment);
  if (seq.size() < 3) return text;
  std::string out = seq.separators[0];
  for (size_t i = 0; i + 1 < seq.size(); ++i) {
    out += seq.tokens[i].text;
    if (i + 2 < seq.size()) out += seq.separators[i + 1];
  }
  return out;
}

}  // namespace

// RunConfig -----------------------------------------------------------------

void RunConfig::validate() const {
  if (trials < 1) throw ConfigError("trials must be >= 1");
  if (parallelism < 1) throw ConfigError("parallelism must be >= 1");
  if (shots == 1) throw ConfigError("shots must be 0 or >= 2");
  if (strategy == Strategy::kEhr && shots % 2 != 0) {
    throw ConfigError("ehr retrieval needs an even number of shots");
  }
  if (embedding.kind == EmbeddingKind::kRemote && embedding.endpoint.empty()) {
    throw ConfigError("remote embedding needs an endpoint");
  }
  if (embedding.dimension == 0) throw ConfigError("embedding dimension must be > 0");
  sampling.validate();
  rerank.validate();
}

RunConfig run_config_from_json(const json& j, const std::string& base_dir) {
  check_keys(j,
             {"train", "test", "index", "template", "output_dir", "embedding",
              "llm", "retrieval", "sampling", "cleaning", "rerank",
              "evaluation", "prices", "trials", "seed", "parallelism"},
             "config");
  RunConfig c;
  auto path = [&](const char* key, std::string& out) {
    std::string p;
    read_into(j, key, p);
    if (!p.empty()) out = resolve(base_dir, p);
  };
  path("train", c.train_path);
  path("test", c.test_path);
  path("index", c.index_path);
  path("template", c.template_path);
  path("output_dir", c.output_dir);

  if (auto it = j.find("embedding"); it != j.end()) {
    const json& e = *it;
    check_keys(e,
               {"kind", "endpoint", "dimension", "timeout_ms",
                "max_input_tokens", "normalize_inputs", "hash_seed",
                "parallelism"},
               "embedding");
    std::string kind = "fallback";
    read_into(e, "kind", kind);
    if (kind == "fallback") {
      c.embedding.kind = EmbeddingKind::kFallback;
    } else if (kind == "remote") {
      c.embedding.kind = EmbeddingKind::kRemote;
    } else {
      throw ConfigError("unknown embedding kind '" + kind + "'");
    }
    read_into(e, "endpoint", c.embedding.endpoint);
    read_into(e, "dimension", c.embedding.dimension);
    int64_t timeout = c.embedding.timeout.count();
    read_into(e, "timeout_ms", timeout);
    c.embedding.timeout = std::chrono::milliseconds(timeout);
    read_into(e, "max_input_tokens", c.embedding.max_input_tokens);
    read_into(e, "normalize_inputs", c.embedding.normalize_inputs);
    read_into(e, "hash_seed", c.embedding.hash_seed);
    read_into(e, "parallelism", c.embedding.parallelism);
  }

  if (auto it = j.find("llm"); it != j.end()) {
    const json& l = *it;
    check_keys(l,
               {"provider", "model", "base_url", "api_key_env", "supports_n",
                "max_retries", "initial_backoff_ms", "timeout_ms",
                "mock_fixtures"},
               "llm");
    std::string provider = "mock";
    read_into(l, "provider", provider);
    if (provider == "mock") {
      c.llm = LlmKind::kMock;
    } else if (provider == "openai") {
      c.llm = LlmKind::kOpenAI;
    } else {
      throw ConfigError("unknown llm provider '" + provider + "'");
    }
    read_into(l, "model", c.openai.model);
    read_into(l, "base_url", c.openai.base_url);
    read_into(l, "api_key_env", c.openai.api_key_env);
    read_into(l, "supports_n", c.openai.supports_n);
    read_into(l, "max_retries", c.openai.max_retries);
    int64_t backoff = c.openai.initial_backoff.count();
    read_into(l, "initial_backoff_ms", backoff);
    c.openai.initial_backoff = std::chrono::milliseconds(backoff);
    int64_t timeout = c.openai.timeout.count();
    read_into(l, "timeout_ms", timeout);
    c.openai.timeout = std::chrono::milliseconds(timeout);
    std::string fixtures;
    read_into(l, "mock_fixtures", fixtures);
    if (!fixtures.empty()) c.mock_fixtures = resolve(base_dir, fixtures);
  }

  if (auto it = j.find("retrieval"); it != j.end()) {
    check_keys(*it, {"strategy", "shots", "demo_order"}, "retrieval");
    std::string strategy(to_string(c.strategy));
    read_into(*it, "strategy", strategy);
    try {
      c.strategy = parse_strategy(strategy);
    } catch (const Error& e) {
      throw ConfigError(e.what());
    }
    read_into(*it, "shots", c.shots);
    std::string order(to_string(c.demo_order));
    read_into(*it, "demo_order", order);
    c.demo_order = parse_demo_order(order);
  }

  if (auto it = j.find("sampling"); it != j.end()) {
    check_keys(*it,
               {"temperature", "top_p", "sampling_number", "max_output_tokens"},
               "sampling");
    read_into(*it, "temperature", c.sampling.temperature);
    read_into(*it, "top_p", c.sampling.top_p);
    read_into(*it, "sampling_number", c.sampling.sampling_number);
    read_into(*it, "max_output_tokens", c.sampling.max_output_tokens);
  }

  if (auto it = j.find("cleaning"); it != j.end()) {
    check_keys(*it, {"strip_fences", "strip_labels", "first_line_only"},
               "cleaning");
    read_into(*it, "strip_fences", c.cleaning.strip_fences);
    read_into(*it, "strip_labels", c.cleaning.strip_labels);
    read_into(*it, "first_line_only", c.cleaning.first_line_only);
  }

  if (auto it = j.find("rerank"); it != j.end()) {
    check_keys(*it,
               {"dataset", "sigma", "epsilon", "rules", "distinct_novel",
                "case_sensitive_ed"},
               "rerank");
    std::string dataset;
    read_into(*it, "dataset", dataset);
    if (!dataset.empty()) c.rerank = RerankConfig::preset(dataset);
    read_into(*it, "sigma", c.rerank.sigma);
    read_into(*it, "epsilon", c.rerank.epsilon);
    read_into(*it, "rules", c.rerank.rules);
    read_into(*it, "distinct_novel", c.rerank.distinct_novel);
    read_into(*it, "case_sensitive_ed", c.rerank.case_sensitive_ed);
  }

  if (auto it = j.find("evaluation"); it != j.end()) {
    check_keys(*it, {"pre_rerank"}, "evaluation");
    read_into(*it, "pre_rerank", c.pre_rerank);
  }

  if (auto it = j.find("prices"); it != j.end() && !it->is_null()) {
    check_keys(*it, {"input_per_million", "output_per_million"}, "prices");
    Prices p;
    read_into(*it, "input_per_million", p.input_per_million);
    read_into(*it, "output_per_million", p.output_per_million);
    c.prices = p;
  }

  read_into(j, "trials", c.trials);
  read_into(j, "seed", c.seed);
  read_into(j, "parallelism", c.parallelism);
  c.validate();
  return c;
}

RunConfig load_run_config(const std::string& path) {
  json j;
  try {
    j = json::parse(read_file(path));
  } catch (const json::exception& e) {
    throw ConfigError("config '" + path + "': " + e.what());
  }
  return run_config_from_json(j, fs::path(path).parent_path().string());
}

json to_json(const RunConfig& c) {
  json j = {
      {"train", c.train_path},
      {"test", c.test_path},
      {"index", c.index_path},
      {"template", c.template_path},
      {"embedding",
       {{"kind", c.embedding.kind == EmbeddingKind::kRemote ? "remote" : "fallback"},
        {"endpoint", c.embedding.endpoint},
        {"dimension", c.embedding.dimension},
        {"timeout_ms", c.embedding.timeout.count()},
        {"max_input_tokens", c.embedding.max_input_tokens},
        {"normalize_inputs", c.embedding.normalize_inputs},
        {"hash_seed", c.embedding.hash_seed},
        {"parallelism", c.embedding.parallelism}}},
      {"llm",
       {{"provider", c.llm == LlmKind::kOpenAI ? "openai" : "mock"},
        {"model", c.openai.model},
        {"base_url", c.openai.base_url},
        {"api_key_env", c.openai.api_key_env},
        {"supports_n", c.openai.supports_n},
        {"max_retries", c.openai.max_retries},
        {"initial_backoff_ms", c.openai.initial_backoff.count()},
        {"timeout_ms", c.openai.timeout.count()},
        {"mock_fixtures", c.mock_fixtures}}},
      {"retrieval",
       {{"strategy", std::string(to_string(c.strategy))},
        {"shots", c.shots},
        {"demo_order", std::string(to_string(c.demo_order))}}},
      {"sampling",
       {{"temperature", c.sampling.temperature},
        {"top_p", c.sampling.top_p},
        {"sampling_number", c.sampling.sampling_number},
        {"max_output_tokens", c.sampling.max_output_tokens}}},
      {"cleaning",
       {{"strip_fences", c.cleaning.strip_fences},
        {"strip_labels", c.cleaning.strip_labels},
        {"first_line_only", c.cleaning.first_line_only}}},
      {"rerank",
       {{"sigma", c.rerank.sigma},
        {"epsilon", c.rerank.epsilon},
        {"rules", c.rerank.rules},
        {"distinct_novel", c.rerank.distinct_novel},
        {"case_sensitive_ed", c.rerank.case_sensitive_ed}}},
      {"evaluation", {{"pre_rerank", c.pre_rerank}}},
      {"trials", c.trials},
      {"seed", c.seed},
      {"parallelism", c.parallelism}};
  if (c.prices) {
    j["prices"] = {{"input_per_million", c.prices->input_per_million},
                   {"output_per_million", c.prices->output_per_million}};
  }
  return j;
}

std::string config_hash(const RunConfig& config) {
  return sha256_hex(to_json(config).dump());
}

uint64_t trial_seed(uint64_t master, int trial) {
  return splitmix64(master ^ splitmix64(static_cast<uint64_t>(trial) + 1));
}

uint64_t target_seed(uint64_t trial_seed, const std::string& target_id) {
  return splitmix64(trial_seed ^ fnv1a64(target_id));
}

MockChatProvider::Synthesizer make_offline_synthesizer(
    std::map<std::string, CCSample> targets) {
  auto shared = std::make_shared<const std::map<std::string, CCSample>>(
      std::move(targets));
  return [shared](const ChatRequest& request) {
    std::vector<std::string> pool;
    auto it = shared->find(request.target_id);
    if (it == shared->end()) return std::vector<std::string>{"Updated comment."};
    const CCSample& s = it->second;
    const std::string renamed = trim_copy(propagate_rename(s));
    const std::string old_comment = trim_copy(s.old_comment);
    pool.push_back(renamed);
    pool.push_back(old_comment);
    pool.push_back(drop_last_word(renamed));
    if (auto name = extract_function_name(s.new_code, s.language)) {
      std::string words;
      for (const auto& p : split_identifier(*name)) {
        if (!words.empty()) words += ' ';
        words += to_lower(p);
      }
      pool.push_back("Handles " + words + ".");
    }
    pool.push_back("New comment: " + renamed + " if needed");

    // Fisher-Yates driven by the request seed; bias is irrelevant here.
    uint64_t state = request.seed;
    for (size_t i = pool.size(); i > 1; --i) {
      state = splitmix64(state);
      std::swap(pool[i - 1], pool[state % i]);
    }
    return pool;
  };
}

// ingest --------------------------------------------------------------------

json IngestReport::to_json() const {
  return {{"lines", lines}, {"records", records}, {"errors", errors}};
}

IngestReport cmd_ingest(const std::string& input, const std::string& output,
                        const std::string& report_path) {
  std::ifstream in(input, std::ios::binary);
  if (!in) throw SchemaError("cannot open '" + input + "'");
  IngestReport report;
  std::vector<CCSample> records;
  std::unordered_map<std::string, size_t> first_line;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    ++report.lines;
    try {
      json j = json::parse(line);
      if (j.is_object()) {
        for (auto& [key, value] : j.items()) {
          if (!value.is_string()) continue;
          std::string v = value.get<std::string>();
          std::string fixed;
          fixed.reserve(v.size());
          for (size_t i = 0; i < v.size(); ++i) {
            if (v[i] == '\r' && i + 1 < v.size() && v[i + 1] == '\n') continue;
            fixed += v[i];
          }
          value = fixed;
        }
      }
      CCSample s = sample_from_json(j);
      if (auto [it, inserted] = first_line.emplace(s.id, line_no); !inserted) {
        throw SchemaError("duplicate id '" + s.id + "' (first seen on line " +
                          std::to_string(it->second) + ")");
      }
      records.push_back(std::move(s));
    } catch (const json::exception& e) {
      report.errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      report.errors.push_back("line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  report.records = records.size();
  if (fs::path(output).has_parent_path()) {
    fs::create_directories(fs::path(output).parent_path());
  }
  write_corpus(output, records);
  if (!report_path.empty()) write_file(report_path, report.to_json().dump(2) + "\n");
  return report;
}

// index ---------------------------------------------------------------------

DemonstrationIndex cmd_index(const std::string& corpus_path,
                             const std::string& output,
                             const EmbeddingConfig& embedding,
                             size_t parallelism) {
  auto corpus = read_corpus(corpus_path);
  auto embedder = make_embedding_provider(embedding);
  auto index = build_index(corpus, *embedder, parallelism);
  if (fs::path(output).has_parent_path()) {
    fs::create_directories(fs::path(output).parent_path());
  }
  save_index(output, index);
  return index;
}

// retrieve ------------------------------------------------------------------

json cmd_retrieve(const RunConfig& config, const std::string& target_id) {
  config.validate();
  auto train = read_required(config.train_path, "train");
  std::optional<CCSample> target;
  if (!config.test_path.empty()) {
    for (auto& s : read_corpus(config.test_path)) {
      if (s.id == target_id) target = std::move(s);
    }
  }
  if (!target) {
    for (const auto& s : train) {
      if (s.id == target_id) target = s;
    }
  }
  if (!target) throw ConfigError("unknown target '" + target_id + "'");

  json out = {{"target_id", target_id}};
  if (config.shots == 0) {
    out["demos"] = json::array();
    return out;
  }
  auto embedder = make_embedding_provider(config.embedding);
  auto index = obtain_index(config, train, *embedder);
  Query query = make_query(*target, *embedder);
  auto result = retrieve(index, query, config.strategy, config.shots,
                         target_seed(trial_seed(config.seed, 0), target_id));
  out["strategy"] = std::string(to_string(config.strategy));
  out["demos"] = to_json(result);
  return out;
}

// sync ----------------------------------------------------------------------

namespace {

struct Prepared {
  uint64_t seed = 0;
  RetrievalResult retrieval;
  std::optional<RenderedPrompt> prompt;
  std::string error;
};

SyncSummary run_sync(const RunConfig& config, const ChatProvider& provider,
                     const std::vector<CCSample>& train,
                     const std::vector<CCSample>& targets) {
  const fs::path out_dir(config.output_dir);
  fs::create_directories(out_dir);
  const PromptTemplate tmpl = config.template_path.empty()
                                  ? default_template()
                                  : load_template(config.template_path);
  auto embedder = make_embedding_provider(config.embedding);

  std::optional<DemonstrationIndex> index;
  std::vector<std::optional<Query>> queries(targets.size());
  std::unordered_map<std::string, const CCSample*> train_by_id;
  if (config.shots > 0) {
    index = obtain_index(config, train, *embedder);
    for (const auto& s : train) train_by_id.emplace(s.id, &s);
    parallel_for(targets.size(), config.parallelism, [&](size_t i) {
      queries[i] = make_query(targets[i], *embedder);
    });
  }

  GenerationSettings settings;
  settings.model = config.openai.model;
  settings.sampling = config.sampling;
  settings.cleaning = config.cleaning;

  SyncSummary summary;
  summary.targets = targets.size();
  CachedRun cache;
  cache.config = config;
  json trials_json = json::array();

  for (int trial = 0; trial < config.trials; ++trial) {
    const uint64_t tseed = trial_seed(config.seed, trial);
    std::vector<Prepared> prepared(targets.size());
    parallel_for(targets.size(), config.parallelism, [&](size_t i) {
      Prepared& p = prepared[i];
      p.seed = target_seed(tseed, targets[i].id);
      try {
        std::vector<CCSample> demos;
        if (config.shots > 0) {
          p.retrieval = retrieve(*index, *queries[i], config.strategy,
                                 config.shots, p.seed);
          for (const auto& d : arrange_demos(p.retrieval, config.demo_order)) {
            demos.push_back(*train_by_id.at(d.id));
          }
        }
        p.prompt = render_prompt(tmpl, demos, targets[i]);
      } catch (const Error& e) {
        p.error = e.what();
      }
    });

    std::vector<GenerationJob> jobs;
    std::vector<size_t> job_target;
    for (size_t i = 0; i < targets.size(); ++i) {
      if (!prepared[i].prompt) continue;
      jobs.push_back({targets[i].id, *prepared[i].prompt, prepared[i].seed});
      job_target.push_back(i);
    }
    TokenLedger ledger;
    auto outcomes =
        batch_generate(provider, settings, jobs, config.parallelism, &ledger);
    std::vector<const BatchOutcome*> outcome_of(targets.size(), nullptr);
    for (size_t k = 0; k < outcomes.size(); ++k) {
      outcome_of[job_target[k]] = &outcomes[k];
    }

    std::string lines;
    size_t failures = 0;
    std::vector<CachedTarget> cached;
    for (size_t i = 0; i < targets.size(); ++i) {
      const auto& target = targets[i];
      const Prepared& p = prepared[i];
      json rec = {{"target", to_json(target)},
                  {"seed", p.seed},
                  {"demos", to_json(p.retrieval)}};
      CachedTarget ct{target, {}, false};
      std::string error = p.error;
      if (p.prompt) {
        rec["prompt_digest"] = prompt_digest(*p.prompt);
        const BatchOutcome* o = outcome_of[i];
        if (o->result) {
          const CandidateSet& set = *o->result;
          json cands = json::array();
          for (const auto& c : set.candidates) {
            cands.push_back({{"raw", c.raw},
                             {"text", c.text},
                             {"generation_index", c.generation_index}});
          }
          rec["candidates"] = cands;
          rec["usage"] = usage_json(set.usage);
          rec["requests"] = set.requests;
          ct.candidates = set.texts();
          const auto ctx = TargetContext::from_sample(target);
          const auto outcome = rerank(ctx, ct.candidates, config.rerank);
          json diags = json::array();
          for (const auto& d : outcome.diagnostics) diags.push_back(to_json(d));
          json final_texts = json::array();
          for (size_t idx : outcome.order) final_texts.push_back(ct.candidates[idx]);
          rec["rerank"] = {{"order", outcome.order},
                           {"passes", outcome.passes},
                           {"diagnostics", diags}};
          rec["final"] = final_texts;
        } else {
          error = o->error;
        }
      }
      if (!error.empty()) {
        rec["error"] = error;
        ct.failed = true;
        ++failures;
      }
      lines += rec.dump() + "\n";
      cached.push_back(std::move(ct));
    }
    summary.failures += failures;

    const fs::path trial_dir = out_dir / ("trial_" + std::to_string(trial));
    write_file(trial_dir / "results.jsonl", lines);
    const json snapshot = ledger.snapshot(config.prices);
    json ledger_file = snapshot;
    ledger_file["entries"] = json::array();
    for (const auto& e : ledger.entries()) {
      ledger_file["entries"].push_back(
          {{"label", e.label}, {"usage", usage_json(e.usage)}});
    }
    write_file(trial_dir / "ledger.json", ledger_file.dump(2) + "\n");
    trials_json.push_back({{"index", trial},
                           {"seed", tseed},
                           {"results", "trial_" + std::to_string(trial) +
                                           "/results.jsonl"},
                           {"failures", failures},
                           {"ledger", snapshot}});
    cache.trials.push_back(std::move(cached));
  }
  cache.ledger = trials_json;

  json ids = json::array();
  for (const auto& t : targets) ids.push_back(t.id);
  json manifest = {{"tool", "comsync"},
                   {"version", kToolVersion},
                   {"created_at", utc_timestamp()},
                   {"config", to_json(config)},
                   {"config_hash", config_hash(config)},
                   {"master_seed", config.seed},
                   {"embedding_provider", to_json(embedder->fingerprint())},
                   {"targets", ids},
                   {"trials", trials_json}};
  write_file(out_dir / "manifest.json", manifest.dump(2) + "\n");

  if (summary.failures < summary.targets * static_cast<size_t>(config.trials)) {
    summary.report = score_cached(cache, config.rerank, config.pre_rerank);
    if (summary.report) {
      summary.report->ledger = trials_json;
      write_file(out_dir / "report.json", to_json(*summary.report).dump(2) + "\n");
      write_file(out_dir / "metrics.csv", metrics_csv(*summary.report));
      write_file(out_dir / "samples.csv", samples_csv(*summary.report));
    }
  }
  return summary;
}

}  // namespace

SyncSummary cmd_sync(const RunConfig& config) {
  config.validate();
  auto targets = read_required(config.test_path, "test");
  auto train = config.shots > 0 ? read_required(config.train_path, "train")
                                 : std::vector<CCSample>{};
  auto provider = make_chat_provider(config, targets);
  return run_sync(config, *provider, train, targets);
}

SyncSummary cmd_sync(const RunConfig& config, const ChatProvider& provider) {
  config.validate();
  auto targets = read_required(config.test_path, "test");
  auto train = config.shots > 0 ? read_required(config.train_path, "train")
                                 : std::vector<CCSample>{};
  return run_sync(config, provider, train, targets);
}

// cache ---------------------------------------------------------------------

CachedRun load_cached_run(const std::string& run_dir) {
  const fs::path dir(run_dir);
  if (!fs::exists(dir / "manifest.json")) {
    throw MissingCache("no manifest.json in '" + run_dir + "'");
  }
  json manifest;
  try {
    manifest = json::parse(read_file((dir / "manifest.json").string()));
  } catch (const json::exception& e) {
    throw MissingCache("unreadable manifest in '" + run_dir + "': " + e.what());
  }
  CachedRun run;
  run.config = run_config_from_json(manifest.at("config"));
  run.config.output_dir = run_dir;
  run.ledger = manifest.value("trials", json::array());
  for (const auto& t : run.ledger) {
    const fs::path results = dir / t.at("results").get<std::string>();
    if (!fs::exists(results)) {
      throw MissingCache("missing cached results '" + results.string() + "'");
    }
    std::ifstream in(results, std::ios::binary);
    std::vector<CachedTarget> trial;
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      json rec = json::parse(line);
      CachedTarget ct;
      ct.target = sample_from_json(rec.at("target"));
      if (auto it = rec.find("candidates"); it != rec.end()) {
        for (const auto& c : *it) ct.candidates.push_back(c.at("text").get<std::string>());
      }
      ct.failed = rec.contains("error");
      trial.push_back(std::move(ct));
    }
    run.trials.push_back(std::move(trial));
  }
  if (run.trials.empty()) throw MissingCache("no trials in '" + run_dir + "'");
  return run;
}

std::optional<EvalReport> score_cached(const CachedRun& run,
                                       const RerankConfig& rerank_config,
                                       bool pre_rerank) {
  std::vector<EvalReport> reports;
  for (const auto& trial : run.trials) {
    std::vector<ScoredTarget> scored;
    for (const auto& ct : trial) {
      if (ct.failed || ct.candidates.empty()) continue;
      if (!ct.target.new_comment) return std::nullopt;
      ScoredTarget st{ct.target.id, ct.target.old_comment, ct.target.new_comment,
                      {}};
      if (pre_rerank) {
        st.ranked = ct.candidates;
      } else {
        const auto outcome = rerank(TargetContext::from_sample(ct.target),
                                    ct.candidates, rerank_config);
        for (size_t idx : outcome.order) st.ranked.push_back(ct.candidates[idx]);
      }
      scored.push_back(std::move(st));
    }
    reports.push_back(score_corpus(scored));
  }
  EvalReport out = aggregate_trials(reports);
  out.ledger = run.ledger;
  return out;
}

// rerank --------------------------------------------------------------------

void cmd_rerank(const std::string& run_dir, const RerankConfig& rerank_config,
                const std::string& output) {
  rerank_config.validate();
  const CachedRun run = load_cached_run(run_dir);
  std::string lines;
  for (size_t t = 0; t < run.trials.size(); ++t) {
    for (const auto& ct : run.trials[t]) {
      json rec = {{"trial", t}, {"target_id", ct.target.id}};
      if (ct.failed) {
        rec["error"] = "generation failed";
      } else {
        const auto outcome = rerank(TargetContext::from_sample(ct.target),
                                    ct.candidates, rerank_config);
        json diags = json::array();
        for (const auto& d : outcome.diagnostics) diags.push_back(to_json(d));
        json final_texts = json::array();
        for (size_t idx : outcome.order) final_texts.push_back(ct.candidates[idx]);
        rec["order"] = outcome.order;
        rec["passes"] = outcome.passes;
        rec["final"] = final_texts;
        rec["diagnostics"] = diags;
      }
      lines += rec.dump() + "\n";
    }
  }
  write_file(output, lines);
}

// sweep ---------------------------------------------------------------------

std::vector<double> lattice(const Range& r) {
  if (!(r.step > 0.0)) throw ConfigError("sweep step must be > 0");
  if (r.high < r.low) throw ConfigError("sweep range is empty");
  const auto n = static_cast<size_t>(std::floor((r.high - r.low) / r.step + 1e-9)) + 1;
  std::vector<double> out;
  for (size_t i = 0; i < n; ++i) {
    out.push_back(std::round((r.low + static_cast<double>(i) * r.step) * 1e9) / 1e9);
  }
  return out;
}

std::vector<SweepCell> cmd_sweep(const std::string& run_dir, const Range& sigma,
                                 const Range& epsilon,
                                 const std::string& output_csv) {
  const auto sigmas = lattice(sigma);
  const auto epsilons = lattice(epsilon);
  const CachedRun run = load_cached_run(run_dir);
  std::vector<SweepCell> cells;
  std::string csv =
      "sigma,epsilon,accuracy_mean,accuracy_std,recall_at_5_mean,"
      "recall_at_5_std,ess_ratio_mean,ess_ratio_std\n";
  json cells_json = json::array();
  for (double s : sigmas) {
    for (double e : epsilons) {
      RerankConfig rc = run.config.rerank;
      rc.sigma = s;
      rc.epsilon = e;
      auto report = score_cached(run, rc, run.config.pre_rerank);
      if (!report) throw MissingReference("sweep needs reference comments");
      char buf[256];
      std::snprintf(buf, sizeof(buf), "%.2f,%.2f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n",
                    s, e, report->accuracy.mean, report->accuracy.stddev,
                    report->recall_at_5.mean, report->recall_at_5.stddev,
                    report->ess_ratio.mean, report->ess_ratio.stddev);
      csv += buf;
      cells_json.push_back({{"sigma", s},
                            {"epsilon", e},
                            {"accuracy", report->accuracy.mean},
                            {"recall_at_5", report->recall_at_5.mean},
                            {"ess_ratio", report->ess_ratio.mean}});
      cells.push_back({s, e, std::move(*report)});
    }
  }
  if (output_csv.empty()) {
    write_file(fs::path(run_dir) / "sweep.csv", csv);
    write_file(fs::path(run_dir) / "sweep.json", cells_json.dump(2) + "\n");
  } else {
    write_file(output_csv, csv);
  }
  return cells;
}

// eval / analyze ------------------------------------------------------------

EvalReport cmd_eval(const std::string& run_dir, bool pre_rerank,
                    const std::string& output_dir) {
  const CachedRun run = load_cached_run(run_dir);
  auto report = score_cached(run, run.config.rerank, pre_rerank);
  if (!report) throw MissingReference("evaluation needs reference comments");
  const fs::path dir(output_dir.empty() ? run_dir : output_dir);
  const std::string stem = pre_rerank ? "eval_pre_rerank" : "eval";
  write_file(dir / (stem + ".json"), to_json(*report).dump(2) + "\n");
  write_file(dir / (stem + "_metrics.csv"), metrics_csv(*report));
  write_file(dir / (stem + "_samples.csv"), samples_csv(*report));
  return *report;
}

CorpusAnalysis cmd_analyze(const std::string& corpus_path,
                           const std::string& output_dir) {
  const auto corpus = read_corpus(corpus_path);
  CorpusAnalysis analysis = analyze_corpus(corpus);
  if (!output_dir.empty()) {
    const fs::path dir(output_dir);
    write_file(dir / "analysis.json", to_json(analysis).dump(2) + "\n");
    write_file(dir / "histogram.csv", histogram_csv(analysis));
  }
  return analysis;
}

}  // namespace comsync::cli
