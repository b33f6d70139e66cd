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

// Command implementations behind the `comsync` binary. Kept in a library so
// tests can drive whole pipelines in-process.

#ifndef COMSYNC_TOOLS_COMMANDS_H_
#define COMSYNC_TOOLS_COMMANDS_H_

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "comsync/embeddings.h"
#include "comsync/evaluation.h"
#include "comsync/llm_gateway.h"
#include "comsync/prompting.h"
#include "comsync/reranker.h"
#include "comsync/retrieval.h"
#include "comsync/sample.h"

namespace comsync::cli {

inline constexpr char kToolVersion[] = "0.1.0";

enum class LlmKind { kMock, kOpenAI };

struct RunConfig {
  std::string train_path;     // demonstration corpus (JSONL)
  std::string test_path;      // targets (JSONL)
  std::string index_path;     // optional prebuilt index
  std::string template_path;  // optional; built-in template otherwise
  std::string output_dir = "comsync-run";

  EmbeddingConfig embedding;

  LlmKind llm = LlmKind::kMock;
  OpenAIConfig openai;
  std::string mock_fixtures;  // optional fixtures file for the mock

  Strategy strategy = Strategy::kEhr;
  size_t shots = 10;  // 0 means zero-shot
  DemoOrder demo_order = DemoOrder::kSemanticFirst;

  SamplingConfig sampling;
  CleaningConfig cleaning;
  RerankConfig rerank;
  bool pre_rerank = false;  // score the provider order instead
  std::optional<Prices> prices;

  int trials = 1;
  uint64_t seed = 42;
  size_t parallelism = 1;

  // Throws ConfigError.
  void validate() const;
};

// Unknown keys are rejected. Relative paths resolve against `base_dir`.
RunConfig run_config_from_json(const nlohmann::json& j,
                               const std::string& base_dir = "");
RunConfig load_run_config(const std::string& path);
// Every field except output_dir, which names where the run lives rather
// than what it computes.
nlohmann::json to_json(const RunConfig& config);
std::string config_hash(const RunConfig& config);

// Seed splitting. trial k: splitmix64(master ^ splitmix64(k + 1));
// target: splitmix64(trial_seed ^ fnv1a64(target id)).
uint64_t trial_seed(uint64_t master, int trial);
uint64_t target_seed(uint64_t trial_seed, const std::string& target_id);

// Offline stand-in for an LLM: edits the target's old comment in a few
// plausible ways (renamed identifiers, dropped words, verbatim copy, a
// generic rewrite), shuffled by the request seed.
MockChatProvider::Synthesizer make_offline_synthesizer(
    std::map<std::string, CCSample> targets);

// ingest ------------------------------------------------------------------

struct IngestReport {
  size_t lines = 0;
  size_t records = 0;
  std::vector<std::string> errors;  // "line N: message"
  nlohmann::json to_json() const;
};

// Validates `input`, converts CRLF to LF inside every field, and writes the
// accepted records to `output` plus a report to `report_path`. Rejected
// lines (schema errors, duplicate ids) are listed in the report.
IngestReport cmd_ingest(const std::string& input, const std::string& output,
                        const std::string& report_path);

// index -------------------------------------------------------------------

DemonstrationIndex cmd_index(const std::string& corpus_path,
                             const std::string& output,
                             const EmbeddingConfig& embedding,
                             size_t parallelism);

// retrieve ----------------------------------------------------------------

nlohmann::json cmd_retrieve(const RunConfig& config,
                            const std::string& target_id);

// sync --------------------------------------------------------------------

// Output layout:
//   manifest.json              config, hash, seeds, targets, ledger totals
//   trial_<k>/results.jsonl    one record per target, input order
//   trial_<k>/ledger.json      per-request token usage
//   report.json, metrics.csv, samples.csv   when every target has a reference
struct SyncSummary {
  size_t targets = 0;
  size_t failures = 0;  // summed over trials
  std::optional<EvalReport> report;
};

SyncSummary cmd_sync(const RunConfig& config);
SyncSummary cmd_sync(const RunConfig& config, const ChatProvider& provider);

// Cached per-target record of a sync trial.
struct CachedTarget {
  CCSample target;
  std::vector<std::string> candidates;  // provider order, cleaned
  bool failed = false;
};

struct CachedRun {
  RunConfig config;
  std::vector<std::vector<CachedTarget>> trials;
  nlohmann::json ledger;  // per-trial totals from the manifest
};

// Throws MissingCache when the directory has no manifest or trial results.
CachedRun load_cached_run(const std::string& run_dir);

// Re-ranks and scores cached candidates. Failed targets are skipped. Returns
// nullopt when a target lacks a reference.
std::optional<EvalReport> score_cached(const CachedRun& run,
                                       const RerankConfig& rerank,
                                       bool pre_rerank);

// rerank ------------------------------------------------------------------

// Re-ranks the cached candidates of every trial and writes one JSONL record
// per target to `output`.
void cmd_rerank(const std::string& run_dir, const RerankConfig& rerank,
                const std::string& output);

// sweep -------------------------------------------------------------------

struct Range {
  double low = 0.0;
  double high = 0.0;
  double step = 0.05;
};

// low, low + step, ... up to high, each rounded to 1e-9. Throws ConfigError.
std::vector<double> lattice(const Range& range);

struct SweepCell {
  double sigma = 0.0;
  double epsilon = 0.0;
  EvalReport report;
};

// Never calls a generation provider. Writes sweep.csv and sweep.json under
// the run directory unless `output_csv` is given.
std::vector<SweepCell> cmd_sweep(const std::string& run_dir,
                                 const Range& sigma, const Range& epsilon,
                                 const std::string& output_csv = "");

// eval / analyze ----------------------------------------------------------

EvalReport cmd_eval(const std::string& run_dir, bool pre_rerank,
                    const std::string& output_dir = "");

CorpusAnalysis cmd_analyze(const std::string& corpus_path,
                           const std::string& output_dir = "");

}  // namespace comsync::cli

#endif  // COMSYNC_TOOLS_COMMANDS_H_
