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

#include <cstdio>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "commands.h"
#include "comsync/errors.h"

namespace {

using namespace comsync;
using namespace comsync::cli;

struct Globals {
  std::string config_path;
  std::optional<uint64_t> seed;
  std::optional<size_t> parallelism;
};

RunConfig effective_config(const Globals& g) {
  RunConfig c = g.config_path.empty() ? RunConfig{} : load_run_config(g.config_path);
  if (g.seed) c.seed = *g.seed;
  if (g.parallelism) c.parallelism = *g.parallelism;
  c.validate();
  return c;
}

void print_metrics(const EvalReport& r) {
  std::printf("targets scored per trial: %zu, trials: %zu\n",
              r.trials.empty() ? size_t{0} : r.trials.front().targets,
              r.trials.size());
  std::printf("accuracy     %.4f +- %.4f\n", r.accuracy.mean, r.accuracy.stddev);
  std::printf("recall@5     %.4f +- %.4f\n", r.recall_at_5.mean, r.recall_at_5.stddev);
  std::printf("ess ratio    %.4f +- %.4f\n", r.ess_ratio.mean, r.ess_ratio.stddev);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"comsync: keep code comments in sync with code changes"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config_path, "Run configuration (JSON)");
  app.add_option("--seed", g.seed, "Master seed (overrides the config)");
  app.add_option("--parallelism", g.parallelism, "Worker threads")
      ->check(CLI::PositiveNumber);

  // ingest
  auto* ingest = app.add_subcommand("ingest", "Validate and normalize a JSONL corpus");
  std::string ingest_in, ingest_out, ingest_report;
  ingest->add_option("input", ingest_in, "Input JSONL")->required();
  ingest->add_option("-o,--out", ingest_out, "Canonical corpus output")->required();
  ingest->add_option("--report", ingest_report,
                     "Validation report (default: <out>.report.json)");

  // index
  auto* index = app.add_subcommand("index", "Build a demonstration index");
  std::string index_corpus, index_out;
  index->add_option("--corpus", index_corpus,
                    "Corpus to index (default: config train path)");
  index->add_option("-o,--out", index_out, "Index file")->required();

  // retrieve
  auto* retrieve_cmd = app.add_subcommand("retrieve", "Show demonstrations for one target");
  std::string retrieve_target, retrieve_strategy;
  std::optional<size_t> retrieve_shots;
  retrieve_cmd->add_option("--target", retrieve_target, "Target id")->required();
  retrieve_cmd->add_option("--strategy", retrieve_strategy,
                           "random, expert, semantic or ehr");
  retrieve_cmd->add_option("--shots", retrieve_shots, "Number of demonstrations");

  // sync
  auto* sync = app.add_subcommand("sync", "Retrieve, prompt, generate and re-rank");
  std::string sync_out, sync_strategy, sync_mock;
  std::optional<size_t> sync_shots;
  std::optional<int> sync_trials;
  sync->add_option("-o,--out", sync_out, "Output directory");
  sync->add_option("--strategy", sync_strategy, "random, expert, semantic or ehr");
  sync->add_option("--shots", sync_shots, "Demonstrations per prompt (0: zero-shot)");
  sync->add_option("--trials", sync_trials, "Repeated trials");
  sync->add_option("--mock-fixtures", sync_mock, "Scripted completions for the mock");

  // rerank
  auto* rerank_cmd = app.add_subcommand("rerank", "Re-rank cached candidates of a run");
  std::string rerank_run, rerank_out, rerank_dataset, rerank_rules;
  std::optional<double> rerank_sigma, rerank_epsilon;
  rerank_cmd->add_option("--run", rerank_run, "Run directory")->required();
  rerank_cmd->add_option("-o,--out", rerank_out, "Output JSONL")->required();
  rerank_cmd->add_option("--dataset", rerank_dataset, "Threshold preset: liu, panth, pai");
  rerank_cmd->add_option("--sigma", rerank_sigma, "Rule 2 threshold");
  rerank_cmd->add_option("--epsilon", rerank_epsilon, "Rule 3 threshold");
  rerank_cmd->add_option("--rules", rerank_rules, "Enabled rules, e.g. 1,2,3");

  // sweep
  auto* sweep = app.add_subcommand("sweep", "Threshold grid over cached candidates");
  std::string sweep_run, sweep_out;
  Range sigma_range{0.2, 0.4, 0.05};
  Range epsilon_range{0.2, 0.6, 0.05};
  double sweep_step = 0.05;
  sweep->add_option("--run", sweep_run, "Run directory")->required();
  sweep->add_option("--sigma-min", sigma_range.low);
  sweep->add_option("--sigma-max", sigma_range.high);
  sweep->add_option("--epsilon-min", epsilon_range.low);
  sweep->add_option("--epsilon-max", epsilon_range.high);
  sweep->add_option("--step", sweep_step, "Lattice step for both axes");
  sweep->add_option("-o,--out", sweep_out, "CSV output (default: <run>/sweep.csv)");

  // eval
  auto* eval = app.add_subcommand("eval", "Score a run against reference comments");
  std::string eval_run, eval_out;
  bool eval_pre = false;
  eval->add_option("--run", eval_run, "Run directory")->required();
  eval->add_option("-o,--out", eval_out, "Output directory (default: the run)");
  eval->add_flag("--pre-rerank", eval_pre, "Score the provider order");

  // analyze
  auto* analyze = app.add_subcommand("analyze", "Corpus statistics behind the rules");
  std::string analyze_corpus_path, analyze_out;
  analyze->add_option("corpus", analyze_corpus_path, "Corpus JSONL")->required();
  analyze->add_option("-o,--out", analyze_out, "Output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*ingest) {
      if (ingest_report.empty()) ingest_report = ingest_out + ".report.json";
      auto report = cmd_ingest(ingest_in, ingest_out, ingest_report);
      std::printf("%zu records, %zu errors\n", report.records, report.errors.size());
      for (const auto& e : report.errors) std::fprintf(stderr, "%s\n", e.c_str());
      return report.errors.empty() ? 0 : 1;
    }
    if (*index) {
      RunConfig c = effective_config(g);
      if (index_corpus.empty()) index_corpus = c.train_path;
      if (index_corpus.empty()) throw ConfigError("no corpus to index");
      auto built = cmd_index(index_corpus, index_out, c.embedding, c.parallelism);
      std::printf("indexed %zu samples\n", built.size());
      return 0;
    }
    if (*retrieve_cmd) {
      RunConfig c = effective_config(g);
      if (!retrieve_strategy.empty()) c.strategy = parse_strategy(retrieve_strategy);
      if (retrieve_shots) c.shots = *retrieve_shots;
      std::cout << cmd_retrieve(c, retrieve_target).dump(2) << "\n";
      return 0;
    }
    if (*sync) {
      RunConfig c = effective_config(g);
      if (!sync_out.empty()) c.output_dir = sync_out;
      if (!sync_strategy.empty()) c.strategy = parse_strategy(sync_strategy);
      if (sync_shots) c.shots = *sync_shots;
      if (sync_trials) c.trials = *sync_trials;
      if (!sync_mock.empty()) c.mock_fixtures = sync_mock;
      auto summary = cmd_sync(c);
      const size_t attempts = summary.targets * static_cast<size_t>(c.trials);
      std::printf("%zu targets, %d trials, %zu failed attempts; output in %s\n",
                  summary.targets, c.trials, summary.failures, c.output_dir.c_str());
      if (summary.report) print_metrics(*summary.report);
      return attempts > 0 && summary.failures == attempts ? 1 : 0;
    }
    if (*rerank_cmd) {
      RunConfig c = effective_config(g);
      RerankConfig rc = rerank_dataset.empty() ? c.rerank
                                               : RerankConfig::preset(rerank_dataset);
      if (rerank_sigma) rc.sigma = *rerank_sigma;
      if (rerank_epsilon) rc.epsilon = *rerank_epsilon;
      if (!rerank_rules.empty()) rc.rules = parse_rules(rerank_rules);
      cmd_rerank(rerank_run, rc, rerank_out);
      return 0;
    }
    if (*sweep) {
      sigma_range.step = sweep_step;
      epsilon_range.step = sweep_step;
      auto cells = cmd_sweep(sweep_run, sigma_range, epsilon_range, sweep_out);
      std::printf("%zu cells\n", cells.size());
      return 0;
    }
    if (*eval) {
      print_metrics(cmd_eval(eval_run, eval_pre, eval_out));
      return 0;
    }
    if (*analyze) {
      auto a = cmd_analyze(analyze_corpus_path, analyze_out);
      std::cout << to_json(a).dump(2) << "\n";
      return 0;
    }
  } catch (const comsync::Error& e) {
    std::fprintf(stderr, "comsync: %s\n", e.what());
    return 2;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "comsync: unexpected error: %s\n", e.what());
    return 3;
  }
  return 0;
}
