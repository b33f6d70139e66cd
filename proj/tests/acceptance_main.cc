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

// Acceptance checks. Prints one PASS/FAIL/SKIP line per criterion and exits
// non-zero when any criterion fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <numeric>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "commands.h"
#include "comsync/embeddings.h"
#include "comsync/errors.h"
#include "comsync/evaluation.h"
#include "comsync/llm_gateway.h"
#include "comsync/reranker.h"
#include "comsync/retrieval.h"
#include "oracles/oracles.h"
#include "support/retrieval_check.h"
#include "support/support.h"

namespace {

namespace fs = std::filesystem;
using nlohmann::json;
using namespace comsync;
using Order = std::vector<size_t>;

enum class Verdict { kPass, kFail, kSkip };

struct Outcome {
  Verdict verdict;
  std::string detail;
};

Outcome pass(std::string d) { return {Verdict::kPass, std::move(d)}; }
Outcome fail(std::string d) { return {Verdict::kFail, std::move(d)}; }
Outcome skip(std::string d) { return {Verdict::kSkip, std::move(d)}; }

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

// 1 ------------------------------------------------------------------------

Outcome case_study() {
  const auto start = std::chrono::steady_clock::now();
  const auto ctx = TargetContext::from_sample(testing_support::case_study_target());
  const auto cands = testing_support::case_study_candidates();
  const auto out = rerank(ctx, cands, RerankConfig{});
  // Expected orders are 1-based.
  const std::vector<Order> expected{{1, 2, 4, 3}, {1, 2, 3, 4}, {2, 3, 1, 4}};
  if (out.passes.size() != 3) return fail("expected three passes");
  for (size_t r = 0; r < 3; ++r) {
    Order one_based;
    for (size_t i : out.passes[r]) one_based.push_back(i + 1);
    if (one_based != expected[r]) return fail("order after rule " + std::to_string(r + 1));
  }
  // Rule 2 values given to 2 dp, rule 3 to 3 dp except 1/7 (0.14).
  const double r2[4] = {0.2, 0.14, 0.0, 0.56};
  const double r3[4] = {0.429, 0.14, 0.0, 0.714};
  const int r2_dp[4] = {2, 2, 2, 2};
  const int r3_dp[4] = {3, 2, 3, 3};
  // The exact fractions behind those values.
  const size_t kRule2[4][2] = {{1, 5}, {1, 7}, {0, 7}, {5, 9}};
  const size_t kRule3[4][2] = {{3, 7}, {1, 7}, {0, 7}, {5, 7}};
  auto rounds_to = [](double x, double given, int dp) {
    const double scale = std::pow(10.0, dp);
    return std::round(x * scale) == std::round(given * scale);
  };
  for (size_t i = 0; i < 4; ++i) {
    const double a = out.diagnostics[i].rule2.ratio;
    const double b = out.diagnostics[i].rule3.ratio;
    if (!rounds_to(a, r2[i], r2_dp[i]) || !rounds_to(b, r3[i], r3_dp[i])) {
      return fail("ratios of candidate " + std::to_string(i + 1) + ": " +
                  fmt("%.3f", a) + ", " + fmt("%.3f", b));
    }
    const auto& p2 = out.diagnostics[i].rule2.parts;
    const auto& p3 = out.diagnostics[i].rule3.parts;
    if (p2.numerator != kRule2[i][0] || p2.denominator != kRule2[i][1] ||
        p3.numerator != kRule3[i][0] || p3.denominator != kRule3[i][1]) {
      return fail("fractions of candidate " + std::to_string(i + 1));
    }
  }
  const double t = seconds_since(start);
  if (t >= 1.0) return fail("took " + fmt("%.3f", t) + " s");
  return pass("3 orders, 8 ratios; " + fmt("%.4f", t) + " s");
}

// 2 ------------------------------------------------------------------------

Outcome strictness() {
  std::mt19937_64 rng(2026);
  const std::vector<std::string> vocab{"the", "Counter", "is", "valid", "open",
                                       "refCounter", "usage", "for", "x", "Y",
                                       "get_value", "HTTPServer"};
  auto phrase = [&](size_t max_words) {
    std::string out;
    for (size_t i = 1 + rng() % max_words; i > 0; --i) out += vocab[rng() % vocab.size()] + " ";
    return out;
  };
  size_t disagreements = 0, boundary = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    CCSample s;
    s.old_comment = phrase(7);
    const std::string cand = phrase(8);
    const auto ctx = TargetContext::from_sample(s);
    const auto old_subs = oracle::comment_subtokens(s.old_comment);
    const auto cand_subs = oracle::comment_subtokens(cand);
    const uint64_t n2 = oracle::novel_count(old_subs, cand_subs), d2 = cand_subs.size();
    const uint64_t n3 = oracle::edit_distance(old_subs, cand_subs), d3 = old_subs.size();
    // Alternate thresholds on rule 2's ratio, rule 3's ratio, and random ones.
    uint64_t p = rng() % 13, q = 1 + rng() % 12;
    if (trial % 3 == 0) { p = n2; q = d2; }
    if (trial % 3 == 1) { p = n3; q = d3; }
    if (q == 0) { p = 0; q = 1; }
    const double threshold = static_cast<double>(p) / static_cast<double>(q);
    const bool want2 = oracle::ratio_reaches(n2, d2, p, q);
    const bool want3 = oracle::ratio_reaches(n3, d3, p, q);
    if (n2 * q == p * d2 || n3 * q == p * d3) ++boundary;
    if (check_rule2(ctx, cand, threshold).violated != want2) ++disagreements;
    if (check_rule3(ctx, cand, threshold).violated != want3) ++disagreements;
  }
  if (disagreements) return fail(std::to_string(disagreements) + " disagreements");
  return pass("1000 pairs, " + std::to_string(boundary) + " on the boundary, 0 disagreements");
}

// 3 ------------------------------------------------------------------------

// Exhaustive reference: the unique permutation whose adjacent pairs are in
// (violation vector, provider index) order, most severe rule compared first.
Order exhaustive_order(size_t n, const std::vector<std::vector<bool>>& v) {
  auto key_less = [&](size_t a, size_t b) {
    for (size_t r = v.size(); r-- > 0;) {
      if (v[r][a] != v[r][b]) return !v[r][a];
    }
    return a < b;
  };
  Order perm(n);
  std::iota(perm.begin(), perm.end(), size_t{0});
  Order found;
  size_t count = 0;
  do {
    bool ok = true;
    for (size_t i = 0; i + 1 < n && ok; ++i) ok = key_less(perm[i], perm[i + 1]);
    if (ok) {
      ++count;
      found = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  return count == 1 ? found : Order{};
}

Outcome reranker_laws() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(11);
  size_t exhaustive = 0;
  for (int trial = 0; trial < 10000; ++trial) {
    const size_t n = rng() % 9;
    const size_t rules = 1 + rng() % 3;
    std::vector<std::vector<bool>> v(rules, std::vector<bool>(n));
    for (auto& row : v) {
      for (size_t i = 0; i < n; ++i) row[i] = rng() % 2;
    }
    const auto passes = multi_turn_passes(n, v);
    const Order& order = passes.back();
    Order sorted = order;
    std::sort(sorted.begin(), sorted.end());
    Order identity(n);
    std::iota(identity.begin(), identity.end(), size_t{0});
    if (sorted != identity) return fail("not a permutation, trial " + std::to_string(trial));

    Order expected = identity;
    for (size_t r = 0; r < rules; ++r) {
      expected = oracle::stable_partition(expected, v[r]);
      if (passes[r] != expected) return fail("pass is not a stable partition");
    }

    std::vector<std::vector<bool>> again(rules, std::vector<bool>(n));
    for (size_t r = 0; r < rules; ++r) {
      for (size_t j = 0; j < n; ++j) again[r][j] = v[r][order[j]];
    }
    if (multi_turn_passes(n, again).back() != identity) return fail("not idempotent");

    if (n <= 5) {
      ++exhaustive;
      if (exhaustive_order(n, v) != order) return fail("differs from exhaustive search");
    }
  }
  // The same laws through the text rules on the case-study target.
  const auto ctx = TargetContext::from_sample(testing_support::case_study_target());
  auto cands = testing_support::case_study_candidates();
  const auto first = rerank(ctx, cands, RerankConfig{});
  std::vector<std::string> reordered;
  for (size_t i : first.order) reordered.push_back(cands[i]);
  Order identity(cands.size());
  std::iota(identity.begin(), identity.end(), size_t{0});
  if (rerank(ctx, reordered, RerankConfig{}).order != identity) {
    return fail("re-ranking a ranked list moved it");
  }
  const double t = seconds_since(start);
  if (t >= 30.0) return fail("took " + fmt("%.1f", t) + " s");
  return pass("10000 sets, " + std::to_string(exhaustive) + " exhaustive; " +
              fmt("%.2f", t) + " s");
}

// 4 ------------------------------------------------------------------------

Outcome retrieval_oracle() {
  const auto corpus = testing_support::synthetic_corpus(400, 77, "d");
  const auto queries = testing_support::synthetic_corpus(200, 78, "q");
  auto embedder = make_embedding_provider(EmbeddingConfig{});
  const auto index = build_index(corpus, *embedder);
  size_t checks = 0;
  for (const auto& target : queries) {
    const Query q = make_query(target, *embedder);
    for (size_t shots : {2, 4, 6, 8, 10}) {
      for (auto s : {Strategy::kSemantic, Strategy::kExpert, Strategy::kEhr}) {
        if (auto err = testing_support::retrieval_mismatch(index, q, s, shots)) {
          return fail(target.id + " " + std::string(to_string(s)) + " P=" +
                      std::to_string(shots) + ": " + *err);
        }
        ++checks;
      }
    }
  }
  return pass("200 queries x 5 shot counts x 3 strategies (" + std::to_string(checks) +
              " checks)");
}

// 5 ------------------------------------------------------------------------

Outcome metric_oracle() {
  std::vector<json> rows;
  {
    std::istringstream in(testing_support::read_text(
        testing_support::source_path("tests/data/metric_fixture.jsonl")));
    for (std::string line; std::getline(in, line);) rows.push_back(json::parse(line));
  }
  MockChatProvider mock;
  std::vector<GenerationJob> jobs;
  for (const auto& r : rows) {
    mock.add_target_script(r["target_id"],
                           {r["ranked"].get<std::vector<std::string>>(), {}, {}});
    jobs.push_back({r["target_id"], {"system", "user " + r["target_id"].get<std::string>()}, 0});
  }
  GenerationSettings settings;
  settings.sampling.sampling_number = 10;
  const auto outcomes = batch_generate(mock, settings, jobs, 1);
  std::vector<ScoredTarget> targets;
  for (size_t i = 0; i < rows.size(); ++i) {
    if (!outcomes[i].result) return fail("mock generation failed: " + outcomes[i].error);
    targets.push_back({rows[i]["target_id"], rows[i]["old_comment"], rows[i]["reference"],
                       outcomes[i].result->texts()});
  }
  const auto report = score_corpus(targets);

  // The hand sheet: target_id,category,matched_rank,ed_top1,ed_old
  std::istringstream sheet(testing_support::read_text(
      testing_support::source_path("tests/data/metric_fixture_expected.csv")));
  std::string line;
  std::getline(sheet, line);
  size_t top1 = 0, top5 = 0, ess = 0, rows_seen = 0;
  for (size_t i = 0; std::getline(sheet, line); ++i, ++rows_seen) {
    std::vector<std::string> c;
    std::stringstream ss(line);
    for (std::string cell; std::getline(ss, cell, ',');) c.push_back(cell);
    while (c.size() < 5) c.emplace_back();
    const auto& s = report.samples.at(i);
    const std::optional<size_t> rank =
        c[2].empty() ? std::nullopt : std::optional<size_t>(std::stoul(c[2]));
    const long diff = std::stol(c[3]) - std::stol(c[4]);
    if (s.target_id != c[0] || s.matched_rank != rank || s.ed_diff != diff) {
      return fail("sheet row " + c[0]);
    }
    if (rank && *rank == 1) ++top1;
    if (rank && *rank <= 5) ++top5;
    if (diff < 0) ++ess;
  }
  const auto& m = report.trials[0];
  if (rows_seen != 50 || m.top1 != top1 || m.top5 != top5 || m.ess != ess ||
      m.accuracy != static_cast<double>(top1) / 50 ||
      m.recall_at_5 != static_cast<double>(top5) / 50 ||
      m.ess_ratio != static_cast<double>(ess) / 50) {
    return fail("totals differ from the sheet");
  }

  std::mt19937_64 rng(5);
  const std::vector<std::string> words{"a", "b", "c"};
  auto phrase = [&] {
    std::string s;
    for (size_t i = 1 + rng() % 2; i > 0; --i) s += words[rng() % 3] + " ";
    return s;
  };
  for (int f = 0; f < 1000; ++f) {
    std::vector<ScoredTarget> t;
    for (size_t i = 0, n = 1 + rng() % 15; i < n; ++i) {
      std::vector<std::string> ranked;
      for (size_t k = 0, r = 1 + rng() % 10; k < r; ++k) ranked.push_back(phrase());
      t.push_back({"t" + std::to_string(i), phrase(), phrase(), ranked});
    }
    const auto trial = score_corpus(t).trials[0];
    if (trial.accuracy > trial.recall_at_5) return fail("accuracy above recall");
  }
  return pass("sheet " + std::to_string(top1) + "/" + std::to_string(top5) + "/" +
              std::to_string(ess) + " of 50 matched; 1000 random fixtures keep "
              "accuracy <= recall@5");
}

// 6-8 share a small end-to-end run ------------------------------------------

cli::RunConfig run_config(const fs::path& dir, const std::string& name) {
  cli::RunConfig c;
  c.train_path = testing_support::source_path("tests/data/train.jsonl");
  c.test_path = testing_support::source_path("tests/data/test.jsonl");
  c.output_dir = (dir / name).string();
  c.trials = 3;
  c.prices = Prices{0.25, 0.75};
  return c;
}

std::map<std::string, std::string> tree(const fs::path& root) {
  std::map<std::string, std::string> out;
  for (const auto& e : fs::recursive_directory_iterator(root)) {
    if (!e.is_regular_file()) continue;
    std::string text = testing_support::read_text(e.path().string());
    const std::string rel = fs::relative(e.path(), root).string();
    if (rel == "manifest.json") {
      json m = json::parse(text);
      m.erase("created_at");
      text = m.dump();
    }
    out[rel] = text;
  }
  return out;
}

Outcome determinism(const fs::path& dir) {
  const auto a = run_config(dir, "det_a");
  const auto b = run_config(dir, "det_b");
  cli::cmd_sync(a);
  cli::cmd_sync(b);
  const auto ta = tree(a.output_dir);
  const auto tb = tree(b.output_dir);
  if (ta.size() != tb.size()) return fail("different file sets");
  for (const auto& [name, text] : ta) {
    auto it = tb.find(name);
    if (it == tb.end() || it->second != text) return fail(name + " differs");
  }
  return pass(std::to_string(ta.size()) + " files identical apart from created_at");
}

bool same_metrics(const EvalReport& a, const EvalReport& b) {
  if (a.trials.size() != b.trials.size()) return false;
  for (size_t k = 0; k < a.trials.size(); ++k) {
    const auto &x = a.trials[k], &y = b.trials[k];
    if (x.top1 != y.top1 || x.top5 != y.top5 || x.ess != y.ess ||
        x.accuracy != y.accuracy || x.recall_at_5 != y.recall_at_5 ||
        x.ess_ratio != y.ess_ratio) {
      return false;
    }
  }
  return a.accuracy.mean == b.accuracy.mean && a.accuracy.stddev == b.accuracy.stddev &&
         a.recall_at_5.mean == b.recall_at_5.mean &&
         a.recall_at_5.stddev == b.recall_at_5.stddev &&
         a.ess_ratio.mean == b.ess_ratio.mean && a.ess_ratio.stddev == b.ess_ratio.stddev;
}

Outcome sweep(const fs::path& dir) {
  const auto c = run_config(dir, "sweep");
  const auto summary = cli::cmd_sync(c);
  if (!summary.report) return fail("default run produced no report");
  const auto cells = cli::cmd_sweep(c.output_dir, {0.2, 0.4, 0.05}, {0.2, 0.6, 0.05});
  if (cells.size() != 45) return fail(std::to_string(cells.size()) + " cells");
  size_t hits = 0;
  for (const auto& cell : cells) {
    if (cell.sigma == 0.35 && cell.epsilon == 0.25) {
      ++hits;
      if (!same_metrics(cell.report, *summary.report)) {
        return fail("(0.35, 0.25) differs from the default run");
      }
    }
  }
  if (hits != 1) return fail("default cell found " + std::to_string(hits) + " times");
  return pass("45 cells; (0.35, 0.25) equals the default run (accuracy " +
              fmt("%.4f", summary.report->accuracy.mean) + ")");
}

Outcome token_ledger(const fs::path& dir) {
  // Fixed hand arithmetic: 1,234,567 in at $0.25/M plus 890,123 out at
  // $0.75/M is $0.30864175 + $0.66759225 = $0.976234, i.e. $0.98.
  TokenLedger hand;
  hand.record("a#0", {1000000, 800000});
  hand.record("b#0", {234567, 90123});
  if (std::lround(hand.cost({0.25, 0.75}) * 100) != 98) return fail("hand example cost");
  if (hand.total().input_tokens != 1234567 || hand.total().output_tokens != 890123) {
    return fail("hand example totals");
  }

  auto c = run_config(dir, "ledger");
  c.trials = 2;
  // No n-sampling: ten requests per target.
  std::ofstream(dir / "fixtures.json") << R"({"supports_n": false})";
  c.mock_fixtures = (dir / "fixtures.json").string();
  cli::cmd_sync(c);
  const json manifest =
      json::parse(testing_support::read_text(c.output_dir + "/manifest.json"));
  size_t requests_seen = 0;
  for (const auto& t : manifest["trials"]) {
    const std::string trial_dir = c.output_dir + "/trial_" + std::to_string(t["index"].get<int>());
    const json ledger = json::parse(testing_support::read_text(trial_dir + "/ledger.json"));
    uint64_t in = 0, out = 0;
    for (const auto& e : ledger["entries"]) {
      in += e["usage"]["input"].get<uint64_t>();
      out += e["usage"]["output"].get<uint64_t>();
    }
    requests_seen += ledger["entries"].size();
    uint64_t rin = 0, rout = 0;
    std::istringstream results(testing_support::read_text(trial_dir + "/results.jsonl"));
    for (std::string line; std::getline(results, line);) {
      const json r = json::parse(line);
      rin += r["usage"]["input"].get<uint64_t>();
      rout += r["usage"]["output"].get<uint64_t>();
    }
    const auto& totals = t["ledger"];
    if (totals["input_tokens"] != in || totals["output_tokens"] != out || rin != in ||
        rout != out || totals["requests"] != ledger["entries"].size()) {
      return fail("cumulative differs from the per-request sum");
    }
    // Integer micro-cents: in * 25 + out * 75 hundred-millionths of a dollar.
    const uint64_t e8 = in * 25 + out * 75;
    const long cents = static_cast<long>((e8 + 500000) / 1000000);
    if (std::lround(totals["cost_usd"].get<double>() * 100) != cents) {
      return fail("cost " + fmt("%.6f", totals["cost_usd"].get<double>()) +
                  " vs hand " + std::to_string(cents) + " cents");
    }
  }
  return pass(std::to_string(requests_seen) + " requests over 2 trials; totals and cost "
              "match to the cent");
}

// 9 ------------------------------------------------------------------------

Outcome corpus_statistics() {
  const char* path = std::getenv("COMSYNC_LIU_TRAIN");
  if (!path || !*path) return skip("set COMSYNC_LIU_TRAIN to the training set JSONL");
  const auto corpus = read_corpus(path);
  const auto a = analyze_corpus(corpus);
  if (!a.novel_share_below_04 || !a.edit_share_below_06 || !a.propagation_rate) {
    return fail("analysis produced no shares");
  }
  const double novel = *a.novel_share_below_04 * 100;
  const double edit = *a.edit_share_below_06 * 100;
  const double prop = *a.propagation_rate * 100;
  const std::string detail = fmt("novel %.2f%%", novel) + fmt(", edit %.2f%%", edit) +
                             fmt(", propagation %.2f%%", prop);
  if (std::abs(novel - 92.07) > 2 || std::abs(edit - 92.72) > 2 ||
      std::abs(prop - 86.9) > 3) {
    return fail(detail);
  }
  return pass(detail);
}

}  // namespace

int main() {
  testing_support::TempDir dir;
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"case-study-rerank", case_study},
      {"threshold-strictness", strictness},
      {"reranker-laws", reranker_laws},
      {"retrieval-oracle", retrieval_oracle},
      {"metric-oracle", metric_oracle},
      {"sync-determinism", [&] { return determinism(dir.path()); }},
      {"threshold-sweep", [&] { return sweep(dir.path()); }},
      {"token-ledger", [&] { return token_ledger(dir.path()); }},
      {"corpus-statistics", corpus_statistics},
  };
  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = fail(std::string("exception: ") + e.what());
    }
    const char* word = o.verdict == Verdict::kPass   ? "PASS"
                       : o.verdict == Verdict::kFail ? "FAIL"
                                                     : "SKIP";
    if (o.verdict == Verdict::kFail) ++failures;
    std::printf("%s %zu %-22s %s\n", word, i + 1, criteria[i].first.c_str(),
                o.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
