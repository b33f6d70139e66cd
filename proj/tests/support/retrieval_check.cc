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

#include "retrieval_check.h"

#include <cmath>
#include <map>
#include <set>
#include <utility>
#include <vector>

#include "oracles/oracles.h"

namespace testing_support {
namespace {

using comsync::Pool;

constexpr long double kTieTolerance = 1e-12L;

struct Expected {
  std::string id;
  Pool pool;
};

std::vector<double> encoded(const comsync::FeatureVector& v) {
  auto e = v.encode();
  return {e.begin(), e.end()};
}

}  // namespace

std::optional<std::string> retrieval_mismatch(
    const comsync::DemonstrationIndex& index, const comsync::Query& query,
    comsync::Strategy strategy, size_t shots) {
  std::map<std::string, long double> sem, exp;
  std::vector<std::pair<std::string, long double>> sem_list, exp_list;
  for (const auto& e : index.entries) {
    if (e.id == query.id || e.digest == query.digest) continue;
    sem[e.id] = oracle::cosine(e.semantic.values(), query.semantic.values());
    exp[e.id] = oracle::cosine(encoded(e.expert), encoded(query.expert));
    sem_list.emplace_back(e.id, sem[e.id]);
    exp_list.emplace_back(e.id, exp[e.id]);
  }
  const auto sem_oracle = oracle::rank_by_score(sem_list);
  const auto exp_oracle = oracle::rank_by_score(exp_list);

  // The library's full pool orders must be permutations of the eligible set
  // that agree with the oracle ranking up to near ties. EHR composition is
  // then re-derived from those orders, so a near tie resolved differently
  // in double precision cannot masquerade as a composition bug.
  auto checked_order = [&](Pool pool, const std::vector<std::string>& ref,
                           const std::map<std::string, long double>& scores,
                           std::vector<std::string>* out) -> std::optional<std::string> {
    const auto ranked = comsync::rank_pool(index, query, pool);
    if (ranked.size() != ref.size()) return std::string("pool size differs");
    for (size_t i = 0; i < ranked.size(); ++i) {
      const auto& id = ranked[i].id;
      if (!scores.contains(id)) return "ineligible pool entry " + id;
      if (id != ref[i] &&
          std::fabs(scores.at(id) - scores.at(ref[i])) > kTieTolerance) {
        return "pool order differs at " + std::to_string(i) + ": " + id + " vs " +
               ref[i];
      }
      out->push_back(id);
    }
    if (std::set<std::string>(out->begin(), out->end()).size() != out->size()) {
      return std::string("pool repeats an entry");
    }
    return std::nullopt;
  };
  std::vector<std::string> sem_rank, exp_rank;
  if (auto e = checked_order(Pool::kSemantic, sem_oracle, sem, &sem_rank)) return e;
  if (auto e = checked_order(Pool::kExpert, exp_oracle, exp, &exp_rank)) return e;

  std::vector<Expected> want;
  if (strategy == comsync::Strategy::kSemantic) {
    for (size_t i = 0; i < shots; ++i) want.push_back({sem_oracle[i], Pool::kSemantic});
  } else if (strategy == comsync::Strategy::kExpert) {
    for (size_t i = 0; i < shots; ++i) want.push_back({exp_oracle[i], Pool::kExpert});
  } else {
    std::set<std::string> seen;
    for (size_t i = 0; i < shots / 2; ++i) {
      seen.insert(sem_rank[i]);
      want.push_back({sem_rank[i], Pool::kSemantic});
    }
    for (size_t i = 0; i < shots / 2; ++i) {
      if (seen.insert(exp_rank[i]).second) want.push_back({exp_rank[i], Pool::kExpert});
    }
    for (size_t i = shots / 2; i < sem_rank.size() && want.size() < shots; ++i) {
      if (seen.insert(sem_rank[i]).second) want.push_back({sem_rank[i], Pool::kSemantic});
    }
    if (want.size() != shots) return std::string("oracle could not fill P demos");
  }

  const auto got = comsync::retrieve(index, query, strategy, shots, 0);
  if (got.demos.size() != want.size()) {
    return "expected " + std::to_string(want.size()) + " demos, got " +
           std::to_string(got.demos.size());
  }
  std::set<std::string> distinct;
  for (size_t i = 0; i < want.size(); ++i) {
    const auto& g = got.demos[i];
    if (!distinct.insert(g.id).second) return "duplicate demo " + g.id;
    if (!sem.contains(g.id)) return "ineligible demo " + g.id;
    if (g.pool != want[i].pool) return "pool label differs at position " + std::to_string(i);
    if (g.id == want[i].id) continue;
    const auto& scores = g.pool == Pool::kSemantic ? sem : exp;
    if (std::fabs(scores.at(g.id) - scores.at(want[i].id)) > kTieTolerance) {
      return "position " + std::to_string(i) + ": got " + g.id + ", expected " +
             want[i].id;
    }
  }
  return std::nullopt;
}

}  // namespace testing_support
