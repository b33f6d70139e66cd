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

// Slow, obviously-correct reference implementations. They share no code with
// the library beyond plain data types.

#ifndef COMSYNC_TESTS_ORACLES_ORACLES_H_
#define COMSYNC_TESTS_ORACLES_ORACLES_H_

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

namespace oracle {

// Regex formulation of identifier splitting:
//   [A-Z]+(?![a-z]) | [A-Z]?[a-z]+ | [0-9]+
std::vector<std::string> split_identifier(const std::string& identifier);

// ASCII code tokenizer: runs of [A-Za-z0-9_] and single other non-space
// characters.
std::vector<std::string> tokenize_code(const std::string& text);

// Comment tokenizer for simple single-line comments: drops a leading
// "/**", "/*", "//" or "#" run, a trailing "*/", then tokenizes as code.
std::vector<std::string> tokenize_comment(const std::string& text);

// Sub-tokens of a comment: each token split with split_identifier().
std::vector<std::string> comment_subtokens(const std::string& text);

// Top-down memoized Levenshtein over elements.
size_t edit_distance(const std::vector<std::string>& a,
                     const std::vector<std::string>& b);

std::string lower(std::string s);

// Exact rational comparisons for the rule ratios: does num/den reach p/q?
bool ratio_reaches(uint64_t num, uint64_t den, uint64_t p, uint64_t q);

// Novel sub-token count of `candidate` with respect to `old_comment`
// (lower-cased membership, occurrences counted).
size_t novel_count(const std::vector<std::string>& old_subtokens,
                   const std::vector<std::string>& candidate_subtokens);

// Stable partition by rebuilding two lists.
std::vector<size_t> stable_partition(const std::vector<size_t>& order,
                                     const std::vector<bool>& violated);

// Closed form of multi-pass re-ranking: sort by (violates last rule, ...,
// violates first rule, original index). violations[r][i].
std::vector<size_t> lexicographic_rerank(
    size_t n, const std::vector<std::vector<bool>>& violations);

// Cosine in long double; zero-vector convention: 1 if both zero, else 0.
long double cosine(const std::vector<double>& a, const std::vector<double>& b);

// All ids sorted by descending score, ties by ascending id, full sort.
std::vector<std::string> rank_by_score(
    std::vector<std::pair<std::string, long double>> scored);

// Mean and population std from sums of powers in long double.
std::pair<long double, long double> mean_and_pstd(const std::vector<double>& xs);

}  // namespace oracle

#endif  // COMSYNC_TESTS_ORACLES_ORACLES_H_
