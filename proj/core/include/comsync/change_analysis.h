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

#ifndef COMSYNC_CHANGE_ANALYSIS_H_
#define COMSYNC_CHANGE_ANALYSIS_H_

#include <array>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "comsync/sample.h"

namespace comsync {

enum class StatementType {
  kDeclaration,
  kAssignment,
  kReturn,
  kConditional,
  kLoop,
  kCall,
  kThrow,
  kSignature,
  kOther,
  kNone,
};

inline constexpr size_t kStatementTypeCount = 10;

std::string_view to_string(StatementType type);
// Throws SchemaError for unknown labels.
StatementType parse_statement_type(std::string_view label);

using ReplacementPair = std::pair<std::string, std::string>;

struct FunctionNameChange {
  std::string old_name;
  std::string new_name;
  bool operator==(const FunctionNameChange&) const = default;
};

// Structure of the edit from old code to new code. A chunk is one diff hunk:
// a maximal run of deleted and/or inserted lines between unchanged lines.
// A chunk with d deleted and a inserted lines contributes max(d, a) modified
// lines, so an in-place edit of one line counts once.
struct CodeChange {
  size_t modified_sub_tokens = 0;
  size_t modified_tokens = 0;
  size_t modified_lines = 0;
  size_t modified_chunks = 0;
  std::set<ReplacementPair> token_replacements;
  std::set<ReplacementPair> subtoken_replacements;
  std::array<StatementType, 3> changed_statement_types{
      StatementType::kNone, StatementType::kNone, StatementType::kNone};
  std::optional<FunctionNameChange> function_name_change;

  // Tokens on the changed lines of each side, in source order.
  std::vector<std::string> old_changed_tokens;
  std::vector<std::string> new_changed_tokens;
};

// Throws TokenizeError when either side is not valid UTF-8.
CodeChange diff_code(std::string_view old_code, std::string_view new_code,
                     Language lang);

// Java: identifier right before the first '(' on the first line that is not
// a comment and still contains '(' once leading annotations are removed.
// Python: identifier after the first `def`.
std::optional<std::string> extract_function_name(std::string_view code,
                                                 Language lang);

// First-match line-shape heuristic.
StatementType classify_statement(std::string_view line, Language lang);

// Element-level longest-common-subsequence alignment. Returns, for each
// hunk of the edit script, the [begin, end) ranges it covers in `a` and `b`.
struct DiffHunk {
  size_t a_begin = 0, a_end = 0;
  size_t b_begin = 0, b_end = 0;
};
std::vector<DiffHunk> diff_hunks(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b);

}  // namespace comsync

#endif  // COMSYNC_CHANGE_ANALYSIS_H_
