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

#ifndef COMSYNC_TEXT_UNITS_H_
#define COMSYNC_TEXT_UNITS_H_

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace comsync {

enum class TextKind { kCode, kComment };

struct Token {
  std::string text;
  size_t offset = 0;     // byte offset into the source
  int line = 0;          // 1-based
  int column_begin = 0;  // 0-based byte column, inclusive
  int column_end = 0;    // exclusive

  bool operator==(const Token&) const = default;
};

// `separators` has tokens.size() + 1 entries: the source text before the
// first token, between consecutive tokens, and after the last one. For
// comments the stripped comment markers live in the separators, so
// reconstruct() always returns the original source.
struct TokenSeq {
  std::vector<Token> tokens;
  std::vector<std::string> separators{std::string()};

  size_t size() const { return tokens.size(); }
  bool empty() const { return tokens.empty(); }
  std::vector<std::string> texts() const;
  std::string reconstruct() const;
};

struct SubTokenSeq {
  std::vector<std::string> subtokens;
  std::vector<size_t> parent;  // index into the originating TokenSeq

  size_t size() const { return subtokens.size(); }
  bool empty() const { return subtokens.empty(); }
};

// Splits on whitespace and punctuation; each punctuation character is its
// own token. For comments, `//`, `/* */`, `#`, leading `*` and docstring
// quotes are dropped, and Javadoc tags such as `@code` stay whole.
TokenSeq tokenize(std::string_view text, TextKind kind);

// Splits each token at non-alphanumeric characters, lower->Upper case
// transitions, letter<->digit transitions and acronym ends
// ("HTTPResponse" -> "HTTP", "Response"). Tokens without any alphanumeric
// character produce nothing.
SubTokenSeq split_subtokens(const TokenSeq& tokens);

// Sub-tokens of a single identifier or word.
std::vector<std::string> split_identifier(std::string_view identifier);

// tokenize + split_subtokens in one step.
SubTokenSeq subtokens_of(std::string_view text, TextKind kind);

// Unit-cost Levenshtein distance over whole elements.
size_t edit_distance(std::span<const std::string> a,
                     std::span<const std::string> b,
                     bool case_sensitive = true);

inline size_t edit_distance(const SubTokenSeq& a, const SubTokenSeq& b,
                            bool case_sensitive = true) {
  return edit_distance(a.subtokens, b.subtokens, case_sensitive);
}

// ASCII lower-casing; bytes >= 0x80 pass through unchanged.
std::string to_lower(std::string_view s);

bool is_valid_utf8(std::string_view s);

}  // namespace comsync

#endif  // COMSYNC_TEXT_UNITS_H_
