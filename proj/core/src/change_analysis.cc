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

#include "comsync/change_analysis.h"

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <map>
#include <tuple>
#include <unordered_set>

#include "comsync/errors.h"
#include "comsync/text_units.h"

namespace comsync {
namespace {

constexpr std::array<std::string_view, kStatementTypeCount> kStatementNames = {
    "DECLARATION", "ASSIGNMENT", "RETURN", "CONDITIONAL", "LOOP",
    "CALL",        "THROW",      "SIGNATURE", "OTHER",    "NONE"};

bool is_ident_char(char c) {
  return (c >= 'a' && c <= 'z') || (c >= 'A' && c <= 'Z') ||
         (c >= '0' && c <= '9') || c == '_' || c == '$' ||
         static_cast<unsigned char>(c) >= 0x80;
}

bool is_word_token(const std::string& t) {
  return !t.empty() && is_ident_char(t.front());
}

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n\f\v");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n\f\v");
  return s.substr(b, e - b + 1);
}

std::string_view rtrim(std::string_view s) {
  size_t e = s.find_last_not_of(" \t\r\n\f\v");
  return e == std::string_view::npos ? std::string_view{} : s.substr(0, e + 1);
}

std::vector<std::string_view> split_lines(std::string_view text) {
  std::vector<std::string_view> lines;
  size_t start = 0;
  for (;;) {
    size_t nl = text.find('\n', start);
    if (nl == std::string_view::npos) {
      lines.push_back(text.substr(start));
      break;
    }
    lines.push_back(text.substr(start, nl - start));
    start = nl + 1;
  }
  return lines;
}

const std::unordered_set<std::string>& java_control_keywords() {
  static const std::unordered_set<std::string> kWords = {
      "if",  "for",   "while", "switch", "catch",  "synchronized", "return",
      "new", "throw", "else",  "do",     "try",    "assert",       "case"};
  return kWords;
}

// True when the line holds a top-level '=' that is not part of a comparison.
bool has_assignment(std::string_view line) {
  int depth = 0;
  char quote = 0;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (quote) {
      if (c == '\\') {
        ++i;
      } else if (c == quote) {
        quote = 0;
      }
      continue;
    }
    if (c == '"' || c == '\'') {
      quote = c;
    } else if (c == '(' || c == '[' || c == '{') {
      ++depth;
    } else if (c == ')' || c == ']' || c == '}') {
      depth = std::max(0, depth - 1);
    } else if (c == '=' && depth == 0) {
      char prev = i > 0 ? line[i - 1] : '\0';
      char next = i + 1 < line.size() ? line[i + 1] : '\0';
      if (next == '=' || prev == '!' || prev == '<' || prev == '>') {
        if (next == '=') ++i;
        continue;
      }
      return true;
    }
  }
  return false;
}

struct LineInfo {
  std::string_view text;
  int line_no = 0;  // 1-based line in the source
  TokenSeq tokens;
  SubTokenSeq subtokens;
};

// Non-blank lines with trailing whitespace removed.
std::vector<LineInfo> significant_lines(std::string_view code) {
  std::vector<LineInfo> out;
  auto raw = split_lines(code);
  for (size_t i = 0; i < raw.size(); ++i) {
    std::string_view text = rtrim(raw[i]);
    if (trim(text).empty()) continue;
    LineInfo info;
    info.text = text;
    info.line_no = static_cast<int>(i) + 1;
    info.tokens = tokenize(text, TextKind::kCode);
    info.subtokens = split_subtokens(info.tokens);
    out.push_back(std::move(info));
  }
  return out;
}

void add_aligned_pairs(const std::vector<std::string>& a,
                       const std::vector<std::string>& b,
                       std::set<ReplacementPair>& out) {
  for (const auto& h : diff_hunks(a, b)) {
    size_t n = std::min(h.a_end - h.a_begin, h.b_end - h.b_begin);
    for (size_t k = 0; k < n; ++k) {
      const auto& x = a[h.a_begin + k];
      const auto& y = b[h.b_begin + k];
      if (x != y) out.emplace(x, y);
    }
  }
}

struct ChangedToken {
  int line = 0;
  int column = 0;
  std::string_view line_text;
  bool operator<(const ChangedToken& o) const {
    return std::tie(line, column) < std::tie(o.line, o.column);
  }
};

size_t multiset_symmetric_difference(const std::map<std::string, size_t>& lhs,
                                     const std::map<std::string, size_t>& rhs) {
  size_t total = 0;
  for (const auto& [key, n] : lhs) {
    auto it = rhs.find(key);
    size_t m = it == rhs.end() ? 0 : it->second;
    total += n > m ? n - m : m - n;
  }
  for (const auto& [key, m] : rhs) {
    if (!lhs.contains(key)) total += m;
  }
  return total;
}

}  // namespace

std::string_view to_string(StatementType type) {
  return kStatementNames[static_cast<size_t>(type)];
}

StatementType parse_statement_type(std::string_view label) {
  for (size_t i = 0; i < kStatementNames.size(); ++i) {
    if (kStatementNames[i] == label) return static_cast<StatementType>(i);
  }
  throw SchemaError("unknown statement type '" + std::string(label) + "'");
}

std::vector<DiffHunk> diff_hunks(const std::vector<std::string>& a,
                                 const std::vector<std::string>& b) {
  size_t prefix = 0;
  while (prefix < a.size() && prefix < b.size() && a[prefix] == b[prefix]) {
    ++prefix;
  }
  size_t suffix = 0;
  while (suffix < a.size() - prefix && suffix < b.size() - prefix &&
         a[a.size() - 1 - suffix] == b[b.size() - 1 - suffix]) {
    ++suffix;
  }
  const size_t n = a.size() - prefix - suffix;
  const size_t m = b.size() - prefix - suffix;

  // lcs[i][j]: LCS length of the core suffixes starting at i and j.
  std::vector<std::vector<uint32_t>> lcs(n + 1, std::vector<uint32_t>(m + 1));
  for (size_t i = n; i-- > 0;) {
    for (size_t j = m; j-- > 0;) {
      lcs[i][j] = a[prefix + i] == b[prefix + j]
                      ? lcs[i + 1][j + 1] + 1
                      : std::max(lcs[i + 1][j], lcs[i][j + 1]);
    }
  }

  std::vector<DiffHunk> hunks;
  std::optional<DiffHunk> open;
  auto close = [&]() {
    if (open) hunks.push_back(*open);
    open.reset();
  };
  size_t i = 0, j = 0;
  while (i < n || j < m) {
    if (i < n && j < m && a[prefix + i] == b[prefix + j]) {
      close();
      ++i;
      ++j;
      continue;
    }
    if (!open) open = DiffHunk{prefix + i, prefix + i, prefix + j, prefix + j};
    if (j >= m || (i < n && lcs[i + 1][j] >= lcs[i][j + 1])) {
      ++i;
      open->a_end = prefix + i;
    } else {
      ++j;
      open->b_end = prefix + j;
    }
  }
  close();
  return hunks;
}

CodeChange diff_code(std::string_view old_code, std::string_view new_code,
                     Language lang) {
  if (!is_valid_utf8(old_code)) throw TokenizeError("old code is not UTF-8");
  if (!is_valid_utf8(new_code)) throw TokenizeError("new code is not UTF-8");

  const auto old_lines = significant_lines(old_code);
  const auto new_lines = significant_lines(new_code);
  std::vector<std::string> old_keys, new_keys;
  for (const auto& l : old_lines) old_keys.emplace_back(l.text);
  for (const auto& l : new_lines) new_keys.emplace_back(l.text);

  CodeChange change;
  std::map<std::string, size_t> old_tok, new_tok, old_sub, new_sub;
  std::vector<ChangedToken> old_changed, new_changed;

  auto take_line = [](const LineInfo& line, std::map<std::string, size_t>& tok,
                      std::map<std::string, size_t>& sub,
                      std::vector<std::string>& changed_tokens) {
    for (const auto& t : line.tokens.tokens) {
      ++tok[t.text];
      changed_tokens.push_back(t.text);
    }
    for (const auto& s : line.subtokens.subtokens) ++sub[s];
  };
  auto mark_tokens = [](const LineInfo& line, size_t begin, size_t end,
                        std::vector<ChangedToken>& out) {
    for (size_t k = begin; k < end; ++k) {
      out.push_back(
          {line.line_no, line.tokens.tokens[k].column_begin, line.text});
    }
  };

  for (const auto& h : diff_hunks(old_keys, new_keys)) {
    const size_t deleted = h.a_end - h.a_begin;
    const size_t inserted = h.b_end - h.b_begin;
    change.modified_lines += std::max(deleted, inserted);
    change.modified_chunks += 1;

    for (size_t k = h.a_begin; k < h.a_end; ++k) {
      take_line(old_lines[k], old_tok, old_sub, change.old_changed_tokens);
    }
    for (size_t k = h.b_begin; k < h.b_end; ++k) {
      take_line(new_lines[k], new_tok, new_sub, change.new_changed_tokens);
    }

    // Old changed line i pairs with new changed line i inside the chunk.
    const size_t aligned = std::min(deleted, inserted);
    for (size_t k = 0; k < aligned; ++k) {
      const auto& ol = old_lines[h.a_begin + k];
      const auto& nl = new_lines[h.b_begin + k];
      const auto old_texts = ol.tokens.texts();
      const auto new_texts = nl.tokens.texts();
      add_aligned_pairs(old_texts, new_texts, change.token_replacements);
      add_aligned_pairs(ol.subtokens.subtokens, nl.subtokens.subtokens,
                        change.subtoken_replacements);
      for (const auto& th : diff_hunks(old_texts, new_texts)) {
        mark_tokens(ol, th.a_begin, th.a_end, old_changed);
        mark_tokens(nl, th.b_begin, th.b_end, new_changed);
      }
    }
    for (size_t k = h.a_begin + aligned; k < h.a_end; ++k) {
      mark_tokens(old_lines[k], 0, old_lines[k].tokens.size(), old_changed);
    }
    for (size_t k = h.b_begin + aligned; k < h.b_end; ++k) {
      mark_tokens(new_lines[k], 0, new_lines[k].tokens.size(), new_changed);
    }
  }

  change.modified_tokens = multiset_symmetric_difference(old_tok, new_tok);
  change.modified_sub_tokens = multiset_symmetric_difference(old_sub, new_sub);

  // Old-side positions first; pure insertions fill any remaining slots.
  std::sort(old_changed.begin(), old_changed.end());
  std::sort(new_changed.begin(), new_changed.end());
  old_changed.insert(old_changed.end(), new_changed.begin(), new_changed.end());
  for (size_t k = 0; k < 3 && k < old_changed.size(); ++k) {
    change.changed_statement_types[k] =
        classify_statement(old_changed[k].line_text, lang);
  }

  auto old_name = extract_function_name(old_code, lang);
  auto new_name = extract_function_name(new_code, lang);
  if (old_name && new_name && *old_name != *new_name) {
    change.function_name_change = FunctionNameChange{*old_name, *new_name};
  }
  return change;
}

std::optional<std::string> extract_function_name(std::string_view code,
                                                 Language lang) {
  if (lang == Language::kPython) {
    const auto tokens = tokenize(code, TextKind::kCode).tokens;
    for (size_t i = 0; i + 1 < tokens.size(); ++i) {
      if (tokens[i].text == "def" && is_word_token(tokens[i + 1].text)) {
        return tokens[i + 1].text;
      }
    }
    return std::nullopt;
  }

  bool in_block_comment = false;
  for (std::string_view raw : split_lines(code)) {
    std::string_view line = trim(raw);
    if (in_block_comment) {
      size_t close = line.find("*/");
      if (close == std::string_view::npos) continue;
      in_block_comment = false;
      line = trim(line.substr(close + 2));
    }
    if (line.starts_with("//") || line.starts_with("*")) continue;
    if (line.starts_with("/*")) {
      size_t close = line.find("*/", 2);
      if (close == std::string_view::npos) {
        in_block_comment = true;
        continue;
      }
      line = trim(line.substr(close + 2));
    }
    while (line.starts_with("@")) {
      size_t p = 1;
      while (p < line.size() && (is_ident_char(line[p]) || line[p] == '.')) ++p;
      while (p < line.size() && (line[p] == ' ' || line[p] == '\t')) ++p;
      if (p < line.size() && line[p] == '(') {
        int depth = 0;
        for (; p < line.size(); ++p) {
          if (line[p] == '(') ++depth;
          if (line[p] == ')' && --depth == 0) {
            ++p;
            break;
          }
        }
      }
      line = trim(line.substr(std::min(p, line.size())));
    }
    size_t paren = line.find('(');
    if (paren == std::string_view::npos) continue;
    size_t end = paren;
    while (end > 0 && (line[end - 1] == ' ' || line[end - 1] == '\t')) --end;
    size_t begin = end;
    while (begin > 0 && is_ident_char(line[begin - 1])) --begin;
    std::string name(line.substr(begin, end - begin));
    if (name.empty() || (name.front() >= '0' && name.front() <= '9')) {
      return std::nullopt;
    }
    if (java_control_keywords().contains(name)) continue;
    return name;
  }
  return std::nullopt;
}

StatementType classify_statement(std::string_view line, Language lang) {
  std::string_view text = trim(line);
  auto tokens = tokenize(text, TextKind::kCode).texts();
  size_t start = 0;
  while (start < tokens.size() &&
         (tokens[start] == "}" || tokens[start] == ")")) {
    ++start;
  }
  tokens.erase(tokens.begin(), tokens.begin() + static_cast<long>(start));
  if (tokens.empty()) return StatementType::kOther;

  const std::string& first = tokens.front();
  if (first == "return") return StatementType::kReturn;
  if (first == "if" || first == "else" || first == "switch" ||
      first == "elif") {
    return StatementType::kConditional;
  }
  if (first == "for" || first == "while") return StatementType::kLoop;
  if (first == "throw" || first == "raise") return StatementType::kThrow;
  if (has_assignment(text)) return StatementType::kAssignment;

  if (lang == Language::kPython) {
    if (first == "def" ||
        (first == "async" && tokens.size() > 1 && tokens[1] == "def")) {
      return StatementType::kSignature;
    }
    if (first == "class") return StatementType::kDeclaration;
  } else {
    auto open = std::find(tokens.begin(), tokens.end(), "(");
    auto brace = std::find(tokens.begin(), tokens.end(), "{");
    for (auto it = tokens.begin(); it != open && it != brace; ++it) {
      if (*it == "class" || *it == "interface" || *it == "enum") {
        return StatementType::kDeclaration;
      }
    }
    auto is_type_end = [](const std::string& t) {
      return is_word_token(t) || t == ">" || t == "]";
    };
    if (open != tokens.end()) {
      size_t p = static_cast<size_t>(open - tokens.begin());
      if (p >= 2 && is_word_token(tokens[p - 1]) &&
          !java_control_keywords().contains(tokens[p - 1]) &&
          is_type_end(tokens[p - 2]) &&
          !java_control_keywords().contains(tokens[p - 2]) &&
          !java_control_keywords().contains(first)) {
        return StatementType::kSignature;
      }
    } else if (tokens.size() >= 3 && tokens.back() == ";" &&
               is_word_token(tokens[tokens.size() - 2]) &&
               is_type_end(tokens[tokens.size() - 3])) {
      return StatementType::kDeclaration;
    }
  }

  for (size_t i = 0; i + 1 < tokens.size(); ++i) {
    if (is_word_token(tokens[i]) && tokens[i + 1] == "(") {
      if (text.ends_with(")") || text.ends_with(");") || text.ends_with("):")) {
        return StatementType::kCall;
      }
      break;
    }
  }
  return StatementType::kOther;
}

}  // namespace comsync
