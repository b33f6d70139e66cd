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

#include "comsync/text_units.h"

#include <algorithm>
#include <cstdint>
#include <numeric>

namespace comsync {
namespace {

bool is_space(unsigned char c) {
  return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' ||
         c == '\v';
}
bool is_upper(unsigned char c) { return c >= 'A' && c <= 'Z'; }
bool is_lower(unsigned char c) { return c >= 'a' && c <= 'z'; }
bool is_digit(unsigned char c) { return c >= '0' && c <= '9'; }

// Bytes >= 0x80 belong to multi-byte UTF-8 letters and are treated as
// caseless letters.
bool is_alnum(unsigned char c) {
  return is_upper(c) || is_lower(c) || is_digit(c) || c >= 0x80;
}
bool is_word(unsigned char c) { return is_alnum(c) || c == '_'; }

bool starts_with_at(std::string_view s, size_t pos, std::string_view prefix) {
  return s.substr(pos, prefix.size()) == prefix;
}

// Marks the bytes of comment delimiters so the tokenizer treats them as
// separators.
std::vector<bool> comment_marker_mask(std::string_view text) {
  std::vector<bool> mask(text.size(), false);
  size_t line_start = 0;
  while (line_start <= text.size()) {
    size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();

    // Leading markers.
    size_t p = line_start;
    for (;;) {
      while (p < line_end && is_space(text[p])) ++p;
      if (p >= line_end) break;
      size_t run = p;
      if (starts_with_at(text, p, "\"\"\"") || starts_with_at(text, p, "'''")) {
        run = p + 3;
      } else if (starts_with_at(text, p, "/*")) {
        run = p + 1;
        while (run < line_end && text[run] == '*') ++run;
      } else if (starts_with_at(text, p, "//")) {
        while (run < line_end && text[run] == '/') ++run;
      } else if (text[p] == '#') {
        while (run < line_end && text[run] == '#') ++run;
      } else if (text[p] == '*') {
        while (run < line_end && text[run] == '*') ++run;
        if (run < line_end && text[run] == '/') ++run;
      }
      if (run == p || run > line_end) break;
      std::fill(mask.begin() + p, mask.begin() + run, true);
      p = run;
    }

    // Trailing markers.
    size_t q = line_end;
    for (;;) {
      while (q > p && is_space(text[q - 1])) --q;
      if (q <= p) break;
      size_t run = q;
      std::string_view head = text.substr(p, q - p);
      if (head.ends_with("\"\"\"") || head.ends_with("'''")) {
        run = q - 3;
      } else if (head.ends_with("*/")) {
        run = q - 1;
        while (run > p && text[run - 1] == '*') --run;
      }
      if (run == q) break;
      std::fill(mask.begin() + run, mask.begin() + q, true);
      q = run;
    }

    if (line_end == text.size()) break;
    line_start = line_end + 1;
  }
  return mask;
}

}  // namespace

std::vector<std::string> TokenSeq::texts() const {
  std::vector<std::string> out;
  out.reserve(tokens.size());
  for (const auto& t : tokens) out.push_back(t.text);
  return out;
}

std::string TokenSeq::reconstruct() const {
  std::string out = separators.empty() ? std::string() : separators.front();
  for (size_t i = 0; i < tokens.size(); ++i) {
    out += tokens[i].text;
    if (i + 1 < separators.size()) out += separators[i + 1];
  }
  return out;
}

TokenSeq tokenize(std::string_view text, TextKind kind) {
  TokenSeq seq;
  seq.separators.clear();
  std::vector<bool> mask;
  if (kind == TextKind::kComment) mask = comment_marker_mask(text);
  auto is_separator = [&](size_t i) {
    return is_space(text[i]) || (!mask.empty() && mask[i]);
  };

  int line = 1;
  size_t line_start = 0;
  size_t sep_begin = 0;
  size_t i = 0;
  auto advance_to = [&](size_t end) {
    for (; i < end; ++i) {
      if (text[i] == '\n') {
        ++line;
        line_start = i + 1;
      }
    }
  };

  while (i < text.size()) {
    if (is_separator(i)) {
      advance_to(i + 1);
      continue;
    }
    size_t begin = i;
    size_t end = i + 1;
    unsigned char c = text[i];
    bool tag = kind == TextKind::kComment && c == '@' && end < text.size() &&
               is_word(text[end]) && !is_separator(end);
    if (is_word(c) || tag) {
      while (end < text.size() && is_word(text[end]) && !is_separator(end)) {
        ++end;
      }
    }
    seq.separators.emplace_back(text.substr(sep_begin, begin - sep_begin));
    Token tok;
    tok.text = std::string(text.substr(begin, end - begin));
    tok.offset = begin;
    tok.line = line;
    tok.column_begin = static_cast<int>(begin - line_start);
    tok.column_end = static_cast<int>(end - line_start);
    seq.tokens.push_back(std::move(tok));
    advance_to(end);
    sep_begin = end;
  }
  seq.separators.emplace_back(text.substr(sep_begin));
  return seq;
}

std::vector<std::string> split_identifier(std::string_view id) {
  std::vector<std::string> out;
  size_t i = 0;
  while (i < id.size()) {
    while (i < id.size() && !is_alnum(id[i])) ++i;
    size_t run_begin = i;
    while (i < id.size() && is_alnum(id[i])) ++i;
    std::string_view run = id.substr(run_begin, i - run_begin);
    size_t piece = 0;
    for (size_t k = 1; k < run.size(); ++k) {
      unsigned char prev = run[k - 1], cur = run[k];
      bool boundary =
          (is_digit(prev) != is_digit(cur)) ||
          (!is_upper(prev) && !is_digit(prev) && is_upper(cur)) ||
          (is_upper(prev) && is_upper(cur) && k + 1 < run.size() &&
           !is_upper(run[k + 1]) && !is_digit(run[k + 1]));
      if (boundary) {
        out.emplace_back(run.substr(piece, k - piece));
        piece = k;
      }
    }
    if (piece < run.size()) out.emplace_back(run.substr(piece));
  }
  return out;
}

SubTokenSeq split_subtokens(const TokenSeq& tokens) {
  SubTokenSeq out;
  for (size_t t = 0; t < tokens.tokens.size(); ++t) {
    for (auto& piece : split_identifier(tokens.tokens[t].text)) {
      out.subtokens.push_back(std::move(piece));
      out.parent.push_back(t);
    }
  }
  return out;
}

SubTokenSeq subtokens_of(std::string_view text, TextKind kind) {
  return split_subtokens(tokenize(text, kind));
}

size_t edit_distance(std::span<const std::string> a,
                     std::span<const std::string> b, bool case_sensitive) {
  if (a.empty()) return b.size();
  if (b.empty()) return a.size();
  std::vector<std::string> lower_a, lower_b;
  if (!case_sensitive) {
    for (const auto& s : a) lower_a.push_back(to_lower(s));
    for (const auto& s : b) lower_b.push_back(to_lower(s));
    a = lower_a;
    b = lower_b;
  }
  std::vector<size_t> row(b.size() + 1);
  std::iota(row.begin(), row.end(), size_t{0});
  for (size_t i = 0; i < a.size(); ++i) {
    size_t diagonal = row[0];
    row[0] = i + 1;
    for (size_t j = 0; j < b.size(); ++j) {
      size_t above = row[j + 1];
      size_t substitute = diagonal + (a[i] == b[j] ? 0 : 1);
      row[j + 1] = std::min({above + 1, row[j] + 1, substitute});
      diagonal = above;
    }
  }
  return row.back();
}

std::string to_lower(std::string_view s) {
  std::string out(s);
  for (auto& c : out) {
    if (is_upper(c)) c = static_cast<char>(c - 'A' + 'a');
  }
  return out;
}

bool is_valid_utf8(std::string_view s) {
  size_t i = 0;
  while (i < s.size()) {
    unsigned char c = s[i];
    size_t extra;
    uint32_t cp;
    if (c < 0x80) {
      ++i;
      continue;
    } else if ((c & 0xE0) == 0xC0) {
      extra = 1;
      cp = c & 0x1F;
    } else if ((c & 0xF0) == 0xE0) {
      extra = 2;
      cp = c & 0x0F;
    } else if ((c & 0xF8) == 0xF0) {
      extra = 3;
      cp = c & 0x07;
    } else {
      return false;
    }
    if (i + extra >= s.size()) return false;
    for (size_t k = 1; k <= extra; ++k) {
      unsigned char cc = s[i + k];
      if ((cc & 0xC0) != 0x80) return false;
      cp = (cp << 6) | (cc & 0x3F);
    }
    static constexpr uint32_t kMin[] = {0, 0x80, 0x800, 0x10000};
    if (cp < kMin[extra] || cp > 0x10FFFF || (cp >= 0xD800 && cp <= 0xDFFF)) {
      return false;
    }
    i += extra + 1;
  }
  return true;
}

}  // namespace comsync
