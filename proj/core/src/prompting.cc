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

#include "comsync/prompting.h"

#include <array>
#include <fstream>
#include <map>
#include <optional>
#include <sstream>

#include "comsync/errors.h"
#include "comsync/hashing.h"
#include "comsync/text_units.h"

namespace comsync {
namespace {

// Keep in sync with config/default_template.txt (checked by a unit test).
constexpr std::string_view kDefaultTemplate = R"TEMPLATE(---SYSTEM---
You are a software maintenance assistant that keeps code comments consistent with the code they describe.
---INSTRUCTION---
When a code snippet changes, its comment may become outdated. Given the old code, the new code and the old comment, update the old comment so that it matches the new code. Change only what the code change requires. Output ONLY the new comment on a single line, without comment markers or explanations.
---DEMO---
Old code:
{old_code}
New code:
{new_code}
Old comment:
{old_comment}
New comment:
{new_comment}
---TARGET---
Old code:
{old_code}
New code:
{new_code}
Old comment:
{old_comment}
New comment:
---DELIMITER---
END_OF_DEMO
)TEMPLATE";

constexpr std::array<std::string_view, 4> kPlaceholders = {
    "{old_code}", "{new_code}", "{old_comment}", "{new_comment}"};

size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  size_t n = 0;
  for (size_t pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string_view trim(std::string_view s) {
  size_t b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  size_t e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

// Returns the section name for a header line such as "---DEMO---".
std::optional<std::string> header_name(std::string_view line) {
  line = trim(line);
  if (line.size() < 7 || !line.starts_with("---") || !line.ends_with("---")) {
    return std::nullopt;
  }
  std::string name = to_lower(line.substr(3, line.size() - 6));
  if (name.empty() || name.find('-') != std::string::npos) return std::nullopt;
  return name;
}

// Single left-to-right pass, so substituted text is never re-scanned.
std::string fill(std::string_view block, const std::string* values[4]) {
  std::string out;
  size_t i = 0;
  while (i < block.size()) {
    bool replaced = false;
    if (block[i] == '{') {
      for (size_t k = 0; k < kPlaceholders.size(); ++k) {
        if (values[k] && block.substr(i).starts_with(kPlaceholders[k])) {
          out += *values[k];
          i += kPlaceholders[k].size();
          replaced = true;
          break;
        }
      }
    }
    if (!replaced) out += block[i++];
  }
  return out;
}

}  // namespace

void PromptTemplate::validate() const {
  for (auto p : kPlaceholders) {
    if (count_occurrences(demo_block, p) != 1) {
      throw TemplateError("demo block must contain " + std::string(p) +
                          " exactly once");
    }
  }
  for (size_t k = 0; k < 3; ++k) {
    if (count_occurrences(target_block, kPlaceholders[k]) != 1) {
      throw TemplateError("target block must contain " +
                          std::string(kPlaceholders[k]) + " exactly once");
    }
  }
  if (count_occurrences(target_block, kPlaceholders[3]) != 0) {
    throw TemplateError("target block must not contain {new_comment}");
  }
  if (delimiter.empty()) throw TemplateError("delimiter must be non-empty");
}

PromptTemplate parse_template(std::string_view text) {
  std::map<std::string, std::vector<std::string_view>> sections;
  std::string current;
  size_t start = 0;
  while (start < text.size()) {
    size_t nl = text.find('\n', start);
    std::string_view line = text.substr(
        start, nl == std::string_view::npos ? std::string_view::npos
                                            : nl - start);
    start = nl == std::string_view::npos ? text.size() : nl + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (auto name = header_name(line)) {
      static const std::array<std::string_view, 5> kKnown = {
          "system", "instruction", "demo", "target", "delimiter"};
      if (std::find(kKnown.begin(), kKnown.end(), *name) == kKnown.end()) {
        throw TemplateError("unknown template section '" + *name + "'");
      }
      if (sections.contains(*name)) {
        throw TemplateError("duplicate template section '" + *name + "'");
      }
      current = *name;
      sections[current];
      continue;
    }
    if (current.empty()) {
      if (!trim(line).empty()) {
        throw TemplateError("text before the first template section");
      }
      continue;
    }
    sections[current].push_back(line);
  }

  auto join = [&](const std::string& name, bool required) {
    auto it = sections.find(name);
    if (it == sections.end()) {
      if (required) throw TemplateError("missing template section '" + name + "'");
      return std::string();
    }
    std::string out;
    for (size_t i = 0; i < it->second.size(); ++i) {
      if (i) out += '\n';
      out += it->second[i];
    }
    return out;
  };

  PromptTemplate t;
  t.system_message = join("system", true);
  t.instruction = join("instruction", true);
  t.demo_block = join("demo", true);
  t.target_block = join("target", true);
  if (sections.contains("delimiter")) {
    t.delimiter = std::string(trim(join("delimiter", false)));
  }
  t.validate();
  return t;
}

PromptTemplate load_template(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw TemplateError("cannot open template '" + path + "'");
  std::stringstream buffer;
  buffer << in.rdbuf();
  return parse_template(buffer.str());
}

std::string_view default_template_text() { return kDefaultTemplate; }

const PromptTemplate& default_template() {
  static const PromptTemplate kTemplate = parse_template(kDefaultTemplate);
  return kTemplate;
}

RenderedPrompt render_prompt(const PromptTemplate& tmpl,
                             std::span<const CCSample> demos,
                             const CCSample& target) {
  tmpl.validate();
  RenderedPrompt out;
  out.system = tmpl.system_message;
  out.user = tmpl.instruction;
  out.user += "\n\n";
  for (const auto& demo : demos) {
    if (!demo.new_comment) {
      throw TemplateError("demonstration '" + demo.id +
                          "' has no reference new comment");
    }
    const std::string* values[4] = {&demo.old_code, &demo.new_code,
                                    &demo.old_comment, &*demo.new_comment};
    out.user += fill(tmpl.demo_block, values);
    out.user += '\n';
    out.user += tmpl.delimiter;
    out.user += "\n\n";
  }
  const std::string* values[4] = {&target.old_code, &target.new_code,
                                  &target.old_comment, nullptr};
  out.user += fill(tmpl.target_block, values);
  return out;
}

std::string prompt_digest(const RenderedPrompt& prompt) {
  std::string bytes = prompt.system;
  bytes += '\0';
  bytes += prompt.user;
  return sha256_hex(bytes);
}

std::vector<Demo> arrange_demos(const RetrievalResult& result, DemoOrder order) {
  const Pool first =
      order == DemoOrder::kSemanticFirst ? Pool::kSemantic : Pool::kExpert;
  std::vector<Demo> out;
  for (const auto& d : result.demos) {
    if (d.pool == first || d.pool == Pool::kRandom) out.push_back(d);
  }
  for (const auto& d : result.demos) {
    if (d.pool != first && d.pool != Pool::kRandom) out.push_back(d);
  }
  return out;
}

}  // namespace comsync
