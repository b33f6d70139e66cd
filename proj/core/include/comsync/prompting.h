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

#ifndef COMSYNC_PROMPTING_H_
#define COMSYNC_PROMPTING_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "comsync/retrieval.h"
#include "comsync/sample.h"

namespace comsync {

inline constexpr std::string_view kDefaultDelimiter = "END_OF_DEMO";

// Template file layout (UTF-8), one header per section:
//
//   ---SYSTEM---        system message
//   ---INSTRUCTION---   instruction opening the user message
//   ---DEMO---          uses {old_code} {new_code} {old_comment} {new_comment}
//   ---TARGET---        uses {old_code} {new_code} {old_comment}
//   ---DELIMITER---     optional, defaults to END_OF_DEMO
//
// Headers are matched case-insensitively. A section's text is every line up
// to the next header, without the final newline.
struct PromptTemplate {
  std::string system_message;
  std::string instruction;
  std::string demo_block;
  std::string target_block;
  std::string delimiter{kDefaultDelimiter};

  // Throws TemplateError unless each demo placeholder occurs exactly once,
  // each target placeholder exactly once and {new_comment} not in the target.
  void validate() const;
};

// Throws TemplateError on unknown or missing sections.
PromptTemplate parse_template(std::string_view text);
PromptTemplate load_template(const std::string& path);

// The shipped template (also installed as config/default_template.txt).
std::string_view default_template_text();
const PromptTemplate& default_template();

struct RenderedPrompt {
  std::string system;
  std::string user;
};

// user = instruction "\n\n"
//        + for each demo: demo_block "\n" delimiter "\n\n"
//        + target_block
// With no demos the prompt is zero-shot and carries no delimiter.
RenderedPrompt render_prompt(const PromptTemplate& tmpl,
                             std::span<const CCSample> demos,
                             const CCSample& target);

// Hex SHA-256 over system, a NUL byte, then user.
std::string prompt_digest(const RenderedPrompt& prompt);

enum class DemoOrder { kSemanticFirst, kExpertFirst };

// Groups demos by pool (semantic then expert, or the reverse) keeping the
// retrieval order inside each group. Random demos keep their draw order.
std::vector<Demo> arrange_demos(const RetrievalResult& result, DemoOrder order);

}  // namespace comsync

#endif  // COMSYNC_PROMPTING_H_
