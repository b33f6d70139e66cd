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

#ifndef COMSYNC_SAMPLE_H_
#define COMSYNC_SAMPLE_H_

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace comsync {

enum class Language { kJava, kPython };

std::string_view to_string(Language lang);
// Throws SchemaError on anything other than "java" or "python".
Language parse_language(std::string_view name);

// One code-comment co-change record. `new_comment` is the reference answer
// and is absent for inference-only targets.
struct CCSample {
  std::string id;
  Language language = Language::kJava;
  std::string old_code;
  std::string new_code;
  std::string old_comment;
  std::optional<std::string> new_comment;

  bool operator==(const CCSample&) const = default;
};

// Canonical JSON object; keys are emitted in sorted order by nlohmann::json.
nlohmann::json to_json(const CCSample& sample);
// Throws SchemaError naming the first offending field.
CCSample sample_from_json(const nlohmann::json& j);

// Hex SHA-256 over the (language, old code, new code, old comment) triple.
// Two samples with the same digest present the same synchronization task.
std::string payload_digest(const CCSample& sample);

// Reads a JSONL corpus. Blank lines are skipped; errors carry line numbers.
std::vector<CCSample> read_corpus(const std::string& path);
void write_corpus(const std::string& path, const std::vector<CCSample>& corpus);

}  // namespace comsync

#endif  // COMSYNC_SAMPLE_H_
