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

#include "comsync/sample.h"

#include <fstream>

#include "comsync/errors.h"
#include "comsync/hashing.h"

namespace comsync {

std::string_view to_string(Language lang) {
  return lang == Language::kPython ? "python" : "java";
}

Language parse_language(std::string_view name) {
  if (name == "java") return Language::kJava;
  if (name == "python") return Language::kPython;
  throw SchemaError("unsupported language '" + std::string(name) + "'");
}

nlohmann::json to_json(const CCSample& s) {
  nlohmann::json j = {{"id", s.id},
                      {"language", std::string(to_string(s.language))},
                      {"old_code", s.old_code},
                      {"new_code", s.new_code},
                      {"old_comment", s.old_comment}};
  if (s.new_comment) j["new_comment"] = *s.new_comment;
  return j;
}

namespace {

std::string required_string(const nlohmann::json& j, const char* field) {
  auto it = j.find(field);
  if (it == j.end() || it->is_null()) {
    throw SchemaError(std::string("missing field '") + field + "'");
  }
  if (!it->is_string()) {
    throw SchemaError(std::string("field '") + field + "' must be a string");
  }
  return it->get<std::string>();
}

}  // namespace

CCSample sample_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw SchemaError("record must be a JSON object");
  CCSample s;
  s.id = required_string(j, "id");
  if (s.id.empty()) throw SchemaError("field 'id' must be non-empty");
  s.language = parse_language(required_string(j, "language"));
  s.old_code = required_string(j, "old_code");
  s.new_code = required_string(j, "new_code");
  s.old_comment = required_string(j, "old_comment");
  if (auto it = j.find("new_comment"); it != j.end() && !it->is_null()) {
    if (!it->is_string()) {
      throw SchemaError("field 'new_comment' must be a string");
    }
    s.new_comment = it->get<std::string>();
  }
  return s;
}

std::string payload_digest(const CCSample& s) {
  nlohmann::json j = {{"language", std::string(to_string(s.language))},
                      {"old_code", s.old_code},
                      {"new_code", s.new_code},
                      {"old_comment", s.old_comment}};
  return sha256_hex(j.dump());
}

std::vector<CCSample> read_corpus(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError("cannot open corpus '" + path + "'");
  std::vector<CCSample> out;
  std::string line;
  size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      out.push_back(sample_from_json(nlohmann::json::parse(line)));
    } catch (const nlohmann::json::exception& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
    } catch (const SchemaError& e) {
      throw SchemaError(path + ":" + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

void write_corpus(const std::string& path,
                  const std::vector<CCSample>& corpus) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw SchemaError("cannot write corpus '" + path + "'");
  for (const auto& s : corpus) out << to_json(s).dump() << '\n';
}

}  // namespace comsync
