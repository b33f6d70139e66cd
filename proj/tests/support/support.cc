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

#include "support.h"

#include <httplib.h>

#include <atomic>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace testing_support {
namespace fs = std::filesystem;

std::string source_path(const std::string& relative) {
  return (fs::path(COMSYNC_SOURCE_DIR) / relative).string();
}

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::stringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

TempDir::TempDir() {
  static std::atomic<int> counter{0};
  std::random_device rd;
  path_ = fs::temp_directory_path() /
          ("comsync-test-" + std::to_string(rd()) + "-" +
           std::to_string(counter.fetch_add(1)));
  fs::create_directories(path_);
}

TempDir::~TempDir() {
  std::error_code ec;
  fs::remove_all(path_, ec);
}

namespace {

const char* const kNouns[] = {"counter", "buffer",  "session", "registry",
                              "cache",   "token",   "listener", "channel",
                              "queue",   "handle",  "socket",  "record",
                              "entry",   "panel",   "stream",  "message"};
const char* const kVerbs[] = {"get",  "set",    "is",    "remove", "add",
                              "find", "create", "close", "load",   "update"};
const char* const kAdjs[] = {"valid", "active", "open", "empty", "ready",
                             "last",  "first",  "local"};

std::string cap(std::string s) {
  if (!s.empty() && s[0] >= 'a' && s[0] <= 'z') s[0] = static_cast<char>(s[0] - 32);
  return s;
}

}  // namespace

std::vector<comsync::CCSample> synthetic_corpus(size_t n, uint64_t seed,
                                                const std::string& prefix) {
  std::mt19937_64 rng(seed);
  auto pick = [&](const auto& arr) {
    const size_t size = std::size(arr);
    return std::string(arr[rng() % size]);
  };
  std::vector<comsync::CCSample> out;
  for (size_t i = 0; i < n; ++i) {
    comsync::CCSample s;
    char id[32];
    std::snprintf(id, sizeof(id), "%s%04zu", prefix.c_str(), i);
    s.id = id;
    s.language = comsync::Language::kJava;
    const std::string verb = pick(kVerbs);
    const std::string noun = pick(kNouns);
    const std::string adj = pick(kAdjs);
    const std::string noun2 = pick(kNouns);
    const std::string old_name = verb + cap(noun) + cap(adj);
    const bool rename = rng() % 2 == 0;
    const std::string new_name = rename ? verb + cap(noun2) + cap(adj) : old_name;
    const int shape = static_cast<int>(rng() % 4);
    std::string old_body = "  return " + noun + ".size();\n";
    std::string new_body;
    switch (shape) {
      case 0: new_body = "  return " + noun2 + ".size();\n"; break;
      case 1: new_body = "  if (" + noun + " == null) {\n    return 0;\n  }\n" + old_body; break;
      case 2: new_body = "  int n = " + noun + ".size();\n  return n + 1;\n"; break;
      default: new_body = "  for (int i = 0; i < 3; i++) {\n    " + noun + ".poll();\n  }\n" + old_body; break;
    }
    s.old_code = "public int " + old_name + "(int " + noun + "Size) {\n" + old_body + "}";
    s.new_code = "public int " + new_name + "(int " + noun + "Size) {\n" + new_body + "}";
    s.old_comment = cap(verb) + "s the " + adj + " " + noun + " size.";
    s.new_comment = cap(verb) + "s the " + adj + " " + (rename ? noun2 : noun) +
                    (shape == 1 ? " size or zero." : " size.");
    out.push_back(std::move(s));
  }
  return out;
}

comsync::CCSample case_study_target() {
  comsync::CCSample s;
  s.id = "case-study";
  s.language = comsync::Language::kJava;
  s.old_code = "public boolean isRefCounterValid() {\n  return refCounter > 0;\n}";
  s.new_code =
      "public boolean isRefCounterActive() {\n  return refCounter > 0 && !closed;\n}";
  s.old_comment = "Is the refCounter valid for usage?";
  s.new_comment = "Is the refCounter active for usage?";
  return s;
}

std::vector<std::string> case_study_candidates() {
  return {"Is the refCounter active?",
          "Is the refCounter active for usage?",
          "Is the refCounter valid for usage?",
          "True if the refCounter stays open during usage"};
}

LocalServer::LocalServer(const std::function<void(httplib::Server&)>& routes)
    : server_(std::make_unique<httplib::Server>()) {
  routes(*server_);
  port_ = server_->bind_to_any_port("127.0.0.1");
  if (port_ <= 0) throw std::runtime_error("cannot bind a local port");
  thread_ = std::thread([this] { server_->listen_after_bind(); });
  server_->wait_until_ready();
}

LocalServer::~LocalServer() {
  server_->stop();
  if (thread_.joinable()) thread_.join();
}

}  // namespace testing_support
