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

#ifndef COMSYNC_TESTS_SUPPORT_SUPPORT_H_
#define COMSYNC_TESTS_SUPPORT_SUPPORT_H_

#include <cstdint>
#include <filesystem>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "comsync/sample.h"

namespace httplib {
class Server;
}

namespace testing_support {

std::string source_path(const std::string& relative);
std::string read_text(const std::string& path);

// Fresh directory under the system temp dir, removed on destruction.
class TempDir {
 public:
  TempDir();
  ~TempDir();
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::string file(const std::string& name) const { return (path_ / name).string(); }

 private:
  std::filesystem::path path_;
};

// Random Java methods with comments that mention parts of the method name.
// Ids are "<prefix><index>" zero-padded to 4 digits.
std::vector<comsync::CCSample> synthetic_corpus(size_t n, uint64_t seed,
                                                const std::string& prefix = "s");

// The four-candidate re-ranking example: the target renames
// isRefCounterValid to isRefCounterActive.
comsync::CCSample case_study_target();
std::vector<std::string> case_study_candidates();

// httplib server on 127.0.0.1 with an ephemeral port, run on a background
// thread until destruction.
class LocalServer {
 public:
  explicit LocalServer(const std::function<void(httplib::Server&)>& routes);
  ~LocalServer();
  LocalServer(const LocalServer&) = delete;
  LocalServer& operator=(const LocalServer&) = delete;

  int port() const { return port_; }
  std::string url() const { return "http://127.0.0.1:" + std::to_string(port_); }

 private:
  std::unique_ptr<httplib::Server> server_;
  std::thread thread_;
  int port_ = 0;
};

}  // namespace testing_support

#endif  // COMSYNC_TESTS_SUPPORT_SUPPORT_H_
