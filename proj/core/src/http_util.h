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

#ifndef COMSYNC_SRC_HTTP_UTIL_H_
#define COMSYNC_SRC_HTTP_UTIL_H_

#include <string>
#include <string_view>

namespace comsync::internal {

// "https://host:8443/v1" -> {"https://host:8443", "/v1"}.
struct SplitUrl {
  std::string origin;
  std::string path;
};

inline SplitUrl split_url(std::string_view url) {
  while (url.ends_with("/")) url.remove_suffix(1);
  size_t scheme = url.find("://");
  size_t host_begin = scheme == std::string_view::npos ? 0 : scheme + 3;
  size_t slash = url.find('/', host_begin);
  if (slash == std::string_view::npos) return {std::string(url), ""};
  return {std::string(url.substr(0, slash)), std::string(url.substr(slash))};
}

}  // namespace comsync::internal

#endif  // COMSYNC_SRC_HTTP_UTIL_H_
