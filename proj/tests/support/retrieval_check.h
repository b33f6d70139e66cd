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

#ifndef COMSYNC_TESTS_SUPPORT_RETRIEVAL_CHECK_H_
#define COMSYNC_TESTS_SUPPORT_RETRIEVAL_CHECK_H_

#include <cstddef>
#include <optional>
#include <string>

#include "comsync/retrieval.h"

namespace testing_support {

// Re-derives the expected demos for a semantic, expert or EHR query from
// long-double cosines and a full selection sort, then compares against the
// library. Positions whose oracle scores agree within 1e-12 are accepted
// even if the ids differ (floating-point near ties). Returns a description
// of the first mismatch, or nullopt.
std::optional<std::string> retrieval_mismatch(
    const comsync::DemonstrationIndex& index, const comsync::Query& query,
    comsync::Strategy strategy, size_t shots);

}  // namespace testing_support

#endif  // COMSYNC_TESTS_SUPPORT_RETRIEVAL_CHECK_H_
