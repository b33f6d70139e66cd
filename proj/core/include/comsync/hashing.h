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

#ifndef COMSYNC_HASHING_H_
#define COMSYNC_HASHING_H_

#include <cstdint>
#include <string>
#include <string_view>

namespace comsync {

// FNV-1a 64-bit. The offset basis is XOR-ed with `seed`, so seed 0 gives
// the standard FNV-1a value.
uint64_t fnv1a64(std::string_view bytes, uint64_t seed = 0);

// Lower-case hex SHA-256 digest.
std::string sha256_hex(std::string_view bytes);

// SplitMix64 finalizer; used to derive per-trial and per-target seeds.
uint64_t splitmix64(uint64_t x);

}  // namespace comsync

#endif  // COMSYNC_HASHING_H_
