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

#ifndef COMSYNC_ERRORS_H_
#define COMSYNC_ERRORS_H_

#include <stdexcept>
#include <string>

namespace comsync {

// Base class for every error thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class TokenizeError : public Error {
 public:
  using Error::Error;
};

class FeaturizeError : public Error {
 public:
  FeaturizeError(std::string sample_id, const std::string& what)
      : Error("sample '" + sample_id + "': " + what),
        sample_id_(std::move(sample_id)) {}
  const std::string& sample_id() const { return sample_id_; }

 private:
  std::string sample_id_;
};

class EmbeddingError : public Error {
 public:
  using Error::Error;
};

// Network failure or timeout talking to a remote embedding endpoint.
class ProviderUnavailable : public EmbeddingError {
 public:
  using EmbeddingError::EmbeddingError;
};

class DimensionMismatch : public EmbeddingError {
 public:
  using EmbeddingError::EmbeddingError;
};

class PoolTooSmall : public Error {
 public:
  using Error::Error;
};

class IndexFormatError : public Error {
 public:
  using Error::Error;
};

class TemplateError : public Error {
 public:
  using Error::Error;
};

// Chat-completion failure after exhausting retries.
class ProviderError : public Error {
 public:
  ProviderError(const std::string& what, int retries)
      : Error(what + " (after " + std::to_string(retries) + " retries)"),
        retries_(retries) {}
  int retries() const { return retries_; }

 private:
  int retries_;
};

class EmptyGeneration : public Error {
 public:
  using Error::Error;
};

class MissingReference : public Error {
 public:
  using Error::Error;
};

class MissingCache : public Error {
 public:
  using Error::Error;
};

class SchemaError : public Error {
 public:
  using Error::Error;
};

class ConfigError : public Error {
 public:
  using Error::Error;
};

}  // namespace comsync

#endif  // COMSYNC_ERRORS_H_
