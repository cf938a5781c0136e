/*
 * Copyright 2026 The cxplain Authors.
 * Licensed under the Apache License, Version 2.0 (the "License");
 * you may not use this file except in compliance with the License.
 * You may obtain a copy of the License at
 *
 *     https://www.apache.org/licenses/LICENSE-2.0
 *
 * Unless required by applicable law or agreed to in writing, software
 * distributed under the License is distributed on an "AS IS" BASIS,
 * WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
 * See the License for the specific language governing permissions and
 * limitations under the License.
 */

// Exception hierarchy shared by every module. Callers that need to tell
// failure modes apart catch the specific subclass; everything derives from
// cxplain::Error.

#ifndef CXPLAIN_CORE_ERRORS_H_
#define CXPLAIN_CORE_ERRORS_H_

#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <utility>

namespace cxplain {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class IoError : public Error {
 public:
  using Error::Error;
};

// Raised while decoding feature files (binary or CSV).
class ParseError : public Error {
 public:
  enum class Kind { kMalformed, kDimensionMismatch, kNonFinite };

  ParseError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

class ArgumentError : public Error {
 public:
  using Error::Error;
};

// Manifest-level failure. `row` is the 1-based data row (header excluded)
// when the failure concerns a single row.
class ManifestError : public Error {
 public:
  explicit ManifestError(const std::string& what,
                         std::optional<std::size_t> row = std::nullopt)
      : Error(what), row_(row) {}
  std::optional<std::size_t> row() const { return row_; }

 private:
  std::optional<std::size_t> row_;
};

// Malformed or incompatible wire traffic. `code` is the wire error code the
// receiving side reports back ("malformed", "unsupported_type",
// "invalid_request", "version_mismatch").
class ProtocolError : public Error {
 public:
  explicit ProtocolError(const std::string& what, std::string code = "malformed")
      : Error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

// An error reported by (or about) a model backend. `code` is the wire error
// code, e.g. "unknown_feature".
class BackendError : public Error {
 public:
  BackendError(std::string code, const std::string& what)
      : Error(what), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

class SpanError : public Error {
 public:
  enum class Kind { kNotFound, kSubstringOnly };

  SpanError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// The hypothesis contains neither the target nor the foil.
class CoverageError : public Error {
 public:
  using Error::Error;
};

// A statistic or aggregate is undefined for the given input (zero variance,
// zero conditioning mass, ...).
class DegenerateError : public Error {
 public:
  using Error::Error;
};

}  // namespace cxplain

#endif  // CXPLAIN_CORE_ERRORS_H_
