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

// Run configuration shared by the commands: a JSON document whose keys are
// also accepted as --<key> flags, plus the backend factory and worker pool.

#ifndef CXPLAIN_CLI_CONFIG_H_
#define CXPLAIN_CLI_CONFIG_H_

#include <cstddef>
#include <exception>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/attribution/explain.h"
#include "cxplain/backend/backend.h"
#include "cxplain/evaluation/deletion.h"
#include "json.hpp"

namespace cxplain {

enum ExitCode : int {
  kExitOk = 0,
  kExitOther = 1,
  kExitConfig = 2,
  kExitBackend = 3,
  kExitPartial = 4,
};

inline constexpr std::string_view kBackendEnvVar = "CXPLAIN_BACKEND";
// Backend spec prefix selecting the in-process synthetic backend, followed
// by the suite JSON path.
inline constexpr std::string_view kSyntheticPrefix = "synthetic:";

struct RunConfig {
  std::filesystem::path manifest;
  std::string backend;  // shell command, or "synthetic:<suite.json>"
  ExplainConfig explain;
  DeletionConfig deletion;
  std::filesystem::path output_dir = "cxplain_out";
  std::size_t workers = 1;

  void Validate() const;  // throws ArgumentError
  nlohmann::ordered_json ToJson() const;
  // SHA-256 (first 16 hex digits) over the fields that change results;
  // paths, the backend command and the worker count are excluded.
  std::string Digest() const;
  // "# seed=<seed> config_digest=<digest>\n"
  std::string CsvPreamble() const;
};

enum class ConfigValueKind { kString, kCount, kReal, kCountList };

struct ConfigKey {
  std::string_view name;
  ConfigValueKind kind;
  std::string_view help;
};

// Every accepted key, in document order.
const std::vector<ConfigKey>& ConfigKeys();

// Applies the keys present in `doc` on top of `base`. Throws ArgumentError
// for unknown keys, wrong value types, or unparsable scorer/aggregation names.
RunConfig ApplyConfigJson(const nlohmann::json& doc, RunConfig base = {});

// Converts a flag's text to the JSON value its key expects ("2000,2500" for
// lists). Throws ArgumentError.
nlohmann::json ConfigValueFromText(const ConfigKey& key, std::string_view text);

using BackendFactory = std::function<std::unique_ptr<Backend>()>;

// "synthetic:<path>" loads the suite once and builds in-process backends;
// anything else is run as a subprocess command. Throws ArgumentError for an
// empty spec and IoError/ArgumentError for an unreadable suite.
BackendFactory MakeBackendFactory(const std::string& spec);

// Runs fn(index, backend) for index in [0, n) on `workers` threads, each
// with its own handshaken backend. The first exception (from fn or from a
// backend that fails to start) stops the pool and is rethrown after joining.
void ForEachWithBackends(std::size_t n, std::size_t workers, const BackendFactory& factory,
                         const std::function<void(std::size_t, Backend&)>& fn);

}  // namespace cxplain

#endif  // CXPLAIN_CLI_CONFIG_H_
