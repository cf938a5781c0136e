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

// Benchmark manifest: UTF-8, tab-separated, with a header row naming the
// columns
//
//   case_id  features_path  reference_text  target_word  foil_word
//   gender_of_target  category
//
// in any order (extra columns are ignored). One contrast pair per row.
// Relative feature paths resolve against the manifest's directory.

#ifndef CXPLAIN_CORE_MANIFEST_H_
#define CXPLAIN_CORE_MANIFEST_H_

#include <cstddef>
#include <filesystem>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/core/types.h"

namespace cxplain {

struct ManifestRejection {
  std::size_t row = 0;  // 1-based data row
  std::string reason;
};

struct Manifest {
  std::vector<ContrastCase> cases;  // accepted rows, input order
  std::vector<ManifestRejection> rejected;
  std::size_t row_count = 0;  // non-blank data rows read
};

// Throws ManifestError for a missing/unreadable file or a header lacking a
// required column. Row-level problems (empty or equal target/foil, bad
// gender, duplicate case_id, wrong field count) are collected in `rejected`.
Manifest ParseManifest(std::string_view text,
                       const std::filesystem::path& base_dir = {});
Manifest LoadManifest(const std::filesystem::path& path);

// As LoadManifest but throws ManifestError naming the first rejected row.
std::vector<ContrastCase> LoadManifestStrict(const std::filesystem::path& path);

// Writes cases with paths relative to the manifest directory when possible.
void SaveManifest(const std::vector<ContrastCase>& cases,
                  const std::filesystem::path& path);

}  // namespace cxplain

#endif  // CXPLAIN_CORE_MANIFEST_H_
