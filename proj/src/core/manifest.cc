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

#include "cxplain/core/manifest.h"

#include <array>
#include <map>
#include <optional>
#include <set>

#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"

namespace cxplain {
namespace {

constexpr std::array<std::string_view, 7> kColumns = {
    "case_id",     "features_path",    "reference_text", "target_word",
    "foil_word",   "gender_of_target", "category"};

enum Column {
  kCaseId,
  kFeaturesPath,
  kReferenceText,
  kTargetWord,
  kFoilWord,
  kGender,
  kCategory
};

std::vector<std::string_view> SplitTabs(std::string_view line) {
  std::vector<std::string_view> fields;
  std::size_t pos = 0;
  while (true) {
    std::size_t tab = line.find('\t', pos);
    if (tab == std::string_view::npos) {
      fields.push_back(line.substr(pos));
      return fields;
    }
    fields.push_back(line.substr(pos, tab - pos));
    pos = tab + 1;
  }
}

std::vector<std::string_view> SplitLines(std::string_view text) {
  std::vector<std::string_view> lines;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t nl = text.find('\n', pos);
    if (nl == std::string_view::npos) nl = text.size();
    std::string_view line = text.substr(pos, nl - pos);
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    lines.push_back(line);
    pos = nl + 1;
  }
  return lines;
}

bool IsBlank(std::string_view line) {
  return line.find_first_not_of(" \t") == std::string_view::npos;
}

std::optional<Gender> ParseGender(std::string_view value) {
  if (value == "F") return Gender::kFemale;
  if (value == "M") return Gender::kMale;
  return std::nullopt;
}

}  // namespace

Manifest ParseManifest(std::string_view text,
                       const std::filesystem::path& base_dir) {
  std::vector<std::string_view> lines = SplitLines(text);
  std::size_t i = 0;
  while (i < lines.size() && IsBlank(lines[i])) ++i;
  Manifest manifest;
  if (i == lines.size()) return manifest;  // no header, no rows

  std::vector<std::string_view> header = SplitTabs(lines[i++]);
  std::array<std::size_t, kColumns.size()> index{};
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    std::size_t found = header.size();
    for (std::size_t h = 0; h < header.size(); ++h) {
      if (header[h] == kColumns[c]) {
        found = h;
        break;
      }
    }
    if (found == header.size()) {
      throw ManifestError("manifest header lacks column '" +
                          std::string(kColumns[c]) + "'");
    }
    index[c] = found;
  }

  std::set<std::string, std::less<>> seen_ids;
  for (; i < lines.size(); ++i) {
    if (IsBlank(lines[i])) continue;
    const std::size_t row = ++manifest.row_count;
    std::vector<std::string_view> fields = SplitTabs(lines[i]);
    auto reject = [&](std::string reason) {
      manifest.rejected.push_back({row, std::move(reason)});
    };
    if (fields.size() != header.size()) {
      reject("expected " + std::to_string(header.size()) + " fields, found " +
             std::to_string(fields.size()));
      continue;
    }
    auto field = [&](Column c) { return std::string(fields[index[c]]); };

    ContrastCase c;
    c.case_id = field(kCaseId);
    c.reference_text = field(kReferenceText);
    c.target_word = field(kTargetWord);
    c.foil_word = field(kFoilWord);
    c.category = field(kCategory);
    std::filesystem::path features = field(kFeaturesPath);
    c.features_path = features.is_relative() && !base_dir.empty()
                          ? base_dir / features
                          : features;

    if (c.case_id.empty()) {
      reject("empty case_id");
      continue;
    }
    if (field(kFeaturesPath).empty()) {
      reject("empty features_path");
      continue;
    }
    if (c.target_word.empty() || c.foil_word.empty()) {
      reject("empty target_word or foil_word");
      continue;
    }
    if (c.target_word == c.foil_word) {
      reject("target_word equals foil_word ('" + c.target_word + "')");
      continue;
    }
    std::optional<Gender> gender = ParseGender(fields[index[kGender]]);
    if (!gender) {
      reject("gender_of_target must be F or M, got '" + field(kGender) + "'");
      continue;
    }
    c.gender_of_target = *gender;
    if (!seen_ids.insert(c.case_id).second) {
      reject("duplicate case_id '" + c.case_id + "'");
      continue;
    }
    manifest.cases.push_back(std::move(c));
  }
  return manifest;
}

Manifest LoadManifest(const std::filesystem::path& path) {
  std::string text;
  try {
    text = ReadFileBytes(path);
  } catch (const IoError& e) {
    throw ManifestError(e.what());
  }
  return ParseManifest(text, path.parent_path());
}

std::vector<ContrastCase> LoadManifestStrict(const std::filesystem::path& path) {
  Manifest manifest = LoadManifest(path);
  if (!manifest.rejected.empty()) {
    const ManifestRejection& first = manifest.rejected.front();
    throw ManifestError("manifest row " + std::to_string(first.row) + ": " +
                            first.reason,
                        first.row);
  }
  return std::move(manifest.cases);
}

void SaveManifest(const std::vector<ContrastCase>& cases,
                  const std::filesystem::path& path) {
  std::string out;
  for (std::size_t c = 0; c < kColumns.size(); ++c) {
    if (c > 0) out.push_back('\t');
    out += kColumns[c];
  }
  out.push_back('\n');
  const std::filesystem::path base = path.parent_path();
  for (const ContrastCase& c : cases) {
    std::filesystem::path features = c.features_path;
    if (!base.empty() && features.is_absolute() == base.is_absolute()) {
      std::filesystem::path rel = features.lexically_relative(base);
      if (!rel.empty() && *rel.begin() != "..") features = rel;
    }
    out += c.case_id + '\t' + features.string() + '\t' + c.reference_text + '\t' +
           c.target_word + '\t' + c.foil_word + '\t' +
           std::string(GenderName(c.gender_of_target)) + '\t' + c.category + '\n';
  }
  WriteFileBytes(path, out);
}

}  // namespace cxplain
