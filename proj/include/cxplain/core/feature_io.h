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

// Feature matrix serialization.
//
// FBNK binary layout (all little-endian):
//   bytes 0-3   "FBNK"
//   byte  4     format version (1)
//   bytes 5-8   n_frames, uint32
//   bytes 9-12  n_bins, uint32
//   then n_frames * n_bins float32 values, row-major by frame.
//
// CSV layout: one frame per line, bins separated by commas, values printed
// with 17 significant digits.

#ifndef CXPLAIN_CORE_FEATURE_IO_H_
#define CXPLAIN_CORE_FEATURE_IO_H_

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <string_view>

#include "cxplain/core/types.h"

namespace cxplain {

enum class FeatureFormat { kBinary, kCsv };

inline constexpr std::string_view kFbnkMagic = "FBNK";
inline constexpr std::uint8_t kFbnkVersion = 1;
inline constexpr std::size_t kFbnkHeaderSize = 13;

// Guesses the format from the extension: ".csv" is CSV, anything else FBNK.
FeatureFormat FormatForPath(const std::filesystem::path& path);

Spectrogram LoadFeatures(const std::filesystem::path& path, FeatureFormat format);
void SaveFeatures(const Spectrogram& spec, const std::filesystem::path& path,
                  FeatureFormat format);

// In-memory codecs; the FBNK bytes are what travels (base64) on the wire.
std::string EncodeFbnk(const Spectrogram& spec);
Spectrogram DecodeFbnk(std::string_view bytes);

// Same header, arbitrary float payload. Used for saliency score export.
std::string EncodeFbnkMatrix(std::size_t n_frames, std::size_t n_bins,
                             std::span<const double> values);

std::string EncodeCsv(std::size_t n_frames, std::size_t n_bins,
                      std::span<const double> values);
Spectrogram DecodeCsv(std::string_view text);

std::string ReadFileBytes(const std::filesystem::path& path);
void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes);

}  // namespace cxplain

#endif  // CXPLAIN_CORE_FEATURE_IO_H_
