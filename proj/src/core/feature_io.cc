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

#include "cxplain/core/feature_io.h"

#include <bit>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <fstream>
#include <iterator>
#include <sstream>
#include <vector>

#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

static_assert(std::endian::native == std::endian::little,
              "FBNK codec assumes a little-endian host");

void PutU32(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<char>((v >> (8 * i)) & 0xFF));
}

std::uint32_t GetU32(std::string_view bytes, std::size_t offset) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) {
    v |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[offset + i]))
         << (8 * i);
  }
  return v;
}

std::string EncodeHeader(std::size_t n_frames, std::size_t n_bins) {
  if (n_frames > UINT32_MAX || n_bins > UINT32_MAX) {
    throw ArgumentError("matrix too large for FBNK header");
  }
  std::string out(kFbnkMagic);
  out.push_back(static_cast<char>(kFbnkVersion));
  PutU32(out, static_cast<std::uint32_t>(n_frames));
  PutU32(out, static_cast<std::uint32_t>(n_bins));
  return out;
}

void AppendFloat(std::string& out, float value) {
  char buf[sizeof(float)];
  std::memcpy(buf, &value, sizeof(float));
  out.append(buf, sizeof(float));
}

void AppendValue(std::string& out, double value) {
  char buf[32];
  auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value,
                                 std::chars_format::general, 17);
  out.append(buf, ptr);
}

}  // namespace

FeatureFormat FormatForPath(const std::filesystem::path& path) {
  return path.extension() == ".csv" ? FeatureFormat::kCsv : FeatureFormat::kBinary;
}

std::string ReadFileBytes(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "' for reading");
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  if (in.bad()) throw IoError("read failure on '" + path.string() + "'");
  return bytes;
}

void WriteFileBytes(const std::filesystem::path& path, std::string_view bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open '" + path.string() + "' for writing");
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  out.flush();
  if (!out) throw IoError("write failure on '" + path.string() + "'");
}

std::string EncodeFbnk(const Spectrogram& spec) {
  std::string out = EncodeHeader(spec.n_frames(), spec.n_bins());
  out.reserve(kFbnkHeaderSize + spec.num_cells() * sizeof(float));
  for (float v : spec.data()) AppendFloat(out, v);
  return out;
}

std::string EncodeFbnkMatrix(std::size_t n_frames, std::size_t n_bins,
                             std::span<const double> values) {
  if (values.size() != n_frames * n_bins) {
    throw ArgumentError("matrix payload does not match its dimensions");
  }
  std::string out = EncodeHeader(n_frames, n_bins);
  out.reserve(kFbnkHeaderSize + values.size() * sizeof(float));
  for (double v : values) AppendFloat(out, static_cast<float>(v));
  return out;
}

Spectrogram DecodeFbnk(std::string_view bytes) {
  using Kind = ParseError::Kind;
  if (bytes.size() < kFbnkHeaderSize) {
    throw ParseError(Kind::kMalformed, "FBNK header truncated");
  }
  if (bytes.substr(0, 4) != kFbnkMagic) {
    throw ParseError(Kind::kMalformed, "bad FBNK magic");
  }
  if (static_cast<std::uint8_t>(bytes[4]) != kFbnkVersion) {
    throw ParseError(Kind::kMalformed,
                     "unsupported FBNK version " +
                         std::to_string(static_cast<std::uint8_t>(bytes[4])));
  }
  const std::uint64_t n_frames = GetU32(bytes, 5);
  const std::uint64_t n_bins = GetU32(bytes, 9);
  if (n_frames == 0 || n_bins == 0) {
    throw ParseError(Kind::kMalformed, "FBNK header declares an empty matrix");
  }
  const std::uint64_t expected = n_frames * n_bins * sizeof(float);
  const std::uint64_t payload = bytes.size() - kFbnkHeaderSize;
  if (payload != expected) {
    throw ParseError(Kind::kDimensionMismatch,
                     "FBNK header declares " + std::to_string(n_frames) + "x" +
                         std::to_string(n_bins) + " but payload holds " +
                         std::to_string(payload) + " bytes");
  }
  std::vector<float> data(n_frames * n_bins);
  std::memcpy(data.data(), bytes.data() + kFbnkHeaderSize, expected);
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (!std::isfinite(data[i])) {
      throw ParseError(Kind::kNonFinite,
                       "non-finite value at cell " + std::to_string(i));
    }
  }
  return Spectrogram(n_frames, n_bins, std::move(data));
}

std::string EncodeCsv(std::size_t n_frames, std::size_t n_bins,
                      std::span<const double> values) {
  if (values.size() != n_frames * n_bins) {
    throw ArgumentError("matrix payload does not match its dimensions");
  }
  std::string out;
  for (std::size_t f = 0; f < n_frames; ++f) {
    for (std::size_t b = 0; b < n_bins; ++b) {
      if (b > 0) out.push_back(',');
      AppendValue(out, values[f * n_bins + b]);
    }
    out.push_back('\n');
  }
  return out;
}

Spectrogram DecodeCsv(std::string_view text) {
  using Kind = ParseError::Kind;
  std::vector<float> data;
  std::size_t n_bins = 0;
  std::size_t n_frames = 0;
  std::size_t line_start = 0;
  while (line_start < text.size()) {
    std::size_t line_end = text.find('\n', line_start);
    if (line_end == std::string_view::npos) line_end = text.size();
    std::string_view line = text.substr(line_start, line_end - line_start);
    line_start = line_end + 1;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.find_first_not_of(" \t") == std::string_view::npos) continue;

    std::size_t fields = 0;
    std::size_t pos = 0;
    while (true) {
      std::size_t comma = line.find(',', pos);
      std::string_view field = line.substr(
          pos, comma == std::string_view::npos ? std::string_view::npos
                                               : comma - pos);
      while (!field.empty() && (field.front() == ' ' || field.front() == '\t')) {
        field.remove_prefix(1);
      }
      while (!field.empty() && (field.back() == ' ' || field.back() == '\t')) {
        field.remove_suffix(1);
      }
      double value = 0.0;
      auto [ptr, ec] =
          std::from_chars(field.data(), field.data() + field.size(), value);
      if (field.empty() || ec != std::errc() || ptr != field.data() + field.size()) {
        throw ParseError(Kind::kMalformed, "row " + std::to_string(n_frames + 1) +
                                               ": cannot parse '" +
                                               std::string(field) + "'");
      }
      if (!std::isfinite(value)) {
        throw ParseError(Kind::kNonFinite, "row " + std::to_string(n_frames + 1) +
                                               ": non-finite value");
      }
      data.push_back(static_cast<float>(value));
      ++fields;
      if (comma == std::string_view::npos) break;
      pos = comma + 1;
    }
    if (n_frames == 0) {
      n_bins = fields;
    } else if (fields != n_bins) {
      throw ParseError(Kind::kDimensionMismatch,
                       "row " + std::to_string(n_frames + 1) + " has " +
                           std::to_string(fields) + " values, expected " +
                           std::to_string(n_bins));
    }
    ++n_frames;
  }
  if (n_frames == 0) throw ParseError(Kind::kMalformed, "CSV matrix is empty");
  return Spectrogram(n_frames, n_bins, std::move(data));
}

Spectrogram LoadFeatures(const std::filesystem::path& path, FeatureFormat format) {
  std::string bytes = ReadFileBytes(path);
  return format == FeatureFormat::kBinary ? DecodeFbnk(bytes) : DecodeCsv(bytes);
}

void SaveFeatures(const Spectrogram& spec, const std::filesystem::path& path,
                  FeatureFormat format) {
  if (format == FeatureFormat::kBinary) {
    WriteFileBytes(path, EncodeFbnk(spec));
    return;
  }
  std::vector<double> values(spec.data().begin(), spec.data().end());
  WriteFileBytes(path, EncodeCsv(spec.n_frames(), spec.n_bins(), values));
}

}  // namespace cxplain
