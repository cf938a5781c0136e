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

// Shared helpers for the unit and acceptance tests.

#ifndef CXPLAIN_TESTS_TESTING_FIXTURES_H_
#define CXPLAIN_TESTS_TESTING_FIXTURES_H_

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <random>
#include <string>
#include <vector>

#include "cxplain/core/types.h"

namespace cxplain::testing {

// Filterbank-like log energies: a smooth spectral envelope, a few harmonic
// ridges that drift over time, syllable-rate loudness modulation and noise.
inline Spectrogram SpeechLikeSpectrogram(std::size_t n_frames, std::size_t n_bins,
                                         std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> noise(0.0, 0.6);
  const double f0 = 3.0 + 4.0 * unit(rng);
  const double drift = 0.5 + unit(rng);
  const double syllable = 12.0 + 10.0 * unit(rng);
  std::vector<float> data(n_frames * n_bins);
  for (std::size_t f = 0; f < n_frames; ++f) {
    const double loud = 0.5 + 0.5 * std::sin(2.0 * M_PI * f / syllable);
    const double pitch = f0 + drift * std::sin(2.0 * M_PI * f / 97.0);
    for (std::size_t b = 0; b < n_bins; ++b) {
      const double envelope = -static_cast<double>(b) / n_bins * 3.0;
      const double ridge = std::pow(std::cos(M_PI * b / pitch), 8.0);
      data[f * n_bins + b] =
          static_cast<float>(envelope + 4.0 * loud * ridge + noise(rng));
    }
  }
  return Spectrogram(n_frames, n_bins, std::move(data));
}

inline Spectrogram UniformRandomSpectrogram(std::size_t n_frames, std::size_t n_bins,
                                            std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<float> unit(0.0f, 1.0f);
  std::vector<float> data(n_frames * n_bins);
  for (float& v : data) v = unit(rng);
  return Spectrogram(n_frames, n_bins, std::move(data));
}

// Fresh directory under the system temp dir, removed on destruction.
class ScratchDir {
 public:
  explicit ScratchDir(const std::string& tag) {
    static std::mt19937_64 rng(std::random_device{}());
    path_ = std::filesystem::temp_directory_path() /
            ("cxplain_" + tag + "_" + std::to_string(rng()));
    std::filesystem::create_directories(path_);
  }
  ~ScratchDir() {
    std::error_code ec;
    std::filesystem::remove_all(path_, ec);
  }
  ScratchDir(const ScratchDir&) = delete;
  ScratchDir& operator=(const ScratchDir&) = delete;

  const std::filesystem::path& path() const { return path_; }
  std::filesystem::path operator/(const std::string& name) const { return path_ / name; }

 private:
  std::filesystem::path path_;
};

}  // namespace cxplain::testing

#endif  // CXPLAIN_TESTS_TESTING_FIXTURES_H_
