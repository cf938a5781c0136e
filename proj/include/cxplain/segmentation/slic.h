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

// SLIC over a spectrogram: k-means in (frame, bin, intensity) space with a
// local search window, followed by connectivity enforcement. Intensities are
// min-max normalized to [0, 1] per utterance before clustering.

#ifndef CXPLAIN_SEGMENTATION_SLIC_H_
#define CXPLAIN_SEGMENTATION_SLIC_H_

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "cxplain/core/types.h"

namespace cxplain {

// Per-cell segment labels for one granularity level.
struct SegmentMap {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<std::int32_t> labels;  // row-major, values in [0, n_segments)
  std::size_t n_segments = 0;

  std::int32_t at(std::size_t frame, std::size_t bin) const {
    return labels[frame * n_bins + bin];
  }
  std::size_t num_cells() const { return labels.size(); }
};

struct SegmentationConfig {
  std::vector<std::size_t> level_targets = {2000, 2500, 3000};
  std::size_t frame_threshold = 750;
  double compactness = 0.1;
  std::size_t max_iterations = 10;
  double smoothing_sigma = 0.0;  // 0 disables Gaussian pre-smoothing

  void Validate() const;  // throws ArgumentError
};

// max(1, round(base_count * min(n_frames, frame_threshold) / frame_threshold))
std::size_t EffectiveSegmentCount(std::size_t n_frames, std::size_t base_count,
                                  std::size_t frame_threshold);

// Throws ArgumentError when n_segments is 0 or exceeds the cell count.
SegmentMap SlicSegment(const Spectrogram& spec, std::size_t n_segments,
                       const SegmentationConfig& config);

// One map per level target, each target scaled by EffectiveSegmentCount and
// clamped to the cell count.
std::vector<SegmentMap> MultiLevelSegment(const Spectrogram& spec,
                                          const SegmentationConfig& config);

// Empty string when `map` is a valid partition: labels in range, every label
// used, every segment 4-connected. Otherwise a description of the violation.
std::string CheckSegmentMap(const SegmentMap& map);

// Label matrix as CSV, one frame per line.
std::string SegmentLabelsCsv(const SegmentMap& map);

}  // namespace cxplain

#endif  // CXPLAIN_SEGMENTATION_SLIC_H_
