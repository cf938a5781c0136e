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

// Occlusion masks over segments. Sampling uses a counter-based generator so
// that mask (level, index) depends only on the seed, never on the order in
// which masks are produced.

#ifndef CXPLAIN_PERTURBATION_MASKS_H_
#define CXPLAIN_PERTURBATION_MASKS_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "cxplain/core/types.h"
#include "cxplain/perturbation/rle.h"
#include "cxplain/segmentation/slic.h"

namespace cxplain {

struct PerturbationMask {
  std::size_t level_index = 0;
  std::vector<std::int32_t> masked_segments;  // sorted, unique

  bool Contains(std::int32_t segment) const;
  bool operator==(const PerturbationMask& other) const = default;
};

inline constexpr std::uint64_t kDefaultSeed = 1234;

struct PerturbationPlan {
  std::size_t n_masks_total = 20000;
  double mask_probability = 0.5;
  std::uint64_t seed = kDefaultSeed;
  std::vector<std::size_t> masks_per_level;

  // Even split of n_masks_total over n_levels; the first
  // n_masks_total % n_levels levels get one extra mask.
  static std::vector<std::size_t> EvenSplit(std::size_t n_masks_total,
                                            std::size_t n_levels);
  // Plan with masks_per_level = EvenSplit(n_masks_total, n_levels).
  static PerturbationPlan ForLevels(std::size_t n_levels,
                                    std::size_t n_masks_total = 20000,
                                    double mask_probability = 0.5,
                                    std::uint64_t seed = kDefaultSeed);

  void Validate() const;  // throws ArgumentError
};

inline constexpr int kMaxRedraws = 100;

// Keyed hash -> uniform double in [0, 1). Pure function of its arguments.
double MaskUniform(std::uint64_t seed, std::uint64_t level, std::uint64_t mask,
                   std::uint64_t segment, std::uint64_t attempt);

// Mask `mask_index` of level `level_index`. Empty draws are re-drawn with
// attempt = 1, 2, ...; throws DegenerateError after kMaxRedraws attempts.
PerturbationMask SampleMask(std::size_t level_index, std::size_t n_segments,
                            std::size_t mask_index, double mask_probability,
                            std::uint64_t seed);

// Level-major: all masks of level 0, then level 1, ...
// Throws ArgumentError for an empty level list or a plan/level mismatch.
std::vector<PerturbationMask> SampleMasks(std::span<const SegmentMap> levels,
                                          const PerturbationPlan& plan);

// Zeroes every cell whose label is in the mask. Throws ArgumentError on a
// shape mismatch or a segment label outside the map.
Spectrogram ApplyMask(const Spectrogram& spec, const SegmentMap& seg,
                      const PerturbationMask& mask);

// Per-cell membership, row-major.
std::vector<bool> MaskCells(const SegmentMap& seg, const PerturbationMask& mask);

RleBitset EncodeMaskCells(const SegmentMap& seg, const PerturbationMask& mask);

}  // namespace cxplain

#endif  // CXPLAIN_PERTURBATION_MASKS_H_
