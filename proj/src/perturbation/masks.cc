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

#include "cxplain/perturbation/masks.h"

#include <algorithm>
#include <numeric>

#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

// splitmix64 finalizer.
std::uint64_t Mix(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;

}  // namespace

bool PerturbationMask::Contains(std::int32_t segment) const {
  return std::binary_search(masked_segments.begin(), masked_segments.end(), segment);
}

std::vector<std::size_t> PerturbationPlan::EvenSplit(std::size_t n_masks_total,
                                                     std::size_t n_levels) {
  if (n_levels == 0) throw ArgumentError("no segmentation levels");
  std::vector<std::size_t> split(n_levels, n_masks_total / n_levels);
  for (std::size_t i = 0; i < n_masks_total % n_levels; ++i) ++split[i];
  return split;
}

PerturbationPlan PerturbationPlan::ForLevels(std::size_t n_levels,
                                             std::size_t n_masks_total,
                                             double mask_probability,
                                             std::uint64_t seed) {
  PerturbationPlan plan;
  plan.n_masks_total = n_masks_total;
  plan.mask_probability = mask_probability;
  plan.seed = seed;
  plan.masks_per_level = EvenSplit(n_masks_total, n_levels);
  return plan;
}

void PerturbationPlan::Validate() const {
  if (!(mask_probability > 0.0 && mask_probability < 1.0)) {
    throw ArgumentError("mask_probability must lie in (0, 1)");
  }
  if (masks_per_level.empty()) throw ArgumentError("masks_per_level is empty");
  const std::size_t sum =
      std::accumulate(masks_per_level.begin(), masks_per_level.end(), std::size_t{0});
  if (sum != n_masks_total) {
    throw ArgumentError("masks_per_level sums to " + std::to_string(sum) +
                        ", expected n_masks_total " + std::to_string(n_masks_total));
  }
}

double MaskUniform(std::uint64_t seed, std::uint64_t level, std::uint64_t mask,
                   std::uint64_t segment, std::uint64_t attempt) {
  std::uint64_t h = Mix(seed + kGolden);
  h = Mix(h ^ (level + 1) * kGolden);
  h = Mix(h ^ (mask + 1) * kGolden);
  h = Mix(h ^ (segment + 1) * kGolden);
  h = Mix(h ^ (attempt + 1) * kGolden);
  return static_cast<double>(h >> 11) * 0x1.0p-53;
}

PerturbationMask SampleMask(std::size_t level_index, std::size_t n_segments,
                            std::size_t mask_index, double mask_probability,
                            std::uint64_t seed) {
  PerturbationMask mask;
  mask.level_index = level_index;
  for (int attempt = 0; attempt < kMaxRedraws; ++attempt) {
    for (std::size_t s = 0; s < n_segments; ++s) {
      if (MaskUniform(seed, level_index, mask_index, s, attempt) < mask_probability) {
        mask.masked_segments.push_back(static_cast<std::int32_t>(s));
      }
    }
    if (!mask.masked_segments.empty()) return mask;
  }
  throw DegenerateError("mask " + std::to_string(mask_index) + " of level " +
                        std::to_string(level_index) + " stayed empty after " +
                        std::to_string(kMaxRedraws) + " draws");
}

std::vector<PerturbationMask> SampleMasks(std::span<const SegmentMap> levels,
                                          const PerturbationPlan& plan) {
  if (levels.empty()) throw ArgumentError("no segmentation levels");
  plan.Validate();
  if (plan.masks_per_level.size() != levels.size()) {
    throw ArgumentError("plan has " + std::to_string(plan.masks_per_level.size()) +
                        " level counts for " + std::to_string(levels.size()) +
                        " levels");
  }
  std::vector<PerturbationMask> masks;
  masks.reserve(plan.n_masks_total);
  for (std::size_t level = 0; level < levels.size(); ++level) {
    for (std::size_t m = 0; m < plan.masks_per_level[level]; ++m) {
      masks.push_back(SampleMask(level, levels[level].n_segments, m,
                                 plan.mask_probability, plan.seed));
    }
  }
  return masks;
}

std::vector<bool> MaskCells(const SegmentMap& seg, const PerturbationMask& mask) {
  std::vector<bool> member(seg.n_segments, false);
  for (std::int32_t s : mask.masked_segments) {
    if (s < 0 || static_cast<std::size_t>(s) >= seg.n_segments) {
      throw ArgumentError("mask segment " + std::to_string(s) + " not in the map");
    }
    member[s] = true;
  }
  std::vector<bool> cells(seg.labels.size());
  for (std::size_t i = 0; i < cells.size(); ++i) cells[i] = member[seg.labels[i]];
  return cells;
}

Spectrogram ApplyMask(const Spectrogram& spec, const SegmentMap& seg,
                      const PerturbationMask& mask) {
  if (spec.n_frames() != seg.n_frames || spec.n_bins() != seg.n_bins) {
    throw ArgumentError("segment map shape does not match the spectrogram");
  }
  std::vector<bool> cells = MaskCells(seg, mask);
  std::vector<float> data(spec.data().begin(), spec.data().end());
  for (std::size_t i = 0; i < data.size(); ++i) {
    if (cells[i]) data[i] = 0.0f;
  }
  return Spectrogram(spec.n_frames(), spec.n_bins(), std::move(data));
}

RleBitset EncodeMaskCells(const SegmentMap& seg, const PerturbationMask& mask) {
  return EncodeRle(MaskCells(seg, mask));
}

}  // namespace cxplain
