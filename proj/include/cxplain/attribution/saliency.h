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

// From per-mask scores to a per-cell map, and saliency map files.

#ifndef CXPLAIN_ATTRIBUTION_SALIENCY_H_
#define CXPLAIN_ATTRIBUTION_SALIENCY_H_

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "cxplain/core/types.h"
#include "cxplain/perturbation/masks.h"
#include "cxplain/segmentation/slic.h"

namespace cxplain {

// Segment s -> compensated mean of scores[i] over the masks containing s;
// 0 for a segment no mask contains. Throws ArgumentError when the lists
// differ in length or a mask names a segment outside `seg`.
std::vector<double> AggregateSegmentScores(std::span<const PerturbationMask> masks,
                                           std::span<const double> scores,
                                           const SegmentMap& seg);

// Cell value = mean over levels of its segment's score. Throws ArgumentError
// on an empty level list, mismatched shapes, or a score vector whose length
// differs from the level's segment count. Scorer and words are left default.
SaliencyMap AssembleSaliency(std::span<const SegmentMap> levels,
                             std::span<const std::vector<double>> segment_scores);

// FBNK header with float32 scores; CSV with 17 significant digits.
void SaveSaliency(const SaliencyMap& map, const std::filesystem::path& path);
// Scores only (scorer and words are not stored in the file).
SaliencyMap LoadSaliency(const std::filesystem::path& path);

}  // namespace cxplain

#endif  // CXPLAIN_ATTRIBUTION_SALIENCY_H_
