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

#include "cxplain/attribution/saliency.h"

#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"
#include "cxplain/core/numeric.h"

namespace cxplain {

std::vector<double> AggregateSegmentScores(std::span<const PerturbationMask> masks,
                                           std::span<const double> scores,
                                           const SegmentMap& seg) {
  if (masks.size() != scores.size()) {
    throw ArgumentError(std::to_string(masks.size()) + " masks but " +
                        std::to_string(scores.size()) + " scores");
  }
  std::vector<CompensatedSum> sums(seg.n_segments);
  for (std::size_t i = 0; i < masks.size(); ++i) {
    for (std::int32_t s : masks[i].masked_segments) {
      if (s < 0 || static_cast<std::size_t>(s) >= seg.n_segments) {
        throw ArgumentError("mask names segment " + std::to_string(s) + " of " +
                            std::to_string(seg.n_segments));
      }
      sums[s].Add(scores[i]);
    }
  }
  std::vector<double> out(seg.n_segments);
  for (std::size_t s = 0; s < out.size(); ++s) out[s] = sums[s].Mean();
  return out;
}

SaliencyMap AssembleSaliency(std::span<const SegmentMap> levels,
                             std::span<const std::vector<double>> segment_scores) {
  if (levels.empty()) throw ArgumentError("no segmentation levels to assemble");
  if (levels.size() != segment_scores.size()) {
    throw ArgumentError("one score vector per level is required");
  }
  SaliencyMap map;
  map.n_frames = levels[0].n_frames;
  map.n_bins = levels[0].n_bins;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    if (levels[l].n_frames != map.n_frames || levels[l].n_bins != map.n_bins ||
        levels[l].labels.size() != map.n_frames * map.n_bins) {
      throw ArgumentError("segmentation levels disagree on the spectrogram shape");
    }
    if (segment_scores[l].size() != levels[l].n_segments) {
      throw ArgumentError("level " + std::to_string(l) + " has " +
                          std::to_string(levels[l].n_segments) + " segments but " +
                          std::to_string(segment_scores[l].size()) + " scores");
    }
  }
  map.scores.resize(map.n_frames * map.n_bins);
  for (std::size_t c = 0; c < map.scores.size(); ++c) {
    CompensatedSum sum;
    for (std::size_t l = 0; l < levels.size(); ++l) {
      sum.Add(segment_scores[l][levels[l].labels[c]]);
    }
    map.scores[c] = sum.Mean();
  }
  return map;
}

void SaveSaliency(const SaliencyMap& map, const std::filesystem::path& path) {
  const std::string bytes = FormatForPath(path) == FeatureFormat::kCsv
                                ? EncodeCsv(map.n_frames, map.n_bins, map.scores)
                                : EncodeFbnkMatrix(map.n_frames, map.n_bins, map.scores);
  WriteFileBytes(path, bytes);
}

SaliencyMap LoadSaliency(const std::filesystem::path& path) {
  const Spectrogram s = LoadFeatures(path, FormatForPath(path));
  SaliencyMap map;
  map.n_frames = s.n_frames();
  map.n_bins = s.n_bins();
  map.scores.assign(s.data().begin(), s.data().end());
  return map;
}

}  // namespace cxplain
