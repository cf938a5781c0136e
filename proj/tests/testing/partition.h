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

#ifndef CXPLAIN_TESTS_TESTING_PARTITION_H_
#define CXPLAIN_TESTS_TESTING_PARTITION_H_

#include <numeric>
#include <set>
#include <string>
#include <vector>

#include "cxplain/segmentation/slic.h"

namespace cxplain::testing {

// Independent partition check: union-find over equal-label 4-neighbour
// edges, then every label must own exactly one root.
inline std::string PartitionViolation(const SegmentMap& map) {
  const std::size_t n = map.n_frames * map.n_bins;
  if (map.labels.size() != n) return "size";
  std::vector<std::size_t> parent(n);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  };
  for (std::size_t f = 0; f < map.n_frames; ++f) {
    for (std::size_t b = 0; b < map.n_bins; ++b) {
      const std::size_t i = f * map.n_bins + b;
      if (b + 1 < map.n_bins && map.labels[i] == map.labels[i + 1]) {
        parent[find(i)] = find(i + 1);
      }
      if (f + 1 < map.n_frames && map.labels[i] == map.labels[i + map.n_bins]) {
        parent[find(i)] = find(i + map.n_bins);
      }
    }
  }
  std::vector<std::set<std::size_t>> roots(map.n_segments);
  std::size_t histogram_total = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const int label = map.labels[i];
    if (label < 0 || static_cast<std::size_t>(label) >= map.n_segments) return "range";
    roots[label].insert(find(i));
    ++histogram_total;
  }
  if (histogram_total != n) return "histogram";
  for (std::size_t s = 0; s < map.n_segments; ++s) {
    if (roots[s].empty()) return "empty segment " + std::to_string(s);
    if (roots[s].size() != 1) return "disconnected segment " + std::to_string(s);
  }
  return "";
}

}  // namespace cxplain::testing

#endif  // CXPLAIN_TESTS_TESTING_PARTITION_H_
