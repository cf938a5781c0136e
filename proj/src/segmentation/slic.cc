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

#include "cxplain/segmentation/slic.h"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <utility>

#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

struct Center {
  double frame;
  double bin;
  double intensity;
};

std::vector<double> NormalizedIntensities(const Spectrogram& spec) {
  auto data = spec.data();
  auto [lo, hi] = std::minmax_element(data.begin(), data.end());
  const double min = *lo;
  const double range = static_cast<double>(*hi) - min;
  std::vector<double> out(data.size(), 0.0);
  if (range <= 0.0) return out;
  for (std::size_t i = 0; i < data.size(); ++i) out[i] = (data[i] - min) / range;
  return out;
}

// Separable Gaussian blur with mirrored borders.
void GaussianSmooth(std::vector<double>& values, std::size_t n_frames,
                    std::size_t n_bins, double sigma) {
  const int radius = static_cast<int>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(2 * radius + 1);
  double total = 0.0;
  for (int k = -radius; k <= radius; ++k) {
    kernel[k + radius] = std::exp(-0.5 * k * k / (sigma * sigma));
    total += kernel[k + radius];
  }
  for (double& k : kernel) k /= total;

  auto mirror = [](long i, long n) {
    if (n == 1) return 0L;
    const long period = 2 * (n - 1);
    i = ((i % period) + period) % period;
    return i < n ? i : period - i;
  };
  const long nf = static_cast<long>(n_frames);
  const long nb = static_cast<long>(n_bins);
  std::vector<double> tmp(values.size());
  for (long f = 0; f < nf; ++f) {
    for (long b = 0; b < nb; ++b) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * values[f * nb + mirror(b + k, nb)];
      }
      tmp[f * nb + b] = acc;
    }
  }
  for (long f = 0; f < nf; ++f) {
    for (long b = 0; b < nb; ++b) {
      double acc = 0.0;
      for (int k = -radius; k <= radius; ++k) {
        acc += kernel[k + radius] * tmp[mirror(f + k, nf) * nb + b];
      }
      values[f * nb + b] = acc;
    }
  }
}

// Grid dimensions whose product approximates `k` with the aspect ratio of the
// input.
std::pair<std::size_t, std::size_t> GridShape(std::size_t k, std::size_t n_frames,
                                              std::size_t n_bins) {
  auto clamp = [](double v, std::size_t hi) {
    return std::clamp<std::size_t>(static_cast<std::size_t>(std::llround(v)), 1, hi);
  };
  std::size_t rows = clamp(std::sqrt(static_cast<double>(k) * n_frames / n_bins),
                           n_frames);
  std::size_t cols = clamp(static_cast<double>(k) / rows, n_bins);
  rows = clamp(static_cast<double>(k) / cols, n_frames);
  return {rows, cols};
}

class UnionFind {
 public:
  explicit UnionFind(std::size_t n) : parent_(n) {
    for (std::size_t i = 0; i < n; ++i) parent_[i] = i;
  }
  std::size_t Find(std::size_t x) {
    while (parent_[x] != x) {
      parent_[x] = parent_[parent_[x]];
      x = parent_[x];
    }
    return x;
  }
  // Attaches a's tree under b.
  void Attach(std::size_t a, std::size_t b) { parent_[Find(a)] = Find(b); }

 private:
  std::vector<std::size_t> parent_;
};

// Splits raw cluster labels into 4-connected components, folds orphaned
// components smaller than `min_size` into their largest neighbour, and
// relabels densely in row-major order of first appearance.
std::vector<std::int32_t> EnforceConnectivity(const std::vector<std::int32_t>& raw,
                                              std::size_t n_frames,
                                              std::size_t n_bins,
                                              double min_size,
                                              std::size_t* n_segments) {
  const std::size_t n = raw.size();
  std::vector<std::int32_t> comp(n, -1);
  std::vector<std::vector<std::size_t>> cells;
  std::deque<std::size_t> queue;
  for (std::size_t start = 0; start < n; ++start) {
    if (comp[start] >= 0) continue;
    const auto id = static_cast<std::int32_t>(cells.size());
    cells.emplace_back();
    comp[start] = id;
    queue.push_back(start);
    while (!queue.empty()) {
      const std::size_t cell = queue.front();
      queue.pop_front();
      cells[id].push_back(cell);
      const std::size_t f = cell / n_bins;
      const std::size_t b = cell % n_bins;
      auto visit = [&](std::size_t other) {
        if (comp[other] < 0 && raw[other] == raw[cell]) {
          comp[other] = id;
          queue.push_back(other);
        }
      };
      if (f > 0) visit(cell - n_bins);
      if (f + 1 < n_frames) visit(cell + n_bins);
      if (b > 0) visit(cell - 1);
      if (b + 1 < n_bins) visit(cell + 1);
    }
  }

  const std::size_t n_comp = cells.size();
  UnionFind groups(n_comp);
  std::vector<std::size_t> size(n_comp);
  for (std::size_t c = 0; c < n_comp; ++c) size[c] = cells[c].size();

  // The largest component of each cluster is its segment; the rest are
  // orphans, and only small orphans are folded away.
  std::vector<bool> orphan(n_comp, true);
  {
    std::vector<std::size_t> primary(n_comp, n_comp);  // indexed by cluster
    for (std::size_t c = 0; c < n_comp; ++c) {
      const auto cluster = static_cast<std::size_t>(raw[cells[c].front()]);
      if (cluster >= primary.size()) primary.resize(cluster + 1, n_comp);
      if (primary[cluster] == n_comp || size[c] > size[primary[cluster]]) {
        primary[cluster] = c;
      }
    }
    for (std::size_t p : primary) {
      if (p != n_comp) orphan[p] = false;
    }
  }

  auto fold_orphans = [&](double threshold) {
    bool changed = true;
    while (changed) {
      changed = false;
      for (std::size_t c = 0; c < n_comp; ++c) {
        if (groups.Find(c) != c || !orphan[c] ||
            static_cast<double>(size[c]) >= threshold) {
          continue;
        }
        std::size_t best = n_comp;
        for (std::size_t cell : cells[c]) {
          const std::size_t f = cell / n_bins;
          const std::size_t b = cell % n_bins;
          auto consider = [&](std::size_t other) {
            const std::size_t root = groups.Find(comp[other]);
            if (root == c) return;
            if (best == n_comp || size[root] > size[best] ||
                (size[root] == size[best] && root < best)) {
              best = root;
            }
          };
          if (f > 0) consider(cell - n_bins);
          if (f + 1 < n_frames) consider(cell + n_bins);
          if (b > 0) consider(cell - 1);
          if (b + 1 < n_bins) consider(cell + 1);
        }
        if (best == n_comp) continue;  // the whole grid is one component
        groups.Attach(c, best);
        size[best] += size[c];
        cells[best].insert(cells[best].end(), cells[c].begin(), cells[c].end());
        cells[c].clear();
        changed = true;
      }
    }
  };
  fold_orphans(min_size);
  // Orphans that survive the size rule would each add a segment beyond the
  // cluster count; fold them as well so the count tracks the request.
  fold_orphans(std::numeric_limits<double>::infinity());

  std::vector<std::int32_t> dense(n_comp, -1);
  std::vector<std::int32_t> labels(n);
  std::int32_t next = 0;
  for (std::size_t cell = 0; cell < n; ++cell) {
    const std::size_t root = groups.Find(comp[cell]);
    if (dense[root] < 0) dense[root] = next++;
    labels[cell] = dense[root];
  }
  *n_segments = static_cast<std::size_t>(next);
  return labels;
}

}  // namespace

void SegmentationConfig::Validate() const {
  if (level_targets.empty()) throw ArgumentError("level_targets must not be empty");
  for (std::size_t t : level_targets) {
    if (t == 0) throw ArgumentError("level targets must be positive");
  }
  if (frame_threshold == 0) throw ArgumentError("frame_threshold must be positive");
  if (!(compactness > 0.0)) throw ArgumentError("compactness must be positive");
  if (max_iterations == 0) throw ArgumentError("max_iterations must be at least 1");
  if (!(smoothing_sigma >= 0.0)) {
    throw ArgumentError("smoothing_sigma must be non-negative");
  }
}

std::size_t EffectiveSegmentCount(std::size_t n_frames, std::size_t base_count,
                                  std::size_t frame_threshold) {
  const double frames = static_cast<double>(std::min(n_frames, frame_threshold));
  const double scaled = static_cast<double>(base_count) * frames /
                        static_cast<double>(frame_threshold);
  return std::max<std::size_t>(1, static_cast<std::size_t>(std::llround(scaled)));
}

SegmentMap SlicSegment(const Spectrogram& spec, std::size_t n_segments,
                       const SegmentationConfig& config) {
  config.Validate();
  const std::size_t n_frames = spec.n_frames();
  const std::size_t n_bins = spec.n_bins();
  const std::size_t n_cells = spec.num_cells();
  if (n_segments == 0 || n_segments > n_cells) {
    throw ArgumentError("cannot split " + std::to_string(n_cells) + " cells into " +
                        std::to_string(n_segments) + " segments");
  }

  std::vector<double> intensity = NormalizedIntensities(spec);
  if (config.smoothing_sigma > 0.0) {
    GaussianSmooth(intensity, n_frames, n_bins, config.smoothing_sigma);
  }
  auto value = [&](long f, long b) { return intensity[f * n_bins + b]; };

  const double step = std::sqrt(static_cast<double>(n_cells) / n_segments);
  const auto [rows, cols] = GridShape(n_segments, n_frames, n_bins);
  const double row_spacing = static_cast<double>(n_frames) / rows;
  const double col_spacing = static_cast<double>(n_bins) / cols;

  // Seed on the grid, then nudge each seed to the lowest-gradient cell of its
  // 3x3 neighbourhood so seeds do not sit on edges.
  auto gradient = [&](long f, long b) {
    const long nf = static_cast<long>(n_frames), nb = static_cast<long>(n_bins);
    const double df = value(std::min(f + 1, nf - 1), b) - value(std::max(f - 1, 0L), b);
    const double db = value(f, std::min(b + 1, nb - 1)) - value(f, std::max(b - 1, 0L));
    return df * df + db * db;
  };
  std::vector<Center> centers;
  centers.reserve(rows * cols);
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      long f = static_cast<long>((r + 0.5) * row_spacing);
      long b = static_cast<long>((c + 0.5) * col_spacing);
      long best_f = f, best_b = b;
      double best_grad = gradient(f, b);
      for (long df = -1; df <= 1; ++df) {
        for (long db = -1; db <= 1; ++db) {
          const long ff = f + df, bb = b + db;
          if (ff < 0 || bb < 0 || ff >= static_cast<long>(n_frames) ||
              bb >= static_cast<long>(n_bins)) {
            continue;
          }
          const double g = gradient(ff, bb);
          if (g < best_grad) {
            best_grad = g;
            best_f = ff;
            best_b = bb;
          }
        }
      }
      centers.push_back({static_cast<double>(best_f), static_cast<double>(best_b),
                         value(best_f, best_b)});
    }
  }

  const double spatial_weight = (config.compactness / step) * (config.compactness / step);
  const long half_f = static_cast<long>(std::ceil(std::max(step, row_spacing)));
  const long half_b = static_cast<long>(std::ceil(std::max(step, col_spacing)));
  auto distance = [&](const Center& k, long f, long b) {
    const double di = value(f, b) - k.intensity;
    const double dfr = f - k.frame;
    const double dbn = b - k.bin;
    return di * di + spatial_weight * (dfr * dfr + dbn * dbn);
  };

  std::vector<std::int32_t> labels(n_cells, -1);
  std::vector<double> best(n_cells);
  for (std::size_t iter = 0; iter < config.max_iterations; ++iter) {
    std::fill(best.begin(), best.end(), std::numeric_limits<double>::infinity());
    std::vector<std::int32_t> next(n_cells, -1);
    for (std::size_t k = 0; k < centers.size(); ++k) {
      const Center& center = centers[k];
      const long cf = std::lround(center.frame);
      const long cb = std::lround(center.bin);
      const long f0 = std::max(0L, cf - half_f);
      const long f1 = std::min(static_cast<long>(n_frames) - 1, cf + half_f);
      const long b0 = std::max(0L, cb - half_b);
      const long b1 = std::min(static_cast<long>(n_bins) - 1, cb + half_b);
      for (long f = f0; f <= f1; ++f) {
        for (long b = b0; b <= b1; ++b) {
          const std::size_t cell = f * n_bins + b;
          const double d = distance(center, f, b);
          // Strict comparison: on ties the lower cluster index keeps the cell.
          if (d < best[cell]) {
            best[cell] = d;
            next[cell] = static_cast<std::int32_t>(k);
          }
        }
      }
    }
    // Cells outside every window go to the globally nearest center.
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      if (next[cell] >= 0) continue;
      const long f = static_cast<long>(cell / n_bins);
      const long b = static_cast<long>(cell % n_bins);
      for (std::size_t k = 0; k < centers.size(); ++k) {
        const double d = distance(centers[k], f, b);
        if (d < best[cell]) {
          best[cell] = d;
          next[cell] = static_cast<std::int32_t>(k);
        }
      }
    }
    const bool converged = next == labels;
    labels = std::move(next);
    if (converged) break;

    std::vector<Center> sums(centers.size(), Center{0.0, 0.0, 0.0});
    std::vector<std::size_t> counts(centers.size(), 0);
    for (std::size_t cell = 0; cell < n_cells; ++cell) {
      const auto k = static_cast<std::size_t>(labels[cell]);
      sums[k].frame += static_cast<double>(cell / n_bins);
      sums[k].bin += static_cast<double>(cell % n_bins);
      sums[k].intensity += intensity[cell];
      ++counts[k];
    }
    for (std::size_t k = 0; k < centers.size(); ++k) {
      if (counts[k] == 0) continue;
      const double inv = 1.0 / static_cast<double>(counts[k]);
      centers[k] = {sums[k].frame * inv, sums[k].bin * inv, sums[k].intensity * inv};
    }
  }

  SegmentMap map;
  map.n_frames = n_frames;
  map.n_bins = n_bins;
  const double min_size = static_cast<double>(n_cells) / (4.0 * n_segments);
  map.labels = EnforceConnectivity(labels, n_frames, n_bins, min_size, &map.n_segments);
  return map;
}

std::vector<SegmentMap> MultiLevelSegment(const Spectrogram& spec,
                                          const SegmentationConfig& config) {
  config.Validate();
  std::vector<SegmentMap> levels;
  levels.reserve(config.level_targets.size());
  for (std::size_t target : config.level_targets) {
    std::size_t k = EffectiveSegmentCount(spec.n_frames(), target, config.frame_threshold);
    k = std::min(k, spec.num_cells());
    levels.push_back(SlicSegment(spec, k, config));
  }
  return levels;
}

std::string CheckSegmentMap(const SegmentMap& map) {
  const std::size_t n = map.labels.size();
  if (n != map.n_frames * map.n_bins) return "label matrix has the wrong size";
  if (map.n_segments == 0) return "no segments";
  std::vector<std::size_t> count(map.n_segments, 0);
  std::vector<std::size_t> first(map.n_segments, n);
  for (std::size_t cell = 0; cell < n; ++cell) {
    const std::int32_t label = map.labels[cell];
    if (label < 0 || static_cast<std::size_t>(label) >= map.n_segments) {
      return "label " + std::to_string(label) + " out of range at cell " +
             std::to_string(cell);
    }
    if (count[label]++ == 0) first[label] = cell;
  }
  std::vector<bool> seen(n, false);
  std::deque<std::size_t> queue;
  for (std::size_t s = 0; s < map.n_segments; ++s) {
    if (count[s] == 0) return "segment " + std::to_string(s) + " is empty";
    std::size_t reached = 0;
    queue.push_back(first[s]);
    seen[first[s]] = true;
    while (!queue.empty()) {
      const std::size_t cell = queue.front();
      queue.pop_front();
      ++reached;
      const std::size_t f = cell / map.n_bins;
      const std::size_t b = cell % map.n_bins;
      auto visit = [&](std::size_t other) {
        if (!seen[other] && map.labels[other] == static_cast<std::int32_t>(s)) {
          seen[other] = true;
          queue.push_back(other);
        }
      };
      if (f > 0) visit(cell - map.n_bins);
      if (f + 1 < map.n_frames) visit(cell + map.n_bins);
      if (b > 0) visit(cell - 1);
      if (b + 1 < map.n_bins) visit(cell + 1);
    }
    if (reached != count[s]) {
      return "segment " + std::to_string(s) + " is not 4-connected";
    }
  }
  return "";
}

std::string SegmentLabelsCsv(const SegmentMap& map) {
  std::string out;
  for (std::size_t f = 0; f < map.n_frames; ++f) {
    for (std::size_t b = 0; b < map.n_bins; ++b) {
      if (b > 0) out.push_back(',');
      out += std::to_string(map.at(f, b));
    }
    out.push_back('\n');
  }
  return out;
}

}  // namespace cxplain
