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

#include <cmath>
#include <random>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "cxplain/core/errors.h"
#include "cxplain/perturbation/rle.h"
#include "testing/fixtures.h"

namespace cxplain {
namespace {

using ::testing::ElementsAre;

// Row-major labels: segment = frame / rows_per_segment.
SegmentMap Bands(std::size_t n_segments, std::size_t rows_per_segment, std::size_t bins) {
  SegmentMap map;
  map.n_frames = n_segments * rows_per_segment;
  map.n_bins = bins;
  map.n_segments = n_segments;
  for (std::size_t f = 0; f < map.n_frames; ++f) {
    for (std::size_t b = 0; b < bins; ++b) {
      map.labels.push_back(static_cast<std::int32_t>(f / rows_per_segment));
    }
  }
  return map;
}

TEST(PlanTest, EvenSplit) {
  EXPECT_THAT(PerturbationPlan::EvenSplit(20000, 3), ElementsAre(6667, 6667, 6666));
  EXPECT_THAT(PerturbationPlan::EvenSplit(5, 2), ElementsAre(3, 2));
  PerturbationPlan plan = PerturbationPlan::ForLevels(3);
  EXPECT_EQ(plan.n_masks_total, 20000u);
  EXPECT_EQ(plan.mask_probability, 0.5);
  EXPECT_NO_THROW(plan.Validate());
  plan.masks_per_level = {1, 2};
  EXPECT_THROW(plan.Validate(), ArgumentError);
  plan = PerturbationPlan::ForLevels(1, 10, 1.0);
  EXPECT_THROW(plan.Validate(), ArgumentError);
}

TEST(SampleMasksTest, SingleSegmentAlwaysMasked) {
  std::vector<SegmentMap> levels = {Bands(1, 2, 2)};
  PerturbationPlan plan = PerturbationPlan::ForLevels(1, 3, 0.5, 99);
  std::vector<PerturbationMask> masks = SampleMasks(levels, plan);
  ASSERT_EQ(masks.size(), 3u);
  for (const PerturbationMask& m : masks) EXPECT_THAT(m.masked_segments, ElementsAre(0));
}

TEST(SampleMasksTest, EmptyLevelListIsError) {
  std::vector<SegmentMap> none;
  EXPECT_THROW(SampleMasks(none, PerturbationPlan::ForLevels(1, 3)), ArgumentError);
}

TEST(SampleMasksTest, RedrawBudgetExhausted) {
  // p tiny on one segment: 100 consecutive misses are near certain.
  EXPECT_THROW(SampleMask(0, 1, 0, 1e-300, 1), DegenerateError);
}

TEST(SampleMasksTest, DeterministicAndOrderIndependent) {
  std::vector<SegmentMap> levels = {Bands(40, 1, 3), Bands(25, 2, 3)};
  PerturbationPlan plan = PerturbationPlan::ForLevels(2, 500, 0.5, 42);
  std::vector<PerturbationMask> a = SampleMasks(levels, plan);
  std::vector<PerturbationMask> b = SampleMasks(levels, plan);
  EXPECT_EQ(a, b);
  // Any single mask can be regenerated in isolation.
  EXPECT_EQ(SampleMask(1, 25, 17, 0.5, 42), a[250 + 17]);
  plan.seed = 43;
  EXPECT_NE(SampleMasks(levels, plan), a);
}

TEST(SampleMasksTest, MasksAreSortedSubsetsOfTheLevel) {
  std::vector<SegmentMap> levels = {Bands(30, 1, 2)};
  for (const PerturbationMask& m : SampleMasks(levels, PerturbationPlan::ForLevels(1, 200))) {
    EXPECT_TRUE(std::is_sorted(m.masked_segments.begin(), m.masked_segments.end()));
    EXPECT_FALSE(m.masked_segments.empty());
    for (std::int32_t s : m.masked_segments) {
      EXPECT_GE(s, 0);
      EXPECT_LT(s, 30);
    }
  }
}

// Every segment's occlusion rate within 4 binomial standard deviations.
TEST(SampleMasksTest, FrequencyWithinFourSigma) {
  for (double p : {0.5, 0.3}) {
    for (std::uint64_t seed : {1ull, 2ull, 1234ull}) {
      const std::size_t n_masks = 2000, n_segments = 300;
      std::vector<std::size_t> hits(n_segments, 0);
      for (std::size_t m = 0; m < n_masks; ++m) {
        for (std::int32_t s : SampleMask(0, n_segments, m, p, seed).masked_segments) ++hits[s];
      }
      const double sigma = std::sqrt(p * (1 - p) / n_masks);
      for (std::size_t s = 0; s < n_segments; ++s) {
        ASSERT_NEAR(static_cast<double>(hits[s]) / n_masks, p, 4 * sigma)
            << "p " << p << " seed " << seed << " segment " << s;
      }
    }
  }
}

TEST(SampleMasksTest, UniformsLookIndependent) {
  // Mean and lag-1 correlation of consecutive segment draws.
  double sum = 0, sum_xy = 0, prev = MaskUniform(5, 0, 0, 0, 0);
  const int n = 200000;
  for (int i = 1; i <= n; ++i) {
    const double u = MaskUniform(5, 0, i / 1000, i % 1000, 0);
    sum += u;
    sum_xy += (u - 0.5) * (prev - 0.5);
    prev = u;
  }
  EXPECT_NEAR(sum / n, 0.5, 4 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(sum_xy / n / (1.0 / 12), 0.0, 4 / std::sqrt(n));
}

TEST(ApplyMaskTest, FullMaskZeroes) {
  Spectrogram spec = testing::UniformRandomSpectrogram(4, 3, 1);
  SegmentMap seg = Bands(2, 2, 3);
  Spectrogram out = ApplyMask(spec, seg, PerturbationMask{0, {0, 1}});
  for (float v : out.data()) EXPECT_EQ(v, 0.0f);
}

TEST(ApplyMaskTest, EmptyMaskIsIdentity) {
  Spectrogram spec = testing::UniformRandomSpectrogram(4, 3, 1);
  EXPECT_EQ(ApplyMask(spec, Bands(2, 2, 3), PerturbationMask{0, {}}), spec);
}

TEST(ApplyMaskTest, OnlyLabelledCellsZeroed) {
  Spectrogram spec(2, 2, {1.0f, 2.0f, 3.0f, 4.0f});
  SegmentMap seg{2, 2, {0, 1, 1, 0}, 2};
  Spectrogram out = ApplyMask(spec, seg, PerturbationMask{0, {0}});
  EXPECT_THAT(std::vector<float>(out.data().begin(), out.data().end()),
              ElementsAre(0.0f, 2.0f, 3.0f, 0.0f));
  EXPECT_EQ(spec.at(0, 0), 1.0f);
}

TEST(ApplyMaskTest, ShapeMismatch) {
  EXPECT_THROW(ApplyMask(Spectrogram::Zeros(3, 3), Bands(2, 2, 3), PerturbationMask{}),
               ArgumentError);
  EXPECT_THROW(ApplyMask(Spectrogram::Zeros(4, 3), Bands(2, 2, 3), PerturbationMask{0, {5}}),
               ArgumentError);
}

TEST(ApplyMaskTest, NeverIntroducesValuesProperty) {
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 50; ++trial) {
    Spectrogram spec = testing::SpeechLikeSpectrogram(20, 6, trial);
    SegmentMap seg = SlicSegment(spec, 10, SegmentationConfig{});
    PerturbationMask mask = SampleMask(0, seg.n_segments, trial, 0.5, 8);
    Spectrogram out = ApplyMask(spec, seg, mask);
    for (std::size_t i = 0; i < spec.num_cells(); ++i) {
      if (mask.Contains(seg.labels[i])) {
        ASSERT_EQ(out.data()[i], 0.0f);
      } else {
        ASSERT_EQ(out.data()[i], spec.data()[i]);
      }
    }
  }
}

TEST(RleTest, Examples) {
  SegmentMap seg{2, 2, {0, 0, 1, 1}, 2};
  EXPECT_THAT(EncodeMaskCells(seg, PerturbationMask{0, {0, 1}}).runs,
              ElementsAre(RleRun{true, 4}));
  EXPECT_THAT(EncodeMaskCells(seg, PerturbationMask{0, {}}).runs,
              ElementsAre(RleRun{false, 4}));
  EXPECT_THAT(EncodeMaskCells(seg, PerturbationMask{0, {0}}).runs,
              ElementsAre(RleRun{true, 2}, RleRun{false, 2}));
}

TEST(RleTest, RoundTripProperty) {
  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 300; ++trial) {
    std::vector<bool> bits(rng() % 200);
    const double density = (rng() % 100) / 100.0;
    for (std::size_t i = 0; i < bits.size(); ++i) bits[i] = (rng() % 1000) < density * 1000;
    RleBitset rle = EncodeRle(bits);
    ASSERT_EQ(DecodeRle(rle, bits.size()), bits);
    ASSERT_EQ(RleFromBytes(RleToBytes(rle)), rle);
    ASSERT_EQ(rle.size(), bits.size());
    for (std::size_t i = 1; i < rle.runs.size(); ++i) {
      ASSERT_NE(rle.runs[i].bit, rle.runs[i - 1].bit);
    }
  }
}

TEST(RleTest, MaskRoundTripReproducesZeroedCells) {
  Spectrogram spec = testing::SpeechLikeSpectrogram(30, 10, 2);
  SegmentMap seg = SlicSegment(spec, 20, SegmentationConfig{});
  for (std::size_t m = 0; m < 20; ++m) {
    PerturbationMask mask = SampleMask(0, seg.n_segments, m, 0.5, 1);
    std::vector<bool> decoded = DecodeRle(EncodeMaskCells(seg, mask), seg.num_cells());
    Spectrogram zeroed = ApplyMask(Spectrogram(30, 10, std::vector<float>(300, 1.0f)), seg, mask);
    for (std::size_t i = 0; i < decoded.size(); ++i) {
      ASSERT_EQ(decoded[i], zeroed.data()[i] == 0.0f);
    }
  }
}

TEST(RleTest, Errors) {
  EXPECT_THROW(DecodeRle(RleBitset{{{true, 3}}}, 4), ArgumentError);
  EXPECT_THROW(RleFromBytes(std::string("\x01\x02\x00", 3)), ArgumentError);
  EXPECT_THROW(RleFromBytes(std::string("\x02\x01\x00\x00\x00", 5)), ArgumentError);
  EXPECT_EQ(Canonicalize(RleBitset{{{true, 1}, {true, 2}, {false, 0}}}),
            (RleBitset{{{true, 3}}}));
}

}  // namespace
}  // namespace cxplain
