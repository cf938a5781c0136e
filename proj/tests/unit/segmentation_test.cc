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

#include <set>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "cxplain/core/errors.h"
#include "testing/fixtures.h"
#include "testing/partition.h"

namespace cxplain {
namespace {

using ::testing::Each;
using ::testing::Eq;

TEST(EffectiveSegmentCountTest, Examples) {
  EXPECT_EQ(EffectiveSegmentCount(750, 2000, 750), 2000u);
  EXPECT_EQ(EffectiveSegmentCount(1500, 2000, 750), 2000u);
  // 2000 * 375 / 750
  EXPECT_EQ(EffectiveSegmentCount(375, 2000, 750), 1000u);
  EXPECT_EQ(EffectiveSegmentCount(1, 1, 750), 1u);
  EXPECT_EQ(EffectiveSegmentCount(100, 2500, 750), 333u);
}

TEST(SlicTest, UniformInputSingleSegment) {
  Spectrogram spec(2, 2, {0.7f, 0.7f, 0.7f, 0.7f});
  SegmentMap map = SlicSegment(spec, 1, SegmentationConfig{});
  EXPECT_EQ(map.n_segments, 1u);
  EXPECT_THAT(map.labels, Each(Eq(0)));
}

TEST(SlicTest, TwoBlocksRecovered) {
  std::vector<float> data(64);
  for (std::size_t f = 0; f < 8; ++f) {
    for (std::size_t b = 4; b < 8; ++b) data[f * 8 + b] = 1.0f;
  }
  SegmentationConfig config;
  config.compactness = 1e-3;
  SegmentMap map = SlicSegment(Spectrogram(8, 8, data), 2, config);
  ASSERT_EQ(map.n_segments, 2u);
  for (std::size_t f = 0; f < 8; ++f) {
    for (std::size_t b = 0; b < 8; ++b) {
      EXPECT_EQ(map.at(f, b), b < 4 ? 0 : 1) << f << "," << b;
    }
  }
}

TEST(SlicTest, TwoBlocksRecoveredAtDefaultCompactness) {
  std::vector<float> data(64);
  for (std::size_t f = 0; f < 8; ++f) {
    for (std::size_t b = 4; b < 8; ++b) data[f * 8 + b] = 1.0f;
  }
  SegmentMap map = SlicSegment(Spectrogram(8, 8, data), 2, SegmentationConfig{});
  ASSERT_EQ(map.n_segments, 2u);
  for (std::size_t cell = 0; cell < 64; ++cell) {
    EXPECT_EQ(map.labels[cell], cell % 8 < 4 ? 0 : 1);
  }
}

TEST(SlicTest, TooManySegmentsIsArgumentError) {
  EXPECT_THROW(SlicSegment(Spectrogram::Zeros(4, 4), 100, SegmentationConfig{}),
               ArgumentError);
  EXPECT_THROW(SlicSegment(Spectrogram::Zeros(4, 4), 0, SegmentationConfig{}),
               ArgumentError);
}

TEST(SlicTest, EveryCellItsOwnSegment) {
  Spectrogram spec = testing::UniformRandomSpectrogram(3, 4, 5);
  SegmentMap map = SlicSegment(spec, 12, SegmentationConfig{});
  EXPECT_EQ(testing::PartitionViolation(map), "");
}

TEST(SlicTest, ConfigValidation) {
  SegmentationConfig config;
  config.level_targets = {};
  EXPECT_THROW(config.Validate(), ArgumentError);
  config.level_targets = {0};
  EXPECT_THROW(config.Validate(), ArgumentError);
  config = SegmentationConfig{};
  config.max_iterations = 0;
  EXPECT_THROW(config.Validate(), ArgumentError);
  config = SegmentationConfig{};
  config.smoothing_sigma = -1;
  EXPECT_THROW(config.Validate(), ArgumentError);
}

TEST(SlicTest, PartitionConnectivityDeterminism) {
  SegmentationConfig config;
  for (std::uint64_t seed = 0; seed < 6; ++seed) {
    Spectrogram spec = testing::SpeechLikeSpectrogram(60 + 37 * seed, 40, seed);
    for (std::size_t k : {1u, 7u, 50u, 300u}) {
      SegmentMap a = SlicSegment(spec, k, config);
      SegmentMap b = SlicSegment(spec, k, config);
      ASSERT_EQ(testing::PartitionViolation(a), "") << "seed " << seed << " k " << k;
      ASSERT_EQ(CheckSegmentMap(a), "");
      ASSERT_EQ(a.labels, b.labels);
      EXPECT_NEAR(static_cast<double>(a.n_segments), k, 0.2 * k + 1e-9)
          << "seed " << seed;
    }
  }
}

TEST(SlicTest, SmoothingStillPartitions) {
  SegmentationConfig config;
  config.smoothing_sigma = 1.5;
  Spectrogram spec = testing::SpeechLikeSpectrogram(90, 40, 3);
  SegmentMap map = SlicSegment(spec, 120, config);
  EXPECT_EQ(testing::PartitionViolation(map), "");
}

TEST(MultiLevelTest, DefaultLevelsAt750Frames) {
  Spectrogram spec = testing::SpeechLikeSpectrogram(750, 80, 1);
  std::vector<SegmentMap> levels = MultiLevelSegment(spec, SegmentationConfig{});
  ASSERT_EQ(levels.size(), 3u);
  const double targets[] = {2000, 2500, 3000};
  for (int i = 0; i < 3; ++i) {
    EXPECT_EQ(testing::PartitionViolation(levels[i]), "");
    EXPECT_NEAR(static_cast<double>(levels[i].n_segments), targets[i], 0.2 * targets[i]);
  }
}

TEST(MultiLevelTest, ShortInputScalesEachLevel) {
  Spectrogram spec = testing::SpeechLikeSpectrogram(375, 80, 2);
  std::vector<SegmentMap> levels = MultiLevelSegment(spec, SegmentationConfig{});
  const double targets[] = {1000, 1250, 1500};
  for (int i = 0; i < 3; ++i) {
    EXPECT_NEAR(static_cast<double>(levels[i].n_segments), targets[i], 0.2 * targets[i]);
  }
}

TEST(MultiLevelTest, SingleUnitLevel) {
  SegmentationConfig config;
  config.level_targets = {1};
  std::vector<SegmentMap> levels =
      MultiLevelSegment(testing::SpeechLikeSpectrogram(30, 8, 4), config);
  ASSERT_EQ(levels.size(), 1u);
  EXPECT_EQ(levels[0].n_segments, 1u);
  EXPECT_THAT(levels[0].labels, Each(Eq(0)));
}

TEST(MultiLevelTest, TargetClampedToCellCount) {
  std::vector<SegmentMap> levels =
      MultiLevelSegment(testing::SpeechLikeSpectrogram(5, 4, 4), SegmentationConfig{});
  for (const SegmentMap& m : levels) EXPECT_EQ(testing::PartitionViolation(m), "");
}

TEST(SegmentLabelsCsvTest, OneFramePerLine) {
  SegmentMap map{2, 2, {0, 0, 1, 1}, 2};
  EXPECT_EQ(SegmentLabelsCsv(map), "0,0\n1,1\n");
}

TEST(CheckSegmentMapTest, FlagsViolations) {
  EXPECT_NE(CheckSegmentMap(SegmentMap{1, 3, {0, 1, 0}, 2}), "");  // disconnected
  EXPECT_NE(CheckSegmentMap(SegmentMap{1, 2, {0, 0}, 2}), "");     // empty label
  EXPECT_NE(CheckSegmentMap(SegmentMap{1, 2, {0, 2}, 2}), "");     // out of range
  EXPECT_EQ(CheckSegmentMap(SegmentMap{2, 2, {0, 1, 0, 1}, 2}), "");
}

}  // namespace
}  // namespace cxplain
