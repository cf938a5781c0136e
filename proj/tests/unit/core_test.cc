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

#include <cstring>
#include <limits>
#include <random>
#include <string>
#include <vector>

#include "gmock/gmock.h"
#include "gtest/gtest.h"
#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"
#include "cxplain/core/manifest.h"
#include "cxplain/core/types.h"
#include "testing/fixtures.h"

namespace cxplain {
namespace {

using ::testing::ElementsAre;
using ::testing::HasSubstr;

// Hand-assembled FBNK bytes, independent of the encoder.
std::string HandWrittenFbnk(std::uint32_t frames, std::uint32_t bins,
                            const std::vector<float>& values) {
  std::string bytes = "FBNK";
  bytes.push_back('\x01');
  for (std::uint32_t v : {frames, bins}) {
    bytes.push_back(static_cast<char>(v & 0xFF));
    bytes.push_back(static_cast<char>((v >> 8) & 0xFF));
    bytes.push_back(static_cast<char>((v >> 16) & 0xFF));
    bytes.push_back(static_cast<char>((v >> 24) & 0xFF));
  }
  for (float f : values) {
    std::uint32_t bits;
    std::memcpy(&bits, &f, 4);
    for (int i = 0; i < 4; ++i) bytes.push_back(static_cast<char>((bits >> (8 * i)) & 0xFF));
  }
  return bytes;
}

ParseError::Kind DecodeErrorKind(const std::string& bytes) {
  try {
    DecodeFbnk(bytes);
  } catch (const ParseError& e) {
    return e.kind();
  }
  ADD_FAILURE() << "decode succeeded";
  return ParseError::Kind::kMalformed;
}

TEST(SpectrogramTest, RejectsBadShapes) {
  EXPECT_THROW(Spectrogram(0, 3, {}), ArgumentError);
  EXPECT_THROW(Spectrogram(2, 2, {1, 2, 3}), ArgumentError);
  EXPECT_THROW(Spectrogram(1, 1, {std::numeric_limits<float>::infinity()}), ParseError);
}

TEST(FeatureIoTest, DecodesHandWrittenBinary) {
  const std::vector<float> values = {0.5f, -1.25f, 3.0f, 4.5f, 1e-3f, -7.0f};
  Spectrogram spec = DecodeFbnk(HandWrittenFbnk(2, 3, values));
  EXPECT_EQ(spec.n_frames(), 2u);
  EXPECT_EQ(spec.n_bins(), 3u);
  EXPECT_THAT(std::vector<float>(spec.data().begin(), spec.data().end()),
              ::testing::ElementsAreArray(values));
  EXPECT_EQ(spec.at(1, 2), -7.0f);
}

TEST(FeatureIoTest, DecodesCsv) {
  Spectrogram spec = DecodeCsv("1.0,2.0\n3.0,4.0");
  EXPECT_EQ(spec.n_frames(), 2u);
  EXPECT_EQ(spec.n_bins(), 2u);
  EXPECT_THAT(std::vector<float>(spec.data().begin(), spec.data().end()),
              ElementsAre(1.0f, 2.0f, 3.0f, 4.0f));
}

TEST(FeatureIoTest, DistinctParseErrors) {
  // 4 frames declared, 3 rows present.
  EXPECT_EQ(DecodeErrorKind(HandWrittenFbnk(4, 2, {1, 2, 3, 4, 5, 6})),
            ParseError::Kind::kDimensionMismatch);
  EXPECT_EQ(DecodeErrorKind("FBN"), ParseError::Kind::kMalformed);
  EXPECT_EQ(DecodeErrorKind("XBNK" + HandWrittenFbnk(1, 1, {1}).substr(4)),
            ParseError::Kind::kMalformed);
  std::string wrong_version = HandWrittenFbnk(1, 1, {1});
  wrong_version[4] = '\x02';
  EXPECT_EQ(DecodeErrorKind(wrong_version), ParseError::Kind::kMalformed);
  EXPECT_EQ(DecodeErrorKind(HandWrittenFbnk(1, 2, {1, std::nanf("")})),
            ParseError::Kind::kNonFinite);

  EXPECT_THROW(DecodeCsv("1,2\n3"), ParseError);
  try {
    DecodeCsv("1,2\n3");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::kDimensionMismatch);
  }
  try {
    DecodeCsv("1,abc");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::kMalformed);
  }
  try {
    DecodeCsv("1,inf");
  } catch (const ParseError& e) {
    EXPECT_EQ(e.kind(), ParseError::Kind::kNonFinite);
  }
}

TEST(FeatureIoTest, BinaryRoundTripIsExact) {
  testing::ScratchDir dir("core");
  Spectrogram spec(2, 3, {0.1f, 0.2f, 0.3f, -4.0f, 1e30f, -1e-30f});
  SaveFeatures(spec, dir / "a.fbank", FeatureFormat::kBinary);
  EXPECT_EQ(LoadFeatures(dir / "a.fbank", FeatureFormat::kBinary), spec);
}

TEST(FeatureIoTest, CsvRoundTrip) {
  testing::ScratchDir dir("core");
  Spectrogram spec(2, 3, {0.1f, 0.2f, 0.3f, -4.0f, 1e30f, -1e-30f});
  SaveFeatures(spec, dir / "a.csv", FeatureFormat::kCsv);
  Spectrogram back = LoadFeatures(dir / "a.csv", FeatureFormat::kCsv);
  ASSERT_EQ(back.n_frames(), 2u);
  for (std::size_t i = 0; i < spec.num_cells(); ++i) {
    EXPECT_FLOAT_EQ(back.data()[i], spec.data()[i]);
  }
}

TEST(FeatureIoTest, UnwritablePathIsIoError) {
  Spectrogram spec(1, 1, {1.0f});
  EXPECT_THROW(SaveFeatures(spec, "/nonexistent_dir/x/y.fbank", FeatureFormat::kBinary),
               IoError);
  EXPECT_THROW(LoadFeatures("/nonexistent_dir/x.fbank", FeatureFormat::kBinary), IoError);
}

TEST(FeatureIoTest, RandomBinaryRoundTripProperty) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> dim(1, 40);
  std::uniform_int_distribution<std::uint32_t> bits;
  for (int trial = 0; trial < 200; ++trial) {
    const std::size_t f = dim(rng), b = dim(rng);
    std::vector<float> data(f * b);
    for (float& v : data) {
      do {
        std::uint32_t raw = bits(rng);
        std::memcpy(&v, &raw, 4);
      } while (!std::isfinite(v));
    }
    Spectrogram spec(f, b, data);
    Spectrogram back = DecodeFbnk(EncodeFbnk(spec));
    ASSERT_EQ(std::memcmp(back.data().data(), spec.data().data(), data.size() * 4), 0);
    ASSERT_EQ(back.n_frames(), f);
    ASSERT_EQ(back.n_bins(), b);
  }
}

TEST(FeatureIoTest, FormatFromExtension) {
  EXPECT_EQ(FormatForPath("a/b.csv"), FeatureFormat::kCsv);
  EXPECT_EQ(FormatForPath("a/b.fbank"), FeatureFormat::kBinary);
}

constexpr char kHeader[] =
    "case_id\tfeatures_path\treference_text\ttarget_word\tfoil_word\t"
    "gender_of_target\tcategory\n";

TEST(ManifestTest, ParsesOneRow) {
  Manifest m = ParseManifest(std::string(kHeader) +
                                 "u1\tu1.fbank\tsono curiosa\tcuriosa\tcurioso\tF\t1F\n",
                             "/data");
  ASSERT_EQ(m.cases.size(), 1u);
  const ContrastCase& c = m.cases[0];
  EXPECT_EQ(c.case_id, "u1");
  EXPECT_EQ(c.features_path, std::filesystem::path("/data/u1.fbank"));
  EXPECT_EQ(c.target_word, "curiosa");
  EXPECT_EQ(c.foil_word, "curioso");
  EXPECT_EQ(c.gender_of_target, Gender::kFemale);
  EXPECT_EQ(c.category, "1F");
  EXPECT_TRUE(m.rejected.empty());
}

TEST(ManifestTest, TargetEqualsFoilNamesTheRow) {
  Manifest m = ParseManifest(std::string(kHeader) +
                             "u1\tu1.fbank\tx\tcuriosa\tcurioso\tF\t1F\n"
                             "u2\tu2.fbank\tx\tcurioso\tcurioso\tM\t1M\n");
  EXPECT_EQ(m.cases.size(), 1u);
  ASSERT_EQ(m.rejected.size(), 1u);
  EXPECT_EQ(m.rejected[0].row, 2u);

  testing::ScratchDir dir("manifest");
  WriteFileBytes(dir / "m.tsv", std::string(kHeader) +
                                    "u2\tu2.fbank\tx\tcurioso\tcurioso\tM\t1M\n");
  try {
    LoadManifestStrict(dir / "m.tsv");
    FAIL() << "expected ManifestError";
  } catch (const ManifestError& e) {
    EXPECT_THAT(e.what(), HasSubstr("row 1"));
    EXPECT_EQ(e.row(), std::optional<std::size_t>(1));
  }
}

TEST(ManifestTest, EmptyManifestIsEmptyList) {
  EXPECT_TRUE(ParseManifest("").cases.empty());
  EXPECT_TRUE(ParseManifest(kHeader).cases.empty());
}

TEST(ManifestTest, MissingColumnThrows) {
  EXPECT_THROW(ParseManifest("case_id\tfeatures_path\n"), ManifestError);
}

TEST(ManifestTest, RejectionsAreCollected) {
  Manifest m = ParseManifest(std::string(kHeader) +
                             "u1\tu1.fbank\tx\tcuriosa\tcurioso\tF\t1F\n"
                             "u1\tu1.fbank\tx\tcuriosa\tcurioso\tF\t1F\n"
                             "u3\tu3.fbank\tx\t\tcurioso\tF\t1F\n"
                             "u4\tu4.fbank\tx\ta\tb\tX\t1F\n"
                             "u5\tu5.fbank\tx\ta\n");
  EXPECT_EQ(m.cases.size(), 1u);
  ASSERT_EQ(m.rejected.size(), 4u);
  EXPECT_THAT(m.rejected[0].reason, HasSubstr("duplicate"));
  EXPECT_EQ(m.rejected[3].row, 5u);
}

TEST(ManifestTest, OrderPreservingAndTotal) {
  std::mt19937_64 rng(11);
  for (int trial = 0; trial < 50; ++trial) {
    std::string text = kHeader;
    std::vector<std::string> expected_ids;
    const int rows = static_cast<int>(rng() % 30);
    for (int r = 0; r < rows; ++r) {
      const std::string id = "c" + std::to_string(rng() % 20);
      const bool bad = rng() % 4 == 0;
      text += id + "\tf.fbank\tref\t" + (bad ? "w" : "a") + "\tw\tM\tcat\n";
      if (!bad && std::find(expected_ids.begin(), expected_ids.end(), id) ==
                      expected_ids.end()) {
        expected_ids.push_back(id);
      }
    }
    Manifest m = ParseManifest(text);
    ASSERT_EQ(m.cases.size() + m.rejected.size(), static_cast<std::size_t>(rows));
    ASSERT_EQ(m.row_count, static_cast<std::size_t>(rows));
    std::vector<std::string> ids;
    for (const auto& c : m.cases) ids.push_back(c.case_id);
    ASSERT_EQ(ids, expected_ids);
  }
}

TEST(ManifestTest, SaveLoadRoundTrip) {
  testing::ScratchDir dir("manifest");
  ContrastCase c{"u1", dir / "feats" / "u1.fbank", "ref text", "curiosa", "curioso",
                 Gender::kFemale, "1F"};
  SaveManifest({c}, dir / "m.tsv");
  std::vector<ContrastCase> back = LoadManifestStrict(dir / "m.tsv");
  ASSERT_EQ(back.size(), 1u);
  EXPECT_EQ(back[0].features_path, c.features_path);
  EXPECT_EQ(back[0].reference_text, "ref text");
  EXPECT_THAT(ReadFileBytes(dir / "m.tsv"), HasSubstr("\tfeats/u1.fbank\t"));
}

TEST(TokenizerInfoTest, ValidatesSets) {
  TokenizerInfo ok(3, {0}, {1}, 2, {"\xE2\x96\x81" "a", ".", "</s>"});
  EXPECT_NO_THROW(ok.Validate());
  TokenizerInfo bad_bow(3, {5}, {1}, 2, {"a", ".", "</s>"});
  EXPECT_THROW(bad_bow.Validate(), ArgumentError);
  TokenizerInfo bad_eos(3, {0}, {1}, 3, {"a", ".", "</s>"});
  EXPECT_THROW(bad_eos.Validate(), ArgumentError);
}

TEST(TokenizerInfoTest, DetokenizesWithWordMarker) {
  TokenizerInfo info(5, {0, 1, 4}, {3}, 2,
                     {"\xE2\x96\x81la", "\xE2\x96\x81" "curios", "</s>", ".", "<unk>"});
  const std::vector<TokenId> tokens = {0, 1, 4, 3, 2};
  EXPECT_EQ(info.Detokenize(tokens), "la curios <unk>.");
  EXPECT_TRUE(info.IsBoundary(2));
  EXPECT_TRUE(info.IsBoundary(3));
  EXPECT_FALSE(info.IsBow(3));
}

}  // namespace
}  // namespace cxplain
