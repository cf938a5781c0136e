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

#ifndef CXPLAIN_CORE_TYPES_H_
#define CXPLAIN_CORE_TYPES_H_

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cxplain {

using TokenId = std::int32_t;

// Dense time x frequency matrix of filterbank energies, row-major by frame.
// Immutable after construction.
class Spectrogram {
 public:
  // Throws ArgumentError on zero dimensions or a size mismatch, and
  // ParseError(kNonFinite) on NaN/Inf values.
  Spectrogram(std::size_t n_frames, std::size_t n_bins, std::vector<float> data);

  static Spectrogram Zeros(std::size_t n_frames, std::size_t n_bins);

  std::size_t n_frames() const { return n_frames_; }
  std::size_t n_bins() const { return n_bins_; }
  std::size_t num_cells() const { return data_.size(); }

  float at(std::size_t frame, std::size_t bin) const {
    return data_[frame * n_bins_ + bin];
  }
  std::span<const float> data() const { return data_; }

  bool operator==(const Spectrogram& other) const = default;

 private:
  std::size_t n_frames_;
  std::size_t n_bins_;
  std::vector<float> data_;
};

enum class ScorerKind { kBase, kContrastiveDifference, kContrastiveRelative };

std::string_view ScorerName(ScorerKind kind);
// Accepts "base", "difference", "relative" (and the enum spellings).
ScorerKind ParseScorerKind(std::string_view name);

// Per-cell relevance scores with the same shape as the explained spectrogram.
struct SaliencyMap {
  std::size_t n_frames = 0;
  std::size_t n_bins = 0;
  std::vector<double> scores;
  ScorerKind scorer = ScorerKind::kBase;
  std::string target_word;
  std::optional<std::string> foil_word;  // absent for kBase

  double at(std::size_t frame, std::size_t bin) const {
    return scores[frame * n_bins + bin];
  }
  std::size_t num_cells() const { return scores.size(); }
};

enum class Gender { kFemale, kMale };

std::string_view GenderName(Gender gender);  // "F" / "M"

// One benchmark instance: the word the reference uses and its contrastive
// alternative.
struct ContrastCase {
  std::string case_id;
  std::filesystem::path features_path;
  std::string reference_text;
  std::string target_word;
  std::string foil_word;
  Gender gender_of_target = Gender::kFemale;
  std::string category;
};

// Vocabulary facts the engine needs from a backend's tokenizer.
class TokenizerInfo {
 public:
  TokenizerInfo() = default;
  TokenizerInfo(std::size_t vocab_size, std::vector<TokenId> bow_token_ids,
                std::vector<TokenId> punctuation_token_ids, TokenId eos_token_id,
                std::vector<std::string> token_surfaces);

  // Throws ArgumentError when a set member or EOS lies outside the vocabulary
  // or the surface table has the wrong length.
  void Validate() const;

  std::size_t vocab_size() const { return vocab_size_; }
  const std::vector<TokenId>& bow_token_ids() const { return bow_; }
  const std::vector<TokenId>& punctuation_token_ids() const { return punct_; }
  TokenId eos_token_id() const { return eos_; }
  const std::vector<std::string>& token_surfaces() const { return surfaces_; }

  bool InVocab(TokenId id) const {
    return id >= 0 && static_cast<std::size_t>(id) < vocab_size_;
  }
  bool IsBow(TokenId id) const;
  bool IsPunctuation(TokenId id) const;
  // bow U punctuation U {EOS}: the set whose mass marks a completed word.
  bool IsBoundary(TokenId id) const;
  std::string_view Surface(TokenId id) const;

  // Joins surfaces, turning the word marker into a space. EOS is dropped.
  std::string Detokenize(std::span<const TokenId> tokens) const;

  bool operator==(const TokenizerInfo& other) const;

 private:
  std::size_t vocab_size_ = 0;
  std::vector<TokenId> bow_;
  std::vector<TokenId> punct_;
  TokenId eos_ = 0;
  std::vector<std::string> surfaces_;
  std::vector<std::uint8_t> flags_;  // bit 0: bow, bit 1: punctuation
};

// U+2581, the subword word-start marker.
inline constexpr std::string_view kWordMarker = "\xE2\x96\x81";

}  // namespace cxplain

#endif  // CXPLAIN_CORE_TYPES_H_
