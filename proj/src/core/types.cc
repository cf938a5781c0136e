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

#include "cxplain/core/types.h"

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>

#include "cxplain/core/errors.h"

namespace cxplain {

Spectrogram::Spectrogram(std::size_t n_frames, std::size_t n_bins,
                         std::vector<float> data)
    : n_frames_(n_frames), n_bins_(n_bins), data_(std::move(data)) {
  if (n_frames_ == 0 || n_bins_ == 0) {
    throw ArgumentError("spectrogram needs at least one frame and one bin");
  }
  if (data_.size() != n_frames_ * n_bins_) {
    throw ArgumentError("spectrogram data has " + std::to_string(data_.size()) +
                        " values, expected " +
                        std::to_string(n_frames_ * n_bins_));
  }
  for (std::size_t i = 0; i < data_.size(); ++i) {
    if (!std::isfinite(data_[i])) {
      throw ParseError(ParseError::Kind::kNonFinite,
                       "non-finite spectrogram value at cell " +
                           std::to_string(i));
    }
  }
}

Spectrogram Spectrogram::Zeros(std::size_t n_frames, std::size_t n_bins) {
  return Spectrogram(n_frames, n_bins,
                     std::vector<float>(n_frames * n_bins, 0.0f));
}

std::string_view ScorerName(ScorerKind kind) {
  switch (kind) {
    case ScorerKind::kBase:
      return "base";
    case ScorerKind::kContrastiveDifference:
      return "difference";
    case ScorerKind::kContrastiveRelative:
      return "relative";
  }
  return "unknown";
}

ScorerKind ParseScorerKind(std::string_view name) {
  if (name == "base" || name == "Base") return ScorerKind::kBase;
  if (name == "difference" || name == "ContrastiveDifference") {
    return ScorerKind::kContrastiveDifference;
  }
  if (name == "relative" || name == "ContrastiveRelative") {
    return ScorerKind::kContrastiveRelative;
  }
  throw ArgumentError("unknown scorer '" + std::string(name) + "'");
}

std::string_view GenderName(Gender gender) {
  return gender == Gender::kFemale ? "F" : "M";
}

TokenizerInfo::TokenizerInfo(std::size_t vocab_size,
                             std::vector<TokenId> bow_token_ids,
                             std::vector<TokenId> punctuation_token_ids,
                             TokenId eos_token_id,
                             std::vector<std::string> token_surfaces)
    : vocab_size_(vocab_size),
      bow_(std::move(bow_token_ids)),
      punct_(std::move(punctuation_token_ids)),
      eos_(eos_token_id),
      surfaces_(std::move(token_surfaces)),
      flags_(vocab_size, 0) {
  std::sort(bow_.begin(), bow_.end());
  bow_.erase(std::unique(bow_.begin(), bow_.end()), bow_.end());
  std::sort(punct_.begin(), punct_.end());
  punct_.erase(std::unique(punct_.begin(), punct_.end()), punct_.end());
  for (TokenId id : bow_) {
    if (InVocab(id)) flags_[id] |= 1;
  }
  for (TokenId id : punct_) {
    if (InVocab(id)) flags_[id] |= 2;
  }
}

void TokenizerInfo::Validate() const {
  if (vocab_size_ == 0) throw ArgumentError("tokenizer has an empty vocabulary");
  for (TokenId id : bow_) {
    if (!InVocab(id)) {
      throw ArgumentError("bow token id " + std::to_string(id) +
                          " outside vocabulary");
    }
  }
  for (TokenId id : punct_) {
    if (!InVocab(id)) {
      throw ArgumentError("punctuation token id " + std::to_string(id) +
                          " outside vocabulary");
    }
  }
  if (!InVocab(eos_)) {
    throw ArgumentError("eos token id " + std::to_string(eos_) +
                        " outside vocabulary");
  }
  if (surfaces_.size() != vocab_size_) {
    throw ArgumentError("token surface table has " +
                        std::to_string(surfaces_.size()) + " entries for a " +
                        std::to_string(vocab_size_) + "-token vocabulary");
  }
}

bool TokenizerInfo::IsBow(TokenId id) const {
  return InVocab(id) && (flags_[id] & 1) != 0;
}

bool TokenizerInfo::IsPunctuation(TokenId id) const {
  return InVocab(id) && (flags_[id] & 2) != 0;
}

bool TokenizerInfo::IsBoundary(TokenId id) const {
  return id == eos_ || IsBow(id) || IsPunctuation(id);
}

std::string_view TokenizerInfo::Surface(TokenId id) const {
  if (!InVocab(id) || static_cast<std::size_t>(id) >= surfaces_.size()) {
    throw ArgumentError("token id " + std::to_string(id) + " outside vocabulary");
  }
  return surfaces_[id];
}

std::string TokenizerInfo::Detokenize(std::span<const TokenId> tokens) const {
  std::string text;
  for (TokenId id : tokens) {
    if (id == eos_) continue;
    std::string_view surface = Surface(id);
    if (surface.starts_with(kWordMarker)) {
      text += ' ';
      surface.remove_prefix(kWordMarker.size());
    } else if (IsBow(id)) {
      // Word-starting specials such as <unk> carry no marker.
      text += ' ';
    }
    text += surface;
  }
  std::size_t begin = text.find_first_not_of(' ');
  if (begin == std::string::npos) return "";
  return text.substr(begin);
}

bool TokenizerInfo::operator==(const TokenizerInfo& other) const {
  return vocab_size_ == other.vocab_size_ && bow_ == other.bow_ &&
         punct_ == other.punct_ && eos_ == other.eos_ &&
         surfaces_ == other.surfaces_;
}

}  // namespace cxplain
