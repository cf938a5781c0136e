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

// Deterministic backend with planted ground truth. Each feature id maps to a
// model that emits a fixed template; the choice between target and foil at
// the contrast slot is driven by the energy retained in a cue rectangle, and
// content words are gated by the energy retained in their own rectangles.
//
// With K = 1 - rho and gate(x) = eps + (1 - 2 eps) clamp(x, 0, 1):
//   contrast slot, cue fraction r:
//       p(target) = K gate(r), p(foil) = K - p(target)
//     if a content region lists the target or foil token, with fraction c:
//       p(target) = K gate(c) gate(r), p(foil) = K gate(c) (1 - gate(r)),
//       p(unk) = K (1 - gate(c))
//   content word step (template token listed by a region), fraction c:
//       p(word) = K gate(c), p(unk) = K - p(word)
//   any other template step: p(template token) = K
//   rho is spread evenly over the tokens not named above.
//   step >= template length: p(EOS) = 1.
// A fraction is retained energy over the energy of the registered features in
// the same rectangle (1 when that reference energy is not positive).

#ifndef CXPLAIN_BACKEND_SYNTHETIC_H_
#define CXPLAIN_BACKEND_SYNTHETIC_H_

#include <cstddef>
#include <map>
#include <string>
#include <vector>

#include "cxplain/backend/backend.h"

namespace cxplain {

// Half-open cell rectangle [frame_begin, frame_end) x [bin_begin, bin_end).
struct CellRect {
  std::size_t frame_begin = 0;
  std::size_t frame_end = 0;
  std::size_t bin_begin = 0;
  std::size_t bin_end = 0;

  std::size_t num_cells() const {
    return (frame_end - frame_begin) * (bin_end - bin_begin);
  }
  bool Contains(std::size_t frame, std::size_t bin) const {
    return frame >= frame_begin && frame < frame_end && bin >= bin_begin && bin < bin_end;
  }
  bool operator==(const CellRect& other) const = default;
};

struct ContentRegion {
  CellRect rect;
  std::vector<TokenId> token_ids;  // the word's tokens gated by this region

  bool operator==(const ContentRegion& other) const = default;
};

struct SyntheticModelSpec {
  std::vector<TokenId> template_tokens;
  std::size_t contrast_slot = 0;
  TokenId target_token = 0;
  TokenId foil_token = 0;
  CellRect cue_region;
  std::vector<ContentRegion> content_regions;
  double epsilon = 0.05;
  double rho = 0.02;

  // Throws ArgumentError: regions outside n_frames x n_bins or empty, slot
  // outside the template, the slot token not equal to target, 2 eps + rho >= 1,
  // token ids outside the vocabulary.
  void Validate(std::size_t n_frames, std::size_t n_bins, std::size_t vocab_size) const;
  bool operator==(const SyntheticModelSpec& other) const = default;
};

// Vocabulary plus one model per feature id. A feature id "base#suffix" uses
// the model (and reference energies) registered for "base".
struct SyntheticSuite {
  TokenizerInfo tokenizer;
  TokenId unk_token = 0;
  std::map<std::string, SyntheticModelSpec> models;

  std::string ToJson() const;
  static SyntheticSuite FromJson(std::string_view text);  // throws ArgumentError
};

// Retained fraction of each region under `masked`, relative to `reference`.
struct RegionFractions {
  double cue = 1.0;
  std::vector<double> content;  // aligned with spec.content_regions
};

double EnergyFraction(const CellRect& rect, const Spectrogram& masked,
                      const Spectrogram& reference);
RegionFractions ComputeFractions(const SyntheticModelSpec& spec,
                                 const Spectrogram& masked,
                                 const Spectrogram& reference);

// Full distribution over the vocabulary at `step`.
std::vector<double> SyntheticStepDistribution(const SyntheticModelSpec& spec,
                                              std::size_t vocab_size, TokenId unk,
                                              TokenId eos,
                                              const RegionFractions& fractions,
                                              std::size_t step);

// Beam search over a prefix-independent step law, with n-gram blocking.
// Ties between hypotheses go to the lexicographically smaller token
// sequence.
std::vector<TokenId> BeamSearch(
    const std::vector<std::vector<double>>& step_distributions, TokenId eos,
    std::size_t beam_size, std::size_t no_repeat_ngram, std::size_t max_len);

class SyntheticBackend : public Backend {
 public:
  explicit SyntheticBackend(SyntheticSuite suite);

  TokenizerInfo Handshake() override;
  void LoadFeatures(const std::string& feature_id, const Spectrogram& spec) override;
  std::vector<ScoreResponse> ScoreBatch(std::span<const ScoreRequest> requests) override;
  GenerateResponse Generate(const GenerateRequest& request) override;
  std::vector<TokenId> Tokenize(std::string_view text) override;

  const SyntheticSuite& suite() const { return suite_; }

 private:
  struct Entry {
    Spectrogram features;
    const SyntheticModelSpec* model;
    std::string base_id;
  };

  const Entry& Lookup(const std::string& feature_id) const;
  RegionFractions Fractions(const Entry& entry, const std::optional<RleBitset>& mask);
  std::vector<std::vector<double>> Distributions(const Entry& entry,
                                                 const RegionFractions& fractions,
                                                 std::size_t steps) const;

  SyntheticSuite suite_;
  std::map<std::string, Entry> features_;
  std::vector<bool> scratch_;
};

}  // namespace cxplain

#endif  // CXPLAIN_BACKEND_SYNTHETIC_H_
