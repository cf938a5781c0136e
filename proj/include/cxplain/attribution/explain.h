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

// End-to-end explanation of one contrast case: decode, locate the word, price
// target and foil under every mask, score, aggregate, assemble.

#ifndef CXPLAIN_ATTRIBUTION_EXPLAIN_H_
#define CXPLAIN_ATTRIBUTION_EXPLAIN_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/attribution/scorers.h"
#include "cxplain/backend/backend.h"
#include "cxplain/perturbation/masks.h"
#include "cxplain/segmentation/slic.h"
#include "cxplain/wordprob/wordprob.h"

namespace cxplain {

struct ExplainConfig {
  ScorerKind scorer = ScorerKind::kContrastiveRelative;
  AggregationMethod method = AggregationMethod::kWordBoundary;
  SegmentationConfig segmentation;
  std::size_t n_masks = 20000;
  double mask_probability = 0.5;
  std::uint64_t seed = kDefaultSeed;
  double epsilon = kRelativeEpsilon;
  std::size_t beam_size = 5;
  std::size_t no_repeat_ngram = 5;
  std::size_t max_len = 256;
  std::size_t masks_per_batch = 64;  // two score requests per mask

  void Validate() const;  // throws ArgumentError
};

// Everything the three scorers need, computed once from one mask set.
struct Explanation {
  std::string case_id;
  std::vector<TokenId> hypothesis;
  std::string hypothesis_text;
  WordSpan span;                        // the explained word in the hypothesis
  std::vector<TokenId> contrast_tokens;  // the alternative, tokenized by the backend
  std::string explained_word;
  std::string contrast_word;
  bool roles_swapped = false;  // the hypothesis had the foil, not the target
  WordPair clean;               // (explained, contrast) unperturbed
  std::vector<SegmentMap> levels;
  std::vector<PerturbationMask> masks;
  std::vector<WordPair> perturbed;  // aligned with masks
};

// Registers `features` under case.case_id and runs the pipeline. Throws
// CoverageError when the hypothesis holds neither word, SpanError when a
// word occurs only inside a longer one, and propagates backend errors.
Explanation ComputeExplanation(const ContrastCase& contrast_case, const Spectrogram& features,
                               Backend& backend, const ExplainConfig& config);

std::vector<double> MaskScores(const Explanation& explanation, ScorerKind scorer,
                               double eps = kRelativeEpsilon);

// Per-level aggregation of MaskScores followed by assembly.
SaliencyMap ExplanationMap(const Explanation& explanation, ScorerKind scorer,
                           double eps = kRelativeEpsilon);

// ComputeExplanation + ExplanationMap with config.scorer.
SaliencyMap Explain(const ContrastCase& contrast_case, const Spectrogram& features,
                    Backend& backend, const ExplainConfig& config);

// Sidecar JSON describing how a map was produced.
std::string ProvenanceJson(const Explanation& explanation, const ExplainConfig& config,
                           ScorerKind scorer, std::string_view config_digest);

}  // namespace cxplain

#endif  // CXPLAIN_ATTRIBUTION_EXPLAIN_H_
