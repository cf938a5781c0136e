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

// Word probabilities from subword probabilities, and locating a word inside
// a tokenized hypothesis.
//
//   ChainRule     p(w) = prod p(w_i)
//   LengthNorm    p(w) = (prod p(w_i))^(1/n)
//   WordBoundary  p(w) = prod p(w_i) * p(S_bow after w) / p(S_bow before w)
//
// S_bow is TokenizerInfo::IsBoundary: word starts, punctuation and EOS.

#ifndef CXPLAIN_WORDPROB_WORDPROB_H_
#define CXPLAIN_WORDPROB_WORDPROB_H_

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/backend/backend.h"
#include "cxplain/core/types.h"

namespace cxplain {

enum class AggregationMethod { kChainRule, kLengthNorm, kWordBoundary };

std::string_view AggregationMethodName(AggregationMethod method);  // "chain_rule", ...
// Accepts the names above; throws ArgumentError otherwise.
AggregationMethod ParseAggregationMethod(std::string_view name);

struct WordSpan {
  std::size_t start_step = 0;  // index of the word's first token
  std::vector<TokenId> token_ids;
  std::string surface;

  bool operator==(const WordSpan& other) const = default;
};

// First occurrence of `word` as a complete word: the span starts at a bow
// token and the token after it (if any) is a boundary token. Matching is
// case-sensitive. Throws SpanError(kSubstringOnly) when `word` only occurs
// inside longer words, SpanError(kNotFound) otherwise.
WordSpan LocateWordSpan(std::span<const TokenId> hypothesis, std::string_view word,
                        const TokenizerInfo& info);

// Natural log of the aggregated probability (-inf for a zero product).
// Throws ArgumentError for an empty list or values outside [0, 1];
// DegenerateError for WordBoundary with bow_first = 0.
double AggregateWordLogProbability(std::span<const double> token_probs, double bow_first,
                                   double bow_next, AggregationMethod method);
// exp of the above.
double AggregateWordProbability(std::span<const double> token_probs, double bow_first,
                                double bow_next, AggregationMethod method);

struct WordPair {
  double target = 0.0;
  double foil = 0.0;
};

// The two score requests (target first) that price both words after the
// same prefix. Bow masses are asked at step 0 and step n for WordBoundary.
std::vector<ScoreRequest> WordPairRequests(const std::string& feature_id,
                                           const std::optional<RleBitset>& mask,
                                           std::span<const TokenId> prefix,
                                           std::span<const TokenId> target_tokens,
                                           std::span<const TokenId> foil_tokens,
                                           AggregationMethod method);

// Aggregates the responses to WordPairRequests (same order).
WordPair WordPairFromResponses(std::span<const ScoreRequest> requests,
                               std::span<const ScoreResponse> responses,
                               AggregationMethod method);

// One score batch carrying both requests.
WordPair WordPairProbabilities(Backend& backend, const std::string& feature_id,
                               const std::optional<RleBitset>& mask,
                               std::span<const TokenId> prefix,
                               std::span<const TokenId> target_tokens,
                               std::span<const TokenId> foil_tokens, AggregationMethod method);

}  // namespace cxplain

#endif  // CXPLAIN_WORDPROB_WORDPROB_H_
