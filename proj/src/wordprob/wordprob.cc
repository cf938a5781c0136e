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

#include "cxplain/wordprob/wordprob.h"

#include <cmath>
#include <limits>

#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

constexpr const char* kMethodNames[] = {"chain_rule", "length_norm", "word_boundary"};

std::string_view StripMarker(std::string_view s) {
  if (s.starts_with(kWordMarker)) s.remove_prefix(kWordMarker.size());
  return s;
}

}  // namespace

std::string_view AggregationMethodName(AggregationMethod method) {
  return kMethodNames[static_cast<int>(method)];
}

AggregationMethod ParseAggregationMethod(std::string_view name) {
  for (int i = 0; i < 3; ++i) {
    if (name == kMethodNames[i]) return static_cast<AggregationMethod>(i);
  }
  throw ArgumentError("unknown aggregation method '" + std::string(name) +
                      "' (expected chain_rule, length_norm or word_boundary)");
}

WordSpan LocateWordSpan(std::span<const TokenId> hypothesis, std::string_view word,
                        const TokenizerInfo& info) {
  bool seen_inside = false;
  for (std::size_t i = 0; i < hypothesis.size(); ++i) {
    if (!info.IsBow(hypothesis[i])) continue;
    std::size_t end = i + 1;
    while (end < hypothesis.size() && !info.IsBoundary(hypothesis[end])) ++end;
    std::string text(StripMarker(info.Surface(hypothesis[i])));
    for (std::size_t j = i + 1; j < end; ++j) text += info.Surface(hypothesis[j]);
    if (text == word) {
      return WordSpan{i, std::vector<TokenId>(hypothesis.begin() + i, hypothesis.begin() + end),
                      std::string(word)};
    }
    if (!word.empty() && text.find(word) != std::string::npos) seen_inside = true;
  }
  if (seen_inside) {
    throw SpanError(SpanError::Kind::kSubstringOnly,
                    "'" + std::string(word) + "' only occurs inside a longer word");
  }
  throw SpanError(SpanError::Kind::kNotFound,
                  "'" + std::string(word) + "' does not occur in the hypothesis");
}

double AggregateWordLogProbability(std::span<const double> token_probs, double bow_first,
                                   double bow_next, AggregationMethod method) {
  if (token_probs.empty()) throw ArgumentError("a word needs at least one token probability");
  auto check = [](double p, const char* what) {
    if (!(p >= 0.0 && p <= 1.0)) {
      throw ArgumentError(std::string(what) + " " + std::to_string(p) + " is outside [0, 1]");
    }
  };
  double log_sum = 0.0;
  for (double p : token_probs) {
    check(p, "token probability");
    log_sum += std::log(p);
  }
  switch (method) {
    case AggregationMethod::kChainRule:
      return log_sum;
    case AggregationMethod::kLengthNorm:
      return log_sum / static_cast<double>(token_probs.size());
    case AggregationMethod::kWordBoundary:
      check(bow_first, "bow mass");
      check(bow_next, "bow mass");
      if (bow_first == 0.0) {
        throw DegenerateError("word-boundary aggregation conditions on a zero bow mass");
      }
      return log_sum + std::log(bow_next) - std::log(bow_first);
  }
  return log_sum;
}

double AggregateWordProbability(std::span<const double> token_probs, double bow_first,
                                double bow_next, AggregationMethod method) {
  return std::exp(AggregateWordLogProbability(token_probs, bow_first, bow_next, method));
}

std::vector<ScoreRequest> WordPairRequests(const std::string& feature_id,
                                           const std::optional<RleBitset>& mask,
                                           std::span<const TokenId> prefix,
                                           std::span<const TokenId> target_tokens,
                                           std::span<const TokenId> foil_tokens,
                                           AggregationMethod method) {
  std::vector<ScoreRequest> out;
  for (std::span<const TokenId> word : {target_tokens, foil_tokens}) {
    ScoreRequest r;
    r.feature_id = feature_id;
    r.mask = mask;
    r.prefix_tokens.assign(prefix.begin(), prefix.end());
    r.continuation_tokens.assign(word.begin(), word.end());
    if (method == AggregationMethod::kWordBoundary) r.want_bow_mass_at = {0, word.size()};
    out.push_back(std::move(r));
  }
  return out;
}

WordPair WordPairFromResponses(std::span<const ScoreRequest> requests,
                               std::span<const ScoreResponse> responses,
                               AggregationMethod method) {
  if (requests.size() != 2 || responses.size() != 2) {
    throw ArgumentError("a word pair needs exactly two requests and two responses");
  }
  double p[2];
  for (int i = 0; i < 2; ++i) {
    ValidateScoreResponse(requests[i], responses[i]);
    double first = 1.0, next = 1.0;
    if (method == AggregationMethod::kWordBoundary) {
      first = responses[i].bow_masses.at(0);
      next = responses[i].bow_masses.at(requests[i].continuation_tokens.size());
    }
    p[i] = AggregateWordProbability(responses[i].token_probs, first, next, method);
  }
  return {p[0], p[1]};
}

WordPair WordPairProbabilities(Backend& backend, const std::string& feature_id,
                               const std::optional<RleBitset>& mask,
                               std::span<const TokenId> prefix,
                               std::span<const TokenId> target_tokens,
                               std::span<const TokenId> foil_tokens, AggregationMethod method) {
  const std::vector<ScoreRequest> requests =
      WordPairRequests(feature_id, mask, prefix, target_tokens, foil_tokens, method);
  return WordPairFromResponses(requests, backend.ScoreBatch(requests), method);
}

}  // namespace cxplain
