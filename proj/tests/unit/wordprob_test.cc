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
#include <map>
#include <random>

#include <gmock/gmock.h>
#include <gtest/gtest.h>

#include "cxplain/backend/synthetic.h"
#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"

namespace cxplain {
namespace {

using ::testing::ElementsAre;

constexpr auto kChain = AggregationMethod::kChainRule;
constexpr auto kNorm = AggregationMethod::kLengthNorm;
constexpr auto kBoundary = AggregationMethod::kWordBoundary;

std::string Marked(const std::string& s) { return std::string(kWordMarker) + s; }

// 0 </s>, 1 ".", 2 ▁la, 3 ▁curios, 4 a, 5 o, 6 ▁studente, 7 ssa, 8 ▁Curios
TokenizerInfo Italian() {
  return TokenizerInfo(9, {2, 3, 6, 8}, {1}, 0,
                       {"</s>", ".", Marked("la"), Marked("curios"), "a", "o",
                        Marked("studente"), "ssa", Marked("Curios")});
}

TEST(AggregateTest, IdentityForCertainTokens) {
  const std::vector<double> ones = {1.0, 1.0};
  for (auto m : {kChain, kNorm, kBoundary}) {
    EXPECT_DOUBLE_EQ(AggregateWordProbability(ones, 1.0, 1.0, m), 1.0);
  }
}

TEST(AggregateTest, WorkedExamples) {
  const std::vector<double> p = {0.5, 0.4};
  EXPECT_NEAR(AggregateWordProbability(p, 1.0, 1.0, kChain), 0.2, 1e-12);
  EXPECT_NEAR(AggregateWordProbability(p, 1.0, 1.0, kNorm), std::sqrt(0.2), 1e-12);
  EXPECT_NEAR(AggregateWordProbability(p, 1.0, 1.0, kNorm), 0.4472, 5e-5);
  EXPECT_NEAR(AggregateWordProbability(p, 0.8, 0.9, kBoundary), 0.225, 1e-12);
}

TEST(AggregateTest, Errors) {
  const std::vector<double> p = {0.5};
  EXPECT_THROW(AggregateWordProbability(p, 0.0, 0.5, kBoundary), DegenerateError);
  EXPECT_NO_THROW(AggregateWordProbability(p, 0.0, 0.5, kChain));
  EXPECT_THROW(AggregateWordProbability(std::vector<double>{1.5}, 1, 1, kChain), ArgumentError);
  EXPECT_THROW(AggregateWordProbability(std::vector<double>{NAN}, 1, 1, kChain), ArgumentError);
  EXPECT_THROW(AggregateWordProbability(std::vector<double>{}, 1, 1, kChain), ArgumentError);
  EXPECT_THROW(AggregateWordProbability(p, 1.2, 0.5, kBoundary), ArgumentError);
  EXPECT_DOUBLE_EQ(AggregateWordProbability(std::vector<double>{0.0, 0.5}, 1, 1, kNorm), 0.0);
}

TEST(AggregateTest, MethodNames) {
  for (auto m : {kChain, kNorm, kBoundary}) {
    EXPECT_EQ(ParseAggregationMethod(AggregationMethodName(m)), m);
  }
  EXPECT_THROW(ParseAggregationMethod("mean"), ArgumentError);
}

// Plain product, no logs.
double DirectProduct(const std::vector<double>& p) {
  double prod = 1.0;
  for (double x : p) prod *= x;
  return prod;
}

TEST(AggregateProperty, MatchesDirectArithmeticAndStaysInUnitInterval) {
  std::mt19937_64 rng(21);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> p(1 + rng() % 6);
    for (double& x : p) x = unit(rng);
    double first = unit(rng) + 1e-3;
    double next = unit(rng);
    if (first > 1.0) first = 1.0;
    if (next > first) std::swap(next, first);
    const double prod = DirectProduct(p);
    EXPECT_NEAR(AggregateWordProbability(p, 1, 1, kChain), prod, 1e-12);
    EXPECT_NEAR(AggregateWordProbability(p, 1, 1, kNorm), std::pow(prod, 1.0 / p.size()), 1e-12);
    const double wb = AggregateWordProbability(p, first, next, kBoundary);
    EXPECT_NEAR(wb, prod * next / first, 1e-12);
    EXPECT_LE(wb, prod + 1e-12);
    for (auto m : {kChain, kNorm, kBoundary}) {
      const double v = AggregateWordProbability(p, first, next, m);
      EXPECT_GE(v, 0.0);
      EXPECT_LE(v, 1.0 + 1e-9);
    }
  }
}

TEST(AggregateProperty, SingleTokenMethodsAgree) {
  std::mt19937_64 rng(22);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    const std::vector<double> p = {unit(rng)};
    const double bow = unit(rng) + 1e-6;
    const double chain = AggregateWordProbability(p, bow, bow, kChain);
    EXPECT_NEAR(AggregateWordProbability(p, bow, bow, kNorm), chain, 1e-12);
    EXPECT_NEAR(AggregateWordProbability(p, std::min(bow, 1.0), std::min(bow, 1.0), kBoundary),
                chain, 1e-12);
  }
}

TEST(AggregateProperty, StrictlyIncreasingInEveryTokenProbability) {
  std::mt19937_64 rng(23);
  std::uniform_real_distribution<double> unit(0.01, 1.0);
  for (int trial = 0; trial < 10000; ++trial) {
    std::vector<double> p(1 + rng() % 5);
    for (double& x : p) x = unit(rng);
    const std::size_t i = rng() % p.size();
    std::vector<double> up = p;
    up[i] = p[i] + (1.0 - p[i]) * (0.01 + 0.99 * unit(rng));
    if (!(up[i] > p[i])) continue;
    const double first = unit(rng), next = unit(rng);
    for (auto m : {kChain, kNorm, kBoundary}) {
      EXPECT_GT(AggregateWordLogProbability(up, first, next, m),
                AggregateWordLogProbability(p, first, next, m));
    }
  }
}

TEST(AggregateProperty, NoUnderflowInLogSpace) {
  std::mt19937_64 rng(24);
  std::uniform_real_distribution<double> exponent(-30.0, 0.0);
  for (int trial = 0; trial < 1000; ++trial) {
    std::vector<double> p(1 + rng() % 32);
    for (double& x : p) x = std::pow(10.0, exponent(rng));
    p[0] = 1e-30;
    for (auto m : {kChain, kNorm, kBoundary}) {
      const double lp = AggregateWordLogProbability(p, 1e-30, 1e-30, m);
      EXPECT_TRUE(std::isfinite(lp));
      double oracle = 0.0;
      for (double x : p) oracle += std::log(x);
      if (m == kNorm) oracle /= p.size();
      EXPECT_NEAR(lp, oracle, 1e-9 * std::abs(oracle));
    }
    EXPECT_GT(AggregateWordProbability(p, 1, 1, kNorm), 0.0);
  }
}

TEST(LocateWordSpanTest, FindsMultiTokenWord) {
  const std::vector<TokenId> hyp = {2, 3, 4};  // ▁la ▁curios a
  const WordSpan s = LocateWordSpan(hyp, "curiosa", Italian());
  EXPECT_EQ(s.start_step, 1u);
  EXPECT_THAT(s.token_ids, ElementsAre(3, 4));
  EXPECT_EQ(s.surface, "curiosa");
}

TEST(LocateWordSpanTest, AbsentWordIsNotFound) {
  const std::vector<TokenId> hyp = {2, 3, 4};
  try {
    LocateWordSpan(hyp, "curioso", Italian());
    FAIL();
  } catch (const SpanError& e) {
    EXPECT_EQ(e.kind(), SpanError::Kind::kNotFound);
  }
}

TEST(LocateWordSpanTest, PrefixOfLongerWordIsSubstringOnly) {
  const std::vector<TokenId> hyp = {6, 7};  // ▁studente ssa
  try {
    LocateWordSpan(hyp, "studente", Italian());
    FAIL();
  } catch (const SpanError& e) {
    EXPECT_EQ(e.kind(), SpanError::Kind::kSubstringOnly);
  }
}

TEST(LocateWordSpanTest, FirstOccurrenceCaseSensitiveAndBoundaries) {
  const TokenizerInfo info = Italian();
  // ▁Curios a ▁la ▁curios a . ▁curios a </s>
  const std::vector<TokenId> hyp = {8, 4, 2, 3, 4, 1, 3, 4, 0};
  EXPECT_EQ(LocateWordSpan(hyp, "curiosa", info).start_step, 3u);
  EXPECT_EQ(LocateWordSpan(hyp, "Curiosa", info).start_step, 0u);
  // Word directly before EOS, and at the very end.
  EXPECT_EQ(LocateWordSpan(std::vector<TokenId>{2, 3, 5, 0}, "curioso", info).start_step, 1u);
  EXPECT_EQ(LocateWordSpan(std::vector<TokenId>{3, 5}, "curioso", info).token_ids.size(), 2u);
  EXPECT_THROW(LocateWordSpan(std::vector<TokenId>{}, "la", info), SpanError);
}

TEST(LocateWordSpanProperty, SpanDetokenizesToTheWordAndEndsAtABoundary) {
  const TokenizerInfo info = Italian();
  std::mt19937_64 rng(31);
  const std::vector<std::vector<TokenId>> words = {{2}, {3, 4}, {3, 5}, {6}, {6, 7}, {8, 4}};
  const std::vector<std::string> surfaces = {"la", "curiosa", "curioso",
                                             "studente", "studentessa", "Curiosa"};
  for (int trial = 0; trial < 2000; ++trial) {
    std::vector<TokenId> hyp;
    std::vector<std::size_t> picked;
    for (std::size_t n = 1 + rng() % 6; n > 0; --n) {
      picked.push_back(rng() % words.size());
      hyp.insert(hyp.end(), words[picked.back()].begin(), words[picked.back()].end());
      if (rng() % 4 == 0) hyp.push_back(1);
    }
    if (rng() & 1) hyp.push_back(0);
    const std::size_t w = picked[rng() % picked.size()];
    const WordSpan s = LocateWordSpan(hyp, surfaces[w], info);
    EXPECT_TRUE(info.IsBow(hyp[s.start_step]));
    const std::size_t end = s.start_step + s.token_ids.size();
    EXPECT_TRUE(end == hyp.size() || info.IsBoundary(hyp[end]));
    EXPECT_EQ(info.Detokenize(s.token_ids), surfaces[w]);
    // First occurrence: no earlier complete match.
    for (std::size_t i = 0; i < s.start_step; ++i) {
      const auto& toks = words[w];
      const bool same = i + toks.size() <= hyp.size() &&
                        std::equal(toks.begin(), toks.end(), hyp.begin() + i) &&
                        (i + toks.size() == hyp.size() || info.IsBoundary(hyp[i + toks.size()]));
      EXPECT_FALSE(same && info.IsBow(hyp[i]));
    }
  }
}

// ---- pair probabilities -------------------------------------------------

TEST(WordPairTest, SyntheticContrastSlot) {
  SyntheticBackend backend(SyntheticSuite::FromJson(
      ReadFileBytes(CXPLAIN_TEST_DATA_DIR "/protocol/suite.json")));
  std::vector<float> v(16, 1.0f);
  v[5] = v[6] = v[9] = v[10] = 3.0f;
  backend.LoadFeatures("u2", Spectrogram(4, 4, v));
  const std::vector<TokenId> prefix = {3, 4}, target = {6}, foil = {5};
  const WordPair clean =
      WordPairProbabilities(backend, "u2", std::nullopt, prefix, target, foil, kChain);
  EXPECT_NEAR(clean.target, 0.9310, 1e-12);
  EXPECT_NEAR(clean.foil, 0.0490, 1e-12);
  const RleBitset all{{{true, 16}}};
  const WordPair masked = WordPairProbabilities(backend, "u2", all, prefix, target, foil, kChain);
  EXPECT_NEAR(masked.target, 0.0490, 1e-12);
  EXPECT_NEAR(masked.foil, 0.9310, 1e-12);
}

// Scores from a fixed table keyed by (prefix + continuation so far) and the
// boundary mass after a given context.
class TableBackend : public Backend {
 public:
  std::map<std::vector<TokenId>, double> next_prob;  // context + token -> p
  std::map<std::vector<TokenId>, double> bow_mass;   // context -> mass

  TokenizerInfo Handshake() override { return Italian(); }
  void LoadFeatures(const std::string&, const Spectrogram&) override {}
  std::vector<ScoreResponse> ScoreBatch(std::span<const ScoreRequest> requests) override {
    std::vector<ScoreResponse> out;
    for (const ScoreRequest& r : requests) {
      ScoreResponse resp;
      std::vector<TokenId> ctx = r.prefix_tokens;
      for (std::size_t i = 0; i <= r.continuation_tokens.size(); ++i) {
        for (std::size_t j : r.want_bow_mass_at) {
          if (j == i) resp.bow_masses[j] = bow_mass.at(ctx);
        }
        if (i == r.continuation_tokens.size()) break;
        ctx.push_back(r.continuation_tokens[i]);
        resp.token_probs.push_back(next_prob.at(ctx));
      }
      out.push_back(resp);
    }
    return out;
  }
  GenerateResponse Generate(const GenerateRequest&) override { return {}; }
  std::vector<TokenId> Tokenize(std::string_view) override { return {}; }
};

TEST(WordPairTest, WordBoundaryDemotesThePrefixReading) {
  // Target "studentessa" = [▁studente, ssa]; foil "studente" = [▁studente],
  // which the model almost never ends there.
  TableBackend backend;
  backend.next_prob = {{{2, 6}, 0.9}, {{2, 6, 7}, 0.95}};
  backend.bow_mass = {{{2}, 0.95}, {{2, 6}, 0.004}, {{2, 6, 7}, 0.9}};
  const std::vector<TokenId> prefix = {2}, target = {6, 7}, foil = {6};
  const WordPair chain =
      WordPairProbabilities(backend, "x", std::nullopt, prefix, target, foil, kChain);
  const WordPair boundary =
      WordPairProbabilities(backend, "x", std::nullopt, prefix, target, foil, kBoundary);
  EXPECT_GT(chain.foil, chain.target);
  EXPECT_LT(boundary.foil, boundary.target);
  EXPECT_NEAR(boundary.target, 0.9 * 0.95 * 0.9 / 0.95, 1e-12);
  EXPECT_NEAR(boundary.foil, 0.9 * 0.004 / 0.95, 1e-12);
}

TEST(WordPairTest, RequestsShareThePrefixAndAskForBowSteps) {
  const std::vector<TokenId> prefix = {2}, target = {3, 4}, foil = {3, 5, 4};
  const auto reqs = WordPairRequests("f", std::nullopt, prefix, target, foil, kBoundary);
  ASSERT_EQ(reqs.size(), 2u);
  EXPECT_EQ(reqs[0].prefix_tokens, reqs[1].prefix_tokens);
  EXPECT_THAT(reqs[0].want_bow_mass_at, ElementsAre(0u, 2u));
  EXPECT_THAT(reqs[1].want_bow_mass_at, ElementsAre(0u, 3u));
  EXPECT_TRUE(WordPairRequests("f", std::nullopt, prefix, target, foil, kChain)[0]
                  .want_bow_mass_at.empty());
}

}  // namespace
}  // namespace cxplain
