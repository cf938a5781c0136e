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

#include "cxplain/attribution/explain.h"

#include <cmath>

#include "cxplain/attribution/saliency.h"
#include "cxplain/backend/process.h"
#include "cxplain/core/errors.h"
#include "json.hpp"

namespace cxplain {
namespace {

using json = nlohmann::json;

// Number of score batches written before waiting, on a subprocess backend.
constexpr std::size_t kPipelineDepth = 8;

struct Located {
  WordSpan span;
  bool swapped = false;
};

Located LocateContrast(std::span<const TokenId> hypothesis, const ContrastCase& c,
                       const TokenizerInfo& info) {
  std::optional<SpanError> target_error;
  try {
    return {LocateWordSpan(hypothesis, c.target_word, info), false};
  } catch (const SpanError& e) {
    target_error = e;
  }
  try {
    return {LocateWordSpan(hypothesis, c.foil_word, info), true};
  } catch (const SpanError& e) {
    if (target_error->kind() == SpanError::Kind::kNotFound &&
        e.kind() == SpanError::Kind::kNotFound) {
      throw CoverageError("case " + c.case_id + ": hypothesis holds neither '" +
                          c.target_word + "' nor '" + c.foil_word + "'");
    }
    throw target_error->kind() == SpanError::Kind::kSubstringOnly ? *target_error : e;
  }
}

// Scores every mask; responses come back per batch in request order.
std::vector<WordPair> ScoreMasks(Backend& backend, const Explanation& ex,
                                 const ExplainConfig& config) {
  const std::span<const TokenId> prefix(ex.hypothesis.data(), ex.span.start_step);
  std::vector<WordPair> out;
  out.reserve(ex.masks.size());
  auto* pipelined = dynamic_cast<ProcessBackend*>(&backend);
  const std::size_t per_batch = config.masks_per_batch;
  const std::size_t group = pipelined ? per_batch * kPipelineDepth : per_batch;

  for (std::size_t begin = 0; begin < ex.masks.size(); begin += group) {
    const std::size_t end = std::min(ex.masks.size(), begin + group);
    std::vector<std::vector<ScoreRequest>> batches;
    for (std::size_t b = begin; b < end; b += per_batch) {
      std::vector<ScoreRequest> batch;
      for (std::size_t i = b; i < std::min(end, b + per_batch); ++i) {
        const PerturbationMask& m = ex.masks[i];
        const RleBitset rle = EncodeMaskCells(ex.levels[m.level_index], m);
        for (ScoreRequest& r : WordPairRequests(ex.case_id, rle, prefix, ex.span.token_ids,
                                                ex.contrast_tokens, config.method)) {
          batch.push_back(std::move(r));
        }
      }
      batches.push_back(std::move(batch));
    }
    std::vector<std::vector<ScoreResponse>> responses;
    if (pipelined) {
      responses = pipelined->ScoreBatches(batches);
    } else {
      for (const auto& batch : batches) responses.push_back(backend.ScoreBatch(batch));
    }
    for (std::size_t b = 0; b < batches.size(); ++b) {
      if (responses[b].size() != batches[b].size()) {
        throw ProtocolError("score batch answered with the wrong number of responses");
      }
      for (std::size_t i = 0; i < batches[b].size(); i += 2) {
        out.push_back(WordPairFromResponses(std::span(batches[b]).subspan(i, 2),
                                            std::span(responses[b]).subspan(i, 2),
                                            config.method));
      }
    }
  }
  return out;
}

}  // namespace

void ExplainConfig::Validate() const {
  segmentation.Validate();
  if (n_masks == 0) throw ArgumentError("n_masks must be positive");
  if (!(mask_probability > 0.0 && mask_probability < 1.0)) {
    throw ArgumentError("mask_probability must lie in (0, 1)");
  }
  if (!(epsilon > 0.0)) throw ArgumentError("epsilon must be positive");
  if (beam_size == 0) throw ArgumentError("beam_size must be >= 1");
  if (masks_per_batch == 0) throw ArgumentError("masks_per_batch must be >= 1");
}

Explanation ComputeExplanation(const ContrastCase& contrast_case, const Spectrogram& features,
                               Backend& backend, const ExplainConfig& config) {
  config.Validate();
  const TokenizerInfo info = backend.Handshake();
  Explanation ex;
  ex.case_id = contrast_case.case_id;
  backend.LoadFeatures(ex.case_id, features);

  GenerateRequest gen;
  gen.feature_id = ex.case_id;
  gen.beam_size = config.beam_size;
  gen.no_repeat_ngram = config.no_repeat_ngram;
  gen.max_len = config.max_len;
  GenerateResponse hyp = backend.Generate(gen);
  ex.hypothesis = std::move(hyp.tokens);
  ex.hypothesis_text = std::move(hyp.text);

  const Located located = LocateContrast(ex.hypothesis, contrast_case, info);
  ex.span = located.span;
  ex.roles_swapped = located.swapped;
  ex.explained_word = located.swapped ? contrast_case.foil_word : contrast_case.target_word;
  ex.contrast_word = located.swapped ? contrast_case.target_word : contrast_case.foil_word;
  ex.contrast_tokens = backend.Tokenize(ex.contrast_word);
  if (ex.contrast_tokens.empty()) {
    throw ArgumentError("backend tokenized '" + ex.contrast_word + "' to nothing");
  }

  const std::span<const TokenId> prefix(ex.hypothesis.data(), ex.span.start_step);
  ex.clean = WordPairProbabilities(backend, ex.case_id, std::nullopt, prefix, ex.span.token_ids,
                                   ex.contrast_tokens, config.method);

  ex.levels = MultiLevelSegment(features, config.segmentation);
  ex.masks = SampleMasks(ex.levels, PerturbationPlan::ForLevels(ex.levels.size(), config.n_masks,
                                                                config.mask_probability,
                                                                config.seed));
  ex.perturbed = ScoreMasks(backend, ex, config);
  return ex;
}

std::vector<double> MaskScores(const Explanation& explanation, ScorerKind scorer, double eps) {
  std::vector<double> out;
  out.reserve(explanation.perturbed.size());
  for (const WordPair& p : explanation.perturbed) {
    out.push_back(Score(scorer, explanation.clean, p, eps));
  }
  return out;
}

SaliencyMap ExplanationMap(const Explanation& explanation, ScorerKind scorer, double eps) {
  const std::vector<double> scores = MaskScores(explanation, scorer, eps);
  const std::size_t n_levels = explanation.levels.size();
  std::vector<std::vector<PerturbationMask>> level_masks(n_levels);
  std::vector<std::vector<double>> level_scores(n_levels);
  for (std::size_t i = 0; i < explanation.masks.size(); ++i) {
    const std::size_t l = explanation.masks[i].level_index;
    if (l >= n_levels) throw ArgumentError("mask refers to a missing segmentation level");
    level_masks[l].push_back(explanation.masks[i]);
    level_scores[l].push_back(scores[i]);
  }
  std::vector<std::vector<double>> per_level;
  for (std::size_t l = 0; l < n_levels; ++l) {
    per_level.push_back(
        AggregateSegmentScores(level_masks[l], level_scores[l], explanation.levels[l]));
  }
  SaliencyMap map = AssembleSaliency(explanation.levels, per_level);
  map.scorer = scorer;
  map.target_word = explanation.explained_word;
  if (scorer != ScorerKind::kBase) map.foil_word = explanation.contrast_word;
  return map;
}

SaliencyMap Explain(const ContrastCase& contrast_case, const Spectrogram& features,
                    Backend& backend, const ExplainConfig& config) {
  return ExplanationMap(ComputeExplanation(contrast_case, features, backend, config),
                        config.scorer, config.epsilon);
}

std::string ProvenanceJson(const Explanation& ex, const ExplainConfig& config, ScorerKind scorer,
                           std::string_view config_digest) {
  json levels = json::array();
  for (const SegmentMap& s : ex.levels) levels.push_back(s.n_segments);
  json j = {{"case_id", ex.case_id},
            {"scorer", ScorerName(scorer)},
            {"aggregation", AggregationMethodName(config.method)},
            {"seed", config.seed},
            {"config_digest", config_digest},
            {"n_masks", ex.masks.size()},
            {"mask_probability", config.mask_probability},
            {"epsilon", config.epsilon},
            {"segments_per_level", levels},
            {"hypothesis", ex.hypothesis_text},
            {"hypothesis_tokens", ex.hypothesis},
            {"explained_word", ex.explained_word},
            {"contrast_word", ex.contrast_word},
            {"roles_swapped", ex.roles_swapped},
            {"span_start", ex.span.start_step},
            {"p_explained", ex.clean.target},
            {"p_contrast", ex.clean.foil}};
  return j.dump(2) + "\n";
}

}  // namespace cxplain
