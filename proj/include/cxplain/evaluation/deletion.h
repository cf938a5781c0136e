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

// Deletion metric: zero the most salient cells step by step, re-decode, and
// track coverage (either word still produced) and flip rate (target turned
// into foil).

#ifndef CXPLAIN_EVALUATION_DELETION_H_
#define CXPLAIN_EVALUATION_DELETION_H_

#include <cstddef>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/backend/backend.h"
#include "cxplain/core/types.h"

namespace cxplain {

struct DeletionConfig {
  double step_fraction = 0.01;
  double max_fraction = 0.20;
  float fill_value = 0.0f;
  std::size_t beam_size = 5;
  std::size_t no_repeat_ngram = 5;
  std::size_t max_len = 256;

  void Validate() const;  // throws ArgumentError unless 0 < step <= max <= 1
  // 0, step, 2 step, ... up to max (within 1e-9), always including 0.
  std::vector<double> Fractions() const;
};

// Cell indices by score descending; ties by row-major index ascending.
std::vector<std::size_t> DeletionOrder(const SaliencyMap& map);

// ceil(fraction * n_cells), with 1e-9 slack against representation error.
std::size_t DeletedCount(std::size_t n_cells, double fraction);

// The first DeletedCount cells of `order` set to `fill`. Throws
// ArgumentError for a fraction outside [0, 1] or an order of the wrong size.
Spectrogram DeleteFraction(const Spectrogram& spec, std::span<const std::size_t> order,
                           double fraction, float fill);

enum class OutcomeKind { kTarget, kFoil, kNeither };

std::string_view OutcomeName(OutcomeKind kind);  // "target", "foil", "neither"

// Case-sensitive whole-word match; words are separated by whitespace and
// ASCII punctuation (hyphens and apostrophes included). When both occur the
// earlier one wins.
OutcomeKind DetectOutcome(std::string_view hypothesis, std::string_view target,
                          std::string_view foil);

struct EvalCase {
  ContrastCase contrast;
  Spectrogram features;
  SaliencyMap map;
};

// kSkipped: the caller had no map for the case (error holds the reason).
enum class CaseStatus { kEvaluated, kOutOfCoverage, kFailed, kSkipped };

struct CaseTrajectory {
  std::string case_id;
  Gender gender = Gender::kFemale;
  CaseStatus status = CaseStatus::kEvaluated;
  std::vector<OutcomeKind> outcomes;  // one per fraction (kOutOfCoverage: step 0 only)
  std::vector<std::string> hypotheses;
  std::string error;  // kFailed and kSkipped
};

struct EvalCurves {
  std::vector<double> fractions;
  std::vector<double> coverage;
  std::vector<double> flip_rate;  // NaN where no initially-target case is covered
  std::vector<std::size_t> n_covered;
  std::vector<std::size_t> n_flipped;
  std::vector<std::size_t> n_flip_base;  // covered cases that started as target
  std::size_t n_cases = 0;                // evaluated cases (the coverage denominator)
  std::vector<CaseTrajectory> cases;      // every input case, input order
};

// Curves over the evaluated trajectories accepted by `keep` (all if empty).
EvalCurves SummarizeTrajectories(std::vector<double> fractions,
                                 std::vector<CaseTrajectory> trajectories,
                                 const std::function<bool(const CaseTrajectory&)>& keep = {});

// Registers each case under its id and each deleted copy under
// "<id>#del<count>-<order digest>", decodes, and classifies. Backend errors drop the case
// (kFailed with the message); cases that are neither target nor foil at
// fraction 0 are kOutOfCoverage.
EvalCurves RunDeletionEval(std::span<const EvalCase> cases, Backend& backend,
                           const DeletionConfig& config);

// fraction,coverage,flip_rate,n_covered,n_flipped; undefined flip
// rates are written as "nan". Numbers use the shortest round-trip form.
std::string CurvesCsv(const EvalCurves& curves);
// Per-case outcome trajectories as JSON.
std::string CurvesReportJson(const EvalCurves& curves);

// Reads fraction, coverage and flip_rate back from CurvesCsv output ("#"
// lines are skipped). Count columns are restored when present. Throws
// ParseError.
EvalCurves ParseCurvesCsv(std::string_view text);

}  // namespace cxplain

#endif  // CXPLAIN_EVALUATION_DELETION_H_
