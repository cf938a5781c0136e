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

// Per-mask scores from clean (p) and perturbed (p~) word probabilities.
//
//   base        p(t) - p~(t)
//   difference  (p(t) - p~(t)) - (p(f) - p~(f))
//   relative    p(t) / (p(t) + p(f)) - p~(t) / (p~(t) + p~(f))

#ifndef CXPLAIN_ATTRIBUTION_SCORERS_H_
#define CXPLAIN_ATTRIBUTION_SCORERS_H_

#include "cxplain/core/types.h"
#include "cxplain/wordprob/wordprob.h"

namespace cxplain {

inline constexpr double kRelativeEpsilon = 1e-12;

double BaseScore(double p_t, double pm_t);
double DifferenceScore(double p_t, double pm_t, double p_f, double pm_f);
// Denominators below eps are raised to eps; a ratio whose numerator and
// denominator are both below eps counts as 0.5.
double RelativeScore(double p_t, double pm_t, double p_f, double pm_f,
                     double eps = kRelativeEpsilon);

double Score(ScorerKind kind, const WordPair& clean, const WordPair& perturbed,
             double eps = kRelativeEpsilon);

}  // namespace cxplain

#endif  // CXPLAIN_ATTRIBUTION_SCORERS_H_
