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

#include "cxplain/attribution/scorers.h"

#include <algorithm>

namespace cxplain {
namespace {

// t / (t + f) - 1/2, written as (t - f) / 2(t + f) so that swapping t and f
// negates it exactly. With non-negative inputs a denominator below eps
// implies a numerator below eps, which is the 0.5 case.
double CenteredRatio(double t, double f, double eps) {
  const double denom = t + f;
  if (t < eps && denom < eps) return 0.0;
  return 0.5 * ((t - f) / std::max(denom, eps));
}

}  // namespace

double BaseScore(double p_t, double pm_t) { return p_t - pm_t; }

double DifferenceScore(double p_t, double pm_t, double p_f, double pm_f) {
  return (p_t - pm_t) - (p_f - pm_f);
}

double RelativeScore(double p_t, double pm_t, double p_f, double pm_f, double eps) {
  return CenteredRatio(p_t, p_f, eps) - CenteredRatio(pm_t, pm_f, eps);
}

double Score(ScorerKind kind, const WordPair& clean, const WordPair& perturbed, double eps) {
  switch (kind) {
    case ScorerKind::kBase:
      return BaseScore(clean.target, perturbed.target);
    case ScorerKind::kContrastiveDifference:
      return DifferenceScore(clean.target, perturbed.target, clean.foil, perturbed.foil);
    case ScorerKind::kContrastiveRelative:
      return RelativeScore(clean.target, perturbed.target, clean.foil, perturbed.foil, eps);
  }
  return 0.0;
}

}  // namespace cxplain
