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

#ifndef CXPLAIN_EVALUATION_STATISTICS_H_
#define CXPLAIN_EVALUATION_STATISTICS_H_

#include <cstddef>
#include <span>

namespace cxplain {

// Product-moment correlation. Throws ArgumentError for unequal lengths or
// fewer than 2 values, DegenerateError when either side has zero variance.
double Pearson(std::span<const double> a, std::span<const double> b);

struct TTestResult {
  double t = 0.0;
  double p = 1.0;  // two-sided
  std::size_t df = 0;
};

// Paired t-test on d = a - b with n - 1 degrees of freedom. All-zero
// differences give t = 0, p = 1; identical non-zero differences throw
// DegenerateError. Throws ArgumentError for unequal lengths or n < 2.
TTestResult PairedTTest(std::span<const double> a, std::span<const double> b);

// Two-sided tail probability P(|T| >= |t|) for Student's t with df degrees
// of freedom, via the regularized incomplete beta function.
double StudentTwoSidedP(double t, double df);

}  // namespace cxplain

#endif  // CXPLAIN_EVALUATION_STATISTICS_H_
