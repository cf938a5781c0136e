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

// Brute-force numeric oracles for the statistics, independent of the
// library code paths (long double sums, Simpson quadrature).

#ifndef CXPLAIN_TESTS_TESTING_ORACLES_H_
#define CXPLAIN_TESTS_TESTING_ORACLES_H_

#include <cmath>
#include <vector>

namespace cxplain::testing {

// Textbook formula in long double, no compensation.
inline double PearsonOracle(const std::vector<double>& a, const std::vector<double>& b) {
  const long double n = a.size();
  long double sa = 0, sb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) sa += a[i], sb += b[i];
  const long double ma = sa / n, mb = sb / n;
  long double cab = 0, caa = 0, cbb = 0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    cab += (a[i] - ma) * (b[i] - mb);
    caa += (a[i] - ma) * (a[i] - ma);
    cbb += (b[i] - mb) * (b[i] - mb);
  }
  return static_cast<double>(cab / std::sqrt(caa * cbb));
}

// P(|T| >= |t|) by Simpson integration of the Student density over
// [0, |t|], with the normalizer from lgamma.
inline double StudentPOracle(double t, double df) {
  const double c = std::exp(std::lgamma((df + 1) / 2) - std::lgamma(df / 2)) /
                   std::sqrt(df * M_PI);
  auto pdf = [&](double x) { return c * std::pow(1 + x * x / df, -(df + 1) / 2); };
  const int n = 20000;
  const double h = std::abs(t) / n;
  double s = pdf(0) + pdf(std::abs(t));
  for (int i = 1; i < n; ++i) s += (i % 2 ? 4 : 2) * pdf(i * h);
  return 1.0 - 2.0 * s * h / 3.0;
}

// Paired t statistic from the definition, in long double.
inline double PairedTOracle(const std::vector<double>& a, const std::vector<double>& b) {
  const std::size_t n = a.size();
  long double sum = 0;
  for (std::size_t i = 0; i < n; ++i) sum += static_cast<long double>(a[i]) - b[i];
  const long double mean = sum / n;
  long double ss = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const long double d = static_cast<long double>(a[i]) - b[i] - mean;
    ss += d * d;
  }
  return static_cast<double>(mean / (std::sqrt(ss / (n - 1)) / std::sqrt(static_cast<long double>(n))));
}

}  // namespace cxplain::testing

#endif  // CXPLAIN_TESTS_TESTING_ORACLES_H_
