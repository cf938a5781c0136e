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

#include "cxplain/evaluation/statistics.h"

#include <algorithm>
#include <cmath>
#include <vector>

#include <boost/math/special_functions/beta.hpp>

#include "cxplain/core/errors.h"
#include "cxplain/core/numeric.h"

namespace cxplain {
namespace {

void CheckPaired(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw ArgumentError("series lengths differ");
  if (a.size() < 2) throw ArgumentError("need at least two paired values");
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!std::isfinite(a[i]) || !std::isfinite(b[i])) {
      throw ArgumentError("series contain a non-finite value");
    }
  }
}

double Mean(std::span<const double> x) {
  CompensatedSum s;
  for (double v : x) s.Add(v);
  return s.Mean();
}

}  // namespace

double Pearson(std::span<const double> a, std::span<const double> b) {
  CheckPaired(a, b);
  const double ma = Mean(a);
  const double mb = Mean(b);
  CompensatedSum sab, saa, sbb;
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double da = a[i] - ma;
    const double db = b[i] - mb;
    sab.Add(da * db);
    saa.Add(da * da);
    sbb.Add(db * db);
  }
  if (!(saa.Sum() > 0.0) || !(sbb.Sum() > 0.0)) {
    throw DegenerateError("correlation undefined: a series has zero variance");
  }
  const double r = sab.Sum() / std::sqrt(saa.Sum() * sbb.Sum());
  return std::clamp(r, -1.0, 1.0);
}

double StudentTwoSidedP(double t, double df) {
  if (!(df > 0.0)) throw ArgumentError("degrees of freedom must be positive");
  if (std::isnan(t)) throw ArgumentError("t is NaN");
  if (std::isinf(t)) return 0.0;
  const double x = df / (df + t * t);
  return std::clamp(boost::math::ibeta(df / 2.0, 0.5, x), 0.0, 1.0);
}

TTestResult PairedTTest(std::span<const double> a, std::span<const double> b) {
  CheckPaired(a, b);
  const std::size_t n = a.size();
  std::vector<double> d(n);
  for (std::size_t i = 0; i < n; ++i) d[i] = a[i] - b[i];
  const double md = Mean(d);
  CompensatedSum ss;
  for (double v : d) ss.Add((v - md) * (v - md));
  TTestResult r;
  r.df = n - 1;
  const bool identical = std::all_of(d.begin(), d.end(), [&](double v) { return v == d[0]; });
  if (identical) {
    if (d[0] == 0.0) return r;  // t = 0, p = 1
    throw DegenerateError("paired differences are constant and non-zero");
  }
  const double sd = std::sqrt(ss.Sum() / static_cast<double>(n - 1));
  r.t = md / (sd / std::sqrt(static_cast<double>(n)));
  r.p = StudentTwoSidedP(r.t, static_cast<double>(r.df));
  return r;
}

}  // namespace cxplain
