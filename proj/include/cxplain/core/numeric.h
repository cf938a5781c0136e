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

#ifndef CXPLAIN_CORE_NUMERIC_H_
#define CXPLAIN_CORE_NUMERIC_H_

#include <cmath>
#include <cstddef>

namespace cxplain {

// Neumaier's variant of Kahan summation.
class CompensatedSum {
 public:
  void Add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x)) {
      compensation_ += (sum_ - t) + x;
    } else {
      compensation_ += (x - t) + sum_;
    }
    sum_ = t;
    ++count_;
  }
  double Sum() const { return sum_ + compensation_; }
  std::size_t count() const { return count_; }
  // 0 when nothing was added.
  double Mean() const { return count_ == 0 ? 0.0 : Sum() / static_cast<double>(count_); }

 private:
  double sum_ = 0.0;
  double compensation_ = 0.0;
  std::size_t count_ = 0;
};

}  // namespace cxplain

#endif  // CXPLAIN_CORE_NUMERIC_H_
