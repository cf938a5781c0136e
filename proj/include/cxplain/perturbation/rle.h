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

// Run-length encoded bitsets over flattened row-major cells.
//
// Binary form: a sequence of 5-byte records, one per run: the bit (0 or 1)
// then the run length as uint32 little-endian. On the wire the same runs
// travel as [[bit, length], ...].

#ifndef CXPLAIN_PERTURBATION_RLE_H_
#define CXPLAIN_PERTURBATION_RLE_H_

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace cxplain {

struct RleRun {
  bool bit = false;
  std::uint32_t length = 0;

  bool operator==(const RleRun& other) const = default;
};

// Canonical runs: lengths > 0, adjacent runs alternate. The empty bitset has
// no runs.
struct RleBitset {
  std::vector<RleRun> runs;

  std::size_t size() const;  // total cell count
  std::size_t count() const;  // number of set cells
  bool operator==(const RleBitset& other) const = default;
};

RleBitset EncodeRle(const std::vector<bool>& bits);

// Throws ArgumentError when the runs do not cover exactly `expected_size`
// cells (pass SIZE_MAX to skip the check).
std::vector<bool> DecodeRle(const RleBitset& rle,
                            std::size_t expected_size = SIZE_MAX);

// Merges zero-length and repeated runs into canonical form.
RleBitset Canonicalize(const RleBitset& rle);

std::string RleToBytes(const RleBitset& rle);
// Throws ArgumentError on a truncated record or a bit byte other than 0/1.
RleBitset RleFromBytes(std::string_view bytes);

}  // namespace cxplain

#endif  // CXPLAIN_PERTURBATION_RLE_H_
