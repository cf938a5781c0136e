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

#include "cxplain/perturbation/rle.h"

#include "cxplain/core/errors.h"

namespace cxplain {

std::size_t RleBitset::size() const {
  std::size_t total = 0;
  for (const RleRun& run : runs) total += run.length;
  return total;
}

std::size_t RleBitset::count() const {
  std::size_t total = 0;
  for (const RleRun& run : runs) {
    if (run.bit) total += run.length;
  }
  return total;
}

RleBitset EncodeRle(const std::vector<bool>& bits) {
  RleBitset rle;
  for (bool bit : bits) {
    if (rle.runs.empty() || rle.runs.back().bit != bit ||
        rle.runs.back().length == UINT32_MAX) {
      rle.runs.push_back({bit, 0});
    }
    ++rle.runs.back().length;
  }
  return rle;
}

std::vector<bool> DecodeRle(const RleBitset& rle, std::size_t expected_size) {
  const std::size_t total = rle.size();
  if (expected_size != SIZE_MAX && total != expected_size) {
    throw ArgumentError("RLE covers " + std::to_string(total) + " cells, expected " +
                        std::to_string(expected_size));
  }
  std::vector<bool> bits;
  bits.reserve(total);
  for (const RleRun& run : rle.runs) bits.insert(bits.end(), run.length, run.bit);
  return bits;
}

RleBitset Canonicalize(const RleBitset& rle) {
  return EncodeRle(DecodeRle(rle));
}

std::string RleToBytes(const RleBitset& rle) {
  std::string out;
  out.reserve(rle.runs.size() * 5);
  for (const RleRun& run : rle.runs) {
    out.push_back(run.bit ? '\x01' : '\x00');
    for (int i = 0; i < 4; ++i) {
      out.push_back(static_cast<char>((run.length >> (8 * i)) & 0xFF));
    }
  }
  return out;
}

RleBitset RleFromBytes(std::string_view bytes) {
  if (bytes.size() % 5 != 0) throw ArgumentError("truncated RLE record");
  RleBitset rle;
  for (std::size_t pos = 0; pos < bytes.size(); pos += 5) {
    const auto bit = static_cast<unsigned char>(bytes[pos]);
    if (bit > 1) throw ArgumentError("RLE bit must be 0 or 1");
    std::uint32_t length = 0;
    for (int i = 0; i < 4; ++i) {
      length |= static_cast<std::uint32_t>(static_cast<unsigned char>(bytes[pos + 1 + i]))
                << (8 * i);
    }
    rle.runs.push_back({bit == 1, length});
  }
  return rle;
}

}  // namespace cxplain
