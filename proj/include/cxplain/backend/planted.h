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

// Generator for planted-truth suites: gendered-adjective sentences whose
// contrast is decided by a bright cue rectangle, with the slot word and one
// other word gated by their own (dimmer) rectangles placed away from the cue.

#ifndef CXPLAIN_BACKEND_PLANTED_H_
#define CXPLAIN_BACKEND_PLANTED_H_

#include <cstddef>
#include <cstdint>
#include <vector>

#include "cxplain/backend/synthetic.h"
#include "cxplain/core/types.h"

namespace cxplain {

struct PlantedSuiteOptions {
  std::size_t n_cases = 20;
  std::size_t n_frames = 100;
  std::size_t n_bins = 80;
  double cue_fraction = 0.03;  // of all cells
  // The last this-many cases ask about an adjective pair the model never
  // emits for them, so they fall outside coverage.
  std::size_t out_of_coverage_cases = 0;
  std::uint64_t seed = 1234;
};

struct PlantedCase {
  ContrastCase contrast;  // features_path is "<case_id>.fbnk"
  Spectrogram features;
  // Index into the model's content_regions of the region gating the slot.
  std::size_t slot_region = 0;
};

struct PlantedSuite {
  SyntheticSuite suite;  // one model per case, keyed by case_id
  std::vector<PlantedCase> cases;
};

// Throws ArgumentError when the layout cannot fit (fewer than 48 frames or
// 16 bins, or cue_fraction outside (0, 0.25]).
PlantedSuite BuildPlantedSuite(const PlantedSuiteOptions& options);

}  // namespace cxplain

#endif  // CXPLAIN_BACKEND_PLANTED_H_
