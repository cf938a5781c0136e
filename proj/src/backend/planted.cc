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

#include "cxplain/backend/planted.h"

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdio>
#include <random>
#include <string>

#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

constexpr std::size_t kRegionFrames = 6;
constexpr std::size_t kRegionBins = 8;
constexpr float kCueLevel = 6.0f;
constexpr float kContentLevel = 3.0f;

struct AdjectivePair {
  const char* masculine;
  const char* feminine;
};

constexpr std::array<AdjectivePair, 5> kPairs = {{{"fatigue", "fatiguee"},
                                                  {"pret", "prete"},
                                                  {"content", "contente"},
                                                  {"heureux", "heureuse"},
                                                  {"seul", "seule"}}};

// Sentence frames; "*" is the adjective slot.
const std::vector<std::vector<std::string>>& Frames() {
  static const std::vector<std::vector<std::string>> frames = {
      {"je", "suis", "tres", "*", "."},
      {"je", "suis", "*", "."},
      {"hier", "je", "suis", "*", "."},
      {"je", "me", "sens", "*", "."},
  };
  return frames;
}

// Vocabulary: EOS, unk, punctuation, then every word with the word marker.
struct Vocab {
  std::vector<std::string> surfaces;
  TokenId Id(const std::string& word) const {
    const std::string marked = std::string(kWordMarker) + word;
    for (std::size_t i = 0; i < surfaces.size(); ++i) {
      if (surfaces[i] == marked || surfaces[i] == word) return static_cast<TokenId>(i);
    }
    throw ArgumentError("word '" + word + "' missing from the planted vocabulary");
  }
};

Vocab BuildVocab() {
  Vocab v;
  v.surfaces = {"</s>", "<unk>", "."};
  std::vector<std::string> words;
  for (const auto& frame : Frames()) {
    for (const std::string& w : frame) {
      if (w != "*" && w != "." &&
          std::find(words.begin(), words.end(), w) == words.end()) {
        words.push_back(w);
      }
    }
  }
  for (const AdjectivePair& p : kPairs) {
    words.push_back(p.masculine);
    words.push_back(p.feminine);
  }
  for (const std::string& w : words) v.surfaces.push_back(std::string(kWordMarker) + w);
  return v;
}

double Unit(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

std::size_t Pick(std::mt19937_64& rng, std::size_t lo, std::size_t hi) {  // [lo, hi]
  return lo + static_cast<std::size_t>(Unit(rng) * static_cast<double>(hi - lo + 1));
}

void Fill(std::vector<float>& data, std::size_t n_bins, const CellRect& r, float level,
          std::mt19937_64& rng) {
  for (std::size_t f = r.frame_begin; f < r.frame_end; ++f) {
    for (std::size_t b = r.bin_begin; b < r.bin_end; ++b) {
      data[f * n_bins + b] = level + static_cast<float>(0.2 * (Unit(rng) - 0.5));
    }
  }
}

}  // namespace

PlantedSuite BuildPlantedSuite(const PlantedSuiteOptions& options) {
  const std::size_t frames = options.n_frames;
  const std::size_t bins = options.n_bins;
  if (frames < 48 || bins < 16) {
    throw ArgumentError("planted suites need at least 48 frames and 16 bins");
  }
  if (!(options.cue_fraction > 0.0 && options.cue_fraction <= 0.25)) {
    throw ArgumentError("cue_fraction must lie in (0, 0.25]");
  }
  if (options.out_of_coverage_cases > options.n_cases) {
    throw ArgumentError("more out-of-coverage cases than cases");
  }

  const Vocab vocab = BuildVocab();
  std::vector<TokenId> bow;
  for (std::size_t i = 0; i < vocab.surfaces.size(); ++i) {
    if (i == 1 || vocab.surfaces[i].starts_with(kWordMarker)) {
      bow.push_back(static_cast<TokenId>(i));
    }
  }
  PlantedSuite out;
  out.suite.tokenizer = TokenizerInfo(vocab.surfaces.size(), bow, {2}, 0, vocab.surfaces);
  out.suite.unk_token = 1;

  const std::size_t cue_bins = bins / 4;
  const std::size_t cue_cells = static_cast<std::size_t>(
      std::llround(options.cue_fraction * static_cast<double>(frames * bins)));
  const std::size_t cue_frames = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::llround(static_cast<double>(cue_cells) / cue_bins)));
  const std::size_t half = frames / 2;
  if (cue_frames + 2 > half) throw ArgumentError("cue region does not fit in half the frames");

  std::mt19937_64 rng(options.seed);
  for (std::size_t i = 0; i < options.n_cases; ++i) {
    const bool feminine = i % 2 == 0;
    const AdjectivePair& pair = kPairs[Pick(rng, 0, kPairs.size() - 1)];
    const auto& frame = Frames()[Pick(rng, 0, Frames().size() - 1)];
    const std::string target = feminine ? pair.feminine : pair.masculine;
    const std::string foil = feminine ? pair.masculine : pair.feminine;

    SyntheticModelSpec model;
    std::vector<std::string> words;
    for (const std::string& w : frame) {
      const std::string word = w == "*" ? target : w;
      if (w == "*") model.contrast_slot = model.template_tokens.size();
      model.template_tokens.push_back(vocab.Id(word));
      words.push_back(word);
    }
    model.target_token = vocab.Id(target);
    model.foil_token = vocab.Id(foil);

    // Cue on one side, content regions on the other.
    const bool cue_left = Unit(rng) < 0.5;
    const std::size_t cue_f0 =
        cue_left ? Pick(rng, 1, half - cue_frames - 1) : Pick(rng, half + 1, frames - cue_frames - 1);
    const std::size_t cue_b0 = Pick(rng, 0, bins - cue_bins);
    model.cue_region = {cue_f0, cue_f0 + cue_frames, cue_b0, cue_b0 + cue_bins};

    const std::size_t region_bins = std::min(kRegionBins, bins / 2);
    const std::size_t lo = cue_left ? half + 1 : 1;
    const std::size_t hi = cue_left ? frames - 2 * kRegionFrames - 4 - 1 : half - 2 * kRegionFrames - 4 - 1;
    const std::size_t slot_f0 = Pick(rng, lo, hi);
    const std::size_t slot_b0 = Pick(rng, 0, bins - region_bins);
    const std::size_t other_f0 = slot_f0 + kRegionFrames + 4;
    const std::size_t other_b0 = Pick(rng, 0, bins - region_bins);
    const TokenId other_word = model.template_tokens[model.contrast_slot == 0 ? 1 : 0];
    model.content_regions = {
        {{slot_f0, slot_f0 + kRegionFrames, slot_b0, slot_b0 + region_bins},
         {model.target_token, model.foil_token}},
        {{other_f0, other_f0 + kRegionFrames, other_b0, other_b0 + region_bins}, {other_word}},
    };

    std::vector<float> data(frames * bins);
    const double phase = 2.0 * M_PI * Unit(rng);
    for (std::size_t f = 0; f < frames; ++f) {
      const double loud = 0.75 + 0.25 * std::sin(phase + 2.0 * M_PI * f / 16.0);
      for (std::size_t b = 0; b < bins; ++b) {
        const double tilt = 1.0 - 0.5 * static_cast<double>(b) / bins;
        data[f * bins + b] = static_cast<float>(loud * tilt + 0.3 * Unit(rng));
      }
    }
    Fill(data, bins, model.cue_region, kCueLevel, rng);
    for (const ContentRegion& r : model.content_regions) Fill(data, bins, r.rect, kContentLevel, rng);

    char id[32];
    std::snprintf(id, sizeof(id), "case%03zu", i);
    PlantedCase pc{ContrastCase{}, Spectrogram(frames, bins, std::move(data)), 0};
    pc.contrast.case_id = id;
    pc.contrast.features_path = std::string(id) + ".fbnk";
    std::string reference;
    for (std::size_t w = 0; w < words.size(); ++w) {
      if (w > 0 && words[w] != ".") reference += ' ';
      reference += words[w];
    }
    pc.contrast.reference_text = reference;
    pc.contrast.gender_of_target = feminine ? Gender::kFemale : Gender::kMale;
    pc.contrast.category = "planted";
    if (i >= options.n_cases - options.out_of_coverage_cases) {
      // Ask about a pair this model never produces.
      const AdjectivePair& other = kPairs[(&pair - kPairs.data() + 1) % kPairs.size()];
      pc.contrast.target_word = feminine ? other.feminine : other.masculine;
      pc.contrast.foil_word = feminine ? other.masculine : other.feminine;
    } else {
      pc.contrast.target_word = target;
      pc.contrast.foil_word = foil;
    }
    model.Validate(frames, bins, vocab.surfaces.size());
    out.suite.models.emplace(id, model);
    out.cases.push_back(std::move(pc));
  }
  return out;
}

}  // namespace cxplain
