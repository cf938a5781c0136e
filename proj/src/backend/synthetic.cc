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

#include "cxplain/backend/synthetic.h"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <unordered_map>

#include "json.hpp"
#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

using json = nlohmann::json;

double Gate(double fraction, double epsilon) {
  return epsilon + (1.0 - 2.0 * epsilon) * std::clamp(fraction, 0.0, 1.0);
}

bool Lists(const ContentRegion& region, TokenId token) {
  return std::find(region.token_ids.begin(), region.token_ids.end(), token) !=
         region.token_ids.end();
}

json RectToJson(const CellRect& r) {
  return json::array({r.frame_begin, r.frame_end, r.bin_begin, r.bin_end});
}

CellRect RectFromJson(const json& j) {
  if (!j.is_array() || j.size() != 4) {
    throw ArgumentError("a region is [frame_begin, frame_end, bin_begin, bin_end]");
  }
  return {j[0].get<std::size_t>(), j[1].get<std::size_t>(), j[2].get<std::size_t>(),
          j[3].get<std::size_t>()};
}

std::string BaseId(const std::string& feature_id) {
  return feature_id.substr(0, feature_id.find('#'));
}

// Sum of values inside `rect`, skipping cells set in `mask` (if non-null).
double RectEnergy(const CellRect& rect, const Spectrogram& spec,
                  const std::vector<bool>* mask) {
  double total = 0.0;
  for (std::size_t f = rect.frame_begin; f < rect.frame_end; ++f) {
    for (std::size_t b = rect.bin_begin; b < rect.bin_end; ++b) {
      const std::size_t cell = f * spec.n_bins() + b;
      if (mask != nullptr && (*mask)[cell]) continue;
      total += spec.data()[cell];
    }
  }
  return total;
}

double Fraction(double retained, double reference) {
  return reference > 0.0 ? retained / reference : 1.0;
}

}  // namespace

void SyntheticModelSpec::Validate(std::size_t n_frames, std::size_t n_bins,
                                  std::size_t vocab_size) const {
  auto check_rect = [&](const CellRect& r, const std::string& name) {
    if (r.frame_begin >= r.frame_end || r.bin_begin >= r.bin_end) {
      throw ArgumentError(name + " is empty");
    }
    if (r.frame_end > n_frames || r.bin_end > n_bins) {
      throw ArgumentError(name + " lies outside the " + std::to_string(n_frames) + "x" +
                          std::to_string(n_bins) + " features");
    }
  };
  auto check_token = [&](TokenId t) {
    if (t < 0 || static_cast<std::size_t>(t) >= vocab_size) {
      throw ArgumentError("token id " + std::to_string(t) + " outside the vocabulary");
    }
  };
  if (template_tokens.empty()) throw ArgumentError("template is empty");
  if (contrast_slot >= template_tokens.size()) {
    throw ArgumentError("contrast slot outside the template");
  }
  if (template_tokens[contrast_slot] != target_token) {
    throw ArgumentError("template must carry the target at the contrast slot");
  }
  if (target_token == foil_token) throw ArgumentError("target and foil tokens coincide");
  if (!(epsilon >= 0.0 && rho > 0.0 && 2.0 * epsilon + rho < 1.0)) {
    throw ArgumentError("need eps >= 0, rho > 0 and 2 eps + rho < 1");
  }
  if (vocab_size < 4) throw ArgumentError("vocabulary too small for the law");
  for (TokenId t : template_tokens) check_token(t);
  check_token(foil_token);
  check_rect(cue_region, "cue region");
  for (std::size_t i = 0; i < content_regions.size(); ++i) {
    check_rect(content_regions[i].rect, "content region " + std::to_string(i));
    for (TokenId t : content_regions[i].token_ids) check_token(t);
  }
}

std::string SyntheticSuite::ToJson() const {
  json models_json = json::object();
  for (const auto& [id, m] : models) {
    json regions = json::array();
    for (const ContentRegion& r : m.content_regions) {
      regions.push_back({{"rect", RectToJson(r.rect)}, {"token_ids", r.token_ids}});
    }
    models_json[id] = {{"template", m.template_tokens},
                       {"contrast_slot", m.contrast_slot},
                       {"target", m.target_token},
                       {"foil", m.foil_token},
                       {"cue_region", RectToJson(m.cue_region)},
                       {"content_regions", regions},
                       {"epsilon", m.epsilon},
                       {"rho", m.rho}};
  }
  json j = {{"vocab", tokenizer.token_surfaces()},
            {"bow_token_ids", tokenizer.bow_token_ids()},
            {"punctuation_token_ids", tokenizer.punctuation_token_ids()},
            {"eos_token_id", tokenizer.eos_token_id()},
            {"unk_token_id", unk_token},
            {"models", models_json}};
  return j.dump(1) + "\n";
}

SyntheticSuite SyntheticSuite::FromJson(std::string_view text) {
  try {
    const json j = json::parse(text);
    SyntheticSuite suite;
    auto vocab = j.at("vocab").get<std::vector<std::string>>();
    const std::size_t vocab_size = vocab.size();
    suite.tokenizer = TokenizerInfo(vocab_size, j.at("bow_token_ids").get<std::vector<TokenId>>(),
                                    j.at("punctuation_token_ids").get<std::vector<TokenId>>(),
                                    j.at("eos_token_id").get<TokenId>(), std::move(vocab));
    suite.tokenizer.Validate();
    suite.unk_token = j.at("unk_token_id").get<TokenId>();
    if (!suite.tokenizer.InVocab(suite.unk_token)) throw ArgumentError("unk id outside vocab");
    for (const auto& [id, m] : j.at("models").items()) {
      SyntheticModelSpec spec;
      spec.template_tokens = m.at("template").get<std::vector<TokenId>>();
      spec.contrast_slot = m.at("contrast_slot").get<std::size_t>();
      spec.target_token = m.at("target").get<TokenId>();
      spec.foil_token = m.at("foil").get<TokenId>();
      spec.cue_region = RectFromJson(m.at("cue_region"));
      for (const json& r : m.value("content_regions", json::array())) {
        spec.content_regions.push_back(
            {RectFromJson(r.at("rect")), r.at("token_ids").get<std::vector<TokenId>>()});
      }
      spec.epsilon = m.value("epsilon", 0.05);
      spec.rho = m.value("rho", 0.02);
      suite.models.emplace(id, std::move(spec));
    }
    return suite;
  } catch (const json::exception& e) {
    throw ArgumentError(std::string("bad synthetic suite: ") + e.what());
  }
}

double EnergyFraction(const CellRect& rect, const Spectrogram& masked,
                      const Spectrogram& reference) {
  return Fraction(RectEnergy(rect, masked, nullptr), RectEnergy(rect, reference, nullptr));
}

RegionFractions ComputeFractions(const SyntheticModelSpec& spec, const Spectrogram& masked,
                                 const Spectrogram& reference) {
  RegionFractions out;
  out.cue = EnergyFraction(spec.cue_region, masked, reference);
  for (const ContentRegion& r : spec.content_regions) {
    out.content.push_back(EnergyFraction(r.rect, masked, reference));
  }
  return out;
}

std::vector<double> SyntheticStepDistribution(const SyntheticModelSpec& spec,
                                              std::size_t vocab_size, TokenId unk,
                                              TokenId eos,
                                              const RegionFractions& fractions,
                                              std::size_t step) {
  std::vector<double> p(vocab_size, 0.0);
  if (step >= spec.template_tokens.size()) {
    p[eos] = 1.0;
    return p;
  }
  const double k = 1.0 - spec.rho;
  const double eps = spec.epsilon;
  std::vector<TokenId> named;
  if (step == spec.contrast_slot) {
    const double q = Gate(fractions.cue, eps);
    std::size_t gate_index = spec.content_regions.size();
    for (std::size_t i = 0; i < spec.content_regions.size(); ++i) {
      if (Lists(spec.content_regions[i], spec.target_token) ||
          Lists(spec.content_regions[i], spec.foil_token)) {
        gate_index = i;
        break;
      }
    }
    if (gate_index == spec.content_regions.size()) {
      p[spec.target_token] = k * q;
      p[spec.foil_token] = k - p[spec.target_token];
      named = {spec.target_token, spec.foil_token};
    } else {
      const double g = Gate(fractions.content[gate_index], eps);
      p[spec.target_token] = k * g * q;
      p[spec.foil_token] = k * g * (1.0 - q);
      p[unk] = k * (1.0 - g);
      named = {spec.target_token, spec.foil_token, unk};
    }
  } else {
    const TokenId word = spec.template_tokens[step];
    std::size_t region = spec.content_regions.size();
    for (std::size_t i = 0; i < spec.content_regions.size(); ++i) {
      if (Lists(spec.content_regions[i], word)) {
        region = i;
        break;
      }
    }
    if (region == spec.content_regions.size() || word == unk) {
      p[word] = k;
      named = {word};
    } else {
      p[word] = k * Gate(fractions.content[region], eps);
      p[unk] = k - p[word];
      named = {word, unk};
    }
  }
  std::sort(named.begin(), named.end());
  named.erase(std::unique(named.begin(), named.end()), named.end());
  const double share = spec.rho / static_cast<double>(vocab_size - named.size());
  for (std::size_t v = 0; v < vocab_size; ++v) {
    if (!std::binary_search(named.begin(), named.end(), static_cast<TokenId>(v))) {
      p[v] = share;
    }
  }
  return p;
}

std::vector<TokenId> BeamSearch(const std::vector<std::vector<double>>& step_distributions,
                                TokenId eos, std::size_t beam_size,
                                std::size_t no_repeat_ngram, std::size_t max_len) {
  struct Hyp {
    std::vector<TokenId> tokens;
    double logp = 0.0;
  };
  auto better = [](const Hyp& a, const Hyp& b) {
    if (a.logp != b.logp) return a.logp > b.logp;
    return a.tokens < b.tokens;
  };
  auto blocked = [&](const std::vector<TokenId>& tokens, TokenId next) {
    const std::size_t n = no_repeat_ngram;
    if (n == 0 || tokens.size() + 1 < n) return false;
    // The n-gram ending in `next` must not occur earlier.
    const std::size_t tail = tokens.size() - (n - 1);
    for (std::size_t start = 0; start + n <= tokens.size(); ++start) {
      bool same = tokens[start + n - 1] == next;
      for (std::size_t i = 0; same && i + 1 < n; ++i) same = tokens[start + i] == tokens[tail + i];
      if (same) return true;
    }
    return false;
  };

  std::vector<Hyp> active = {Hyp{}};
  std::vector<Hyp> finished;
  for (std::size_t step = 0; step < max_len && !active.empty(); ++step) {
    const std::vector<double>& dist =
        step_distributions[std::min(step, step_distributions.size() - 1)];
    std::vector<Hyp> candidates;
    for (const Hyp& h : active) {
      for (std::size_t v = 0; v < dist.size(); ++v) {
        if (dist[v] <= 0.0 || blocked(h.tokens, static_cast<TokenId>(v))) continue;
        Hyp next = h;
        next.tokens.push_back(static_cast<TokenId>(v));
        next.logp += std::log(dist[v]);
        candidates.push_back(std::move(next));
      }
    }
    std::sort(candidates.begin(), candidates.end(), better);
    if (candidates.size() > beam_size) candidates.resize(beam_size);
    active.clear();
    for (Hyp& c : candidates) {
      (c.tokens.back() == eos ? finished : active).push_back(std::move(c));
    }
    if (!finished.empty()) {
      const Hyp& best = *std::min_element(finished.begin(), finished.end(), better);
      // Log probabilities only fall, so no active hypothesis can overtake.
      if (active.empty() || !better(active.front(), best)) break;
    }
  }
  finished.insert(finished.end(), active.begin(), active.end());
  if (finished.empty()) return {};
  return std::min_element(finished.begin(), finished.end(), better)->tokens;
}

SyntheticBackend::SyntheticBackend(SyntheticSuite suite) : suite_(std::move(suite)) {
  suite_.tokenizer.Validate();
}

TokenizerInfo SyntheticBackend::Handshake() { return suite_.tokenizer; }

void SyntheticBackend::LoadFeatures(const std::string& feature_id, const Spectrogram& spec) {
  auto it = features_.find(feature_id);
  if (it != features_.end()) {
    if (it->second.features == spec) return;
    throw BackendError("feature_conflict",
                       "feature id '" + feature_id + "' already holds different features");
  }
  const std::string base = BaseId(feature_id);
  auto model = suite_.models.find(base);
  if (model == suite_.models.end()) {
    throw BackendError("unknown_model", "no synthetic model for '" + base + "'");
  }
  try {
    model->second.Validate(spec.n_frames(), spec.n_bins(), suite_.tokenizer.vocab_size());
  } catch (const ArgumentError& e) {
    throw BackendError("invalid_request", e.what());
  }
  features_.emplace(feature_id, Entry{spec, &model->second, base});
}

const SyntheticBackend::Entry& SyntheticBackend::Lookup(const std::string& feature_id) const {
  auto it = features_.find(feature_id);
  if (it == features_.end()) {
    throw BackendError("unknown_feature", "feature id '" + feature_id + "' is not registered");
  }
  return it->second;
}

RegionFractions SyntheticBackend::Fractions(const Entry& entry,
                                            const std::optional<RleBitset>& mask) {
  auto ref_it = features_.find(entry.base_id);
  const Spectrogram& reference =
      ref_it != features_.end() ? ref_it->second.features : entry.features;
  const std::vector<bool>* cells = nullptr;
  if (mask) {
    if (mask->size() != entry.features.num_cells()) {
      throw BackendError("invalid_request", "mask covers " + std::to_string(mask->size()) +
                                                " cells, features have " +
                                                std::to_string(entry.features.num_cells()));
    }
    scratch_.clear();
    for (const RleRun& run : mask->runs) scratch_.insert(scratch_.end(), run.length, run.bit);
    cells = &scratch_;
  }
  const SyntheticModelSpec& spec = *entry.model;
  RegionFractions out;
  out.cue = Fraction(RectEnergy(spec.cue_region, entry.features, cells),
                     RectEnergy(spec.cue_region, reference, nullptr));
  for (const ContentRegion& r : spec.content_regions) {
    out.content.push_back(Fraction(RectEnergy(r.rect, entry.features, cells),
                                   RectEnergy(r.rect, reference, nullptr)));
  }
  return out;
}

std::vector<std::vector<double>> SyntheticBackend::Distributions(
    const Entry& entry, const RegionFractions& fractions, std::size_t steps) const {
  std::vector<std::vector<double>> out;
  out.reserve(steps);
  for (std::size_t s = 0; s < steps; ++s) {
    out.push_back(SyntheticStepDistribution(*entry.model, suite_.tokenizer.vocab_size(),
                                            suite_.unk_token, suite_.tokenizer.eos_token_id(),
                                            fractions, s));
  }
  return out;
}

std::vector<ScoreResponse> SyntheticBackend::ScoreBatch(
    std::span<const ScoreRequest> requests) {
  std::vector<ScoreResponse> out;
  out.reserve(requests.size());
  for (const ScoreRequest& req : requests) {
    try {
      ValidateScoreRequest(req);
    } catch (const ProtocolError& e) {
      throw BackendError(e.code(), e.what());
    }
    for (const auto* list : {&req.prefix_tokens, &req.continuation_tokens}) {
      for (TokenId t : *list) {
        if (!suite_.tokenizer.InVocab(t)) {
          throw BackendError("token_out_of_vocab",
                             "token id " + std::to_string(t) + " outside the vocabulary");
        }
      }
    }
    const Entry& entry = Lookup(req.feature_id);
    const RegionFractions fractions = Fractions(entry, req.mask);
    const std::size_t start = req.prefix_tokens.size();
    auto dist = [&](std::size_t step) {
      return SyntheticStepDistribution(*entry.model, suite_.tokenizer.vocab_size(),
                                       suite_.unk_token, suite_.tokenizer.eos_token_id(),
                                       fractions, step);
    };
    ScoreResponse resp;
    for (std::size_t i = 0; i < req.continuation_tokens.size(); ++i) {
      resp.token_probs.push_back(dist(start + i)[req.continuation_tokens[i]]);
    }
    for (std::size_t j : req.want_bow_mass_at) {
      const std::vector<double> d = dist(start + j);
      double mass = 0.0;
      for (std::size_t v = 0; v < d.size(); ++v) {
        if (suite_.tokenizer.IsBoundary(static_cast<TokenId>(v))) mass += d[v];
      }
      resp.bow_masses[j] = std::min(mass, 1.0);
    }
    out.push_back(std::move(resp));
  }
  return out;
}

GenerateResponse SyntheticBackend::Generate(const GenerateRequest& request) {
  try {
    ValidateGenerateRequest(request);
  } catch (const ProtocolError& e) {
    throw BackendError(e.code(), e.what());
  }
  const Entry& entry = Lookup(request.feature_id);
  const RegionFractions fractions = Fractions(entry, request.mask);
  GenerateResponse out;
  out.tokens = BeamSearch(Distributions(entry, fractions, entry.model->template_tokens.size() + 1),
                          suite_.tokenizer.eos_token_id(), request.beam_size,
                          request.no_repeat_ngram, request.max_len);
  out.text = suite_.tokenizer.Detokenize(out.tokens);
  return out;
}

std::vector<TokenId> SyntheticBackend::Tokenize(std::string_view text) {
  std::unordered_map<std::string, TokenId> by_surface;
  const auto& surfaces = suite_.tokenizer.token_surfaces();
  for (std::size_t i = 0; i < surfaces.size(); ++i) {
    by_surface.emplace(surfaces[i], static_cast<TokenId>(i));
  }
  auto punctuation = [&](char c) -> std::optional<TokenId> {
    auto it = by_surface.find(std::string(1, c));
    if (it != by_surface.end() && suite_.tokenizer.IsPunctuation(it->second)) return it->second;
    return std::nullopt;
  };
  // Greedy longest match: a marked first piece, then unmarked pieces.
  auto word_pieces = [&](const std::string& word) -> std::vector<TokenId> {
    std::vector<TokenId> pieces;
    std::size_t pos = 0;
    while (pos < word.size()) {
      bool matched = false;
      for (std::size_t len = word.size() - pos; len > 0; --len) {
        std::string piece = word.substr(pos, len);
        if (pos == 0) piece = std::string(kWordMarker) + piece;
        auto it = by_surface.find(piece);
        if (it != by_surface.end()) {
          pieces.push_back(it->second);
          pos += len;
          matched = true;
          break;
        }
      }
      if (!matched) return {suite_.unk_token};
    }
    return pieces;
  };

  std::vector<TokenId> tokens;
  std::size_t pos = 0;
  while (pos < text.size()) {
    while (pos < text.size() && std::isspace(static_cast<unsigned char>(text[pos]))) ++pos;
    std::size_t end = pos;
    while (end < text.size() && !std::isspace(static_cast<unsigned char>(text[end]))) ++end;
    if (end == pos) break;
    std::string chunk(text.substr(pos, end - pos));
    pos = end;
    std::vector<TokenId> lead, trail;
    while (!chunk.empty() && punctuation(chunk.front())) {
      lead.push_back(*punctuation(chunk.front()));
      chunk.erase(0, 1);
    }
    while (!chunk.empty() && punctuation(chunk.back())) {
      trail.insert(trail.begin(), *punctuation(chunk.back()));
      chunk.pop_back();
    }
    tokens.insert(tokens.end(), lead.begin(), lead.end());
    if (!chunk.empty()) {
      std::vector<TokenId> pieces = word_pieces(chunk);
      tokens.insert(tokens.end(), pieces.begin(), pieces.end());
    }
    tokens.insert(tokens.end(), trail.begin(), trail.end());
  }
  return tokens;
}

}  // namespace cxplain
