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

#include "cxplain/evaluation/deletion.h"

#include <algorithm>
#include <cctype>
#include <charconv>
#include <cmath>
#include <limits>
#include <numeric>
#include <utility>

#include "cxplain/backend/process.h"
#include "cxplain/core/digest.h"
#include "cxplain/core/errors.h"
#include "json.hpp"

namespace cxplain {
namespace {

bool IsDelimiter(unsigned char c) {
  return c <= 0x20 || (c < 0x80 && std::ispunct(c));
}

std::string FormatDouble(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string_view StatusName(CaseStatus s) {
  switch (s) {
    case CaseStatus::kEvaluated: return "evaluated";
    case CaseStatus::kOutOfCoverage: return "out_of_coverage";
    case CaseStatus::kFailed: return "failed";
    case CaseStatus::kSkipped: return "skipped";
  }
  return "failed";
}

}  // namespace

void DeletionConfig::Validate() const {
  if (!(step_fraction > 0.0 && step_fraction <= max_fraction && max_fraction <= 1.0)) {
    throw ArgumentError("deletion fractions need 0 < step <= max <= 1");
  }
  if (!std::isfinite(fill_value)) throw ArgumentError("fill value must be finite");
  if (beam_size == 0 || max_len == 0) throw ArgumentError("beam_size and max_len must be positive");
}

std::vector<double> DeletionConfig::Fractions() const {
  Validate();
  std::vector<double> out;
  for (std::size_t k = 0;; ++k) {
    const double f = static_cast<double>(k) * step_fraction;
    if (f > max_fraction + 1e-9) break;
    out.push_back(f);
  }
  return out;
}

std::vector<std::size_t> DeletionOrder(const SaliencyMap& map) {
  std::vector<std::size_t> order(map.scores.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
    return map.scores[a] > map.scores[b];
  });
  return order;
}

std::size_t DeletedCount(std::size_t n_cells, double fraction) {
  const double x = fraction * static_cast<double>(n_cells);
  return std::min(n_cells, static_cast<std::size_t>(std::ceil(x - 1e-9)));
}

Spectrogram DeleteFraction(const Spectrogram& spec, std::span<const std::size_t> order,
                           double fraction, float fill) {
  if (!(fraction >= 0.0 && fraction <= 1.0)) throw ArgumentError("fraction must lie in [0, 1]");
  if (order.size() != spec.num_cells()) {
    throw ArgumentError("deletion order length differs from the spectrogram size");
  }
  std::vector<float> data(spec.data().begin(), spec.data().end());
  const std::size_t k = DeletedCount(spec.num_cells(), fraction);
  for (std::size_t i = 0; i < k; ++i) {
    if (order[i] >= data.size()) throw ArgumentError("deletion order index out of range");
    data[order[i]] = fill;
  }
  return Spectrogram(spec.n_frames(), spec.n_bins(), std::move(data));
}

std::string_view OutcomeName(OutcomeKind kind) {
  switch (kind) {
    case OutcomeKind::kTarget: return "target";
    case OutcomeKind::kFoil: return "foil";
    case OutcomeKind::kNeither: return "neither";
  }
  return "neither";
}

OutcomeKind DetectOutcome(std::string_view hypothesis, std::string_view target,
                          std::string_view foil) {
  std::size_t i = 0;
  while (i < hypothesis.size()) {
    while (i < hypothesis.size() && IsDelimiter(static_cast<unsigned char>(hypothesis[i]))) ++i;
    std::size_t j = i;
    while (j < hypothesis.size() && !IsDelimiter(static_cast<unsigned char>(hypothesis[j]))) ++j;
    if (j > i) {
      const std::string_view word = hypothesis.substr(i, j - i);
      if (word == target) return OutcomeKind::kTarget;
      if (word == foil) return OutcomeKind::kFoil;
    }
    i = j;
  }
  return OutcomeKind::kNeither;
}

EvalCurves SummarizeTrajectories(std::vector<double> fractions,
                                 std::vector<CaseTrajectory> trajectories,
                                 const std::function<bool(const CaseTrajectory&)>& keep) {
  EvalCurves c;
  const std::size_t n = fractions.size();
  c.fractions = std::move(fractions);
  c.coverage.assign(n, 0.0);
  c.flip_rate.assign(n, std::numeric_limits<double>::quiet_NaN());
  c.n_covered.assign(n, 0);
  c.n_flipped.assign(n, 0);
  c.n_flip_base.assign(n, 0);
  for (const CaseTrajectory& t : trajectories) {
    if (t.status != CaseStatus::kEvaluated || (keep && !keep(t))) continue;
    if (t.outcomes.size() != n) throw ArgumentError("trajectory length differs from fractions");
    ++c.n_cases;
    const bool started_target = t.outcomes[0] == OutcomeKind::kTarget;
    for (std::size_t k = 0; k < n; ++k) {
      const OutcomeKind o = t.outcomes[k];
      if (o == OutcomeKind::kNeither) continue;
      ++c.n_covered[k];
      if (!started_target) continue;
      ++c.n_flip_base[k];
      if (o == OutcomeKind::kFoil) ++c.n_flipped[k];
    }
  }
  for (std::size_t k = 0; k < n; ++k) {
    if (c.n_cases > 0) {
      c.coverage[k] = static_cast<double>(c.n_covered[k]) / static_cast<double>(c.n_cases);
    }
    if (c.n_flip_base[k] > 0) {
      c.flip_rate[k] = static_cast<double>(c.n_flipped[k]) / static_cast<double>(c.n_flip_base[k]);
    }
  }
  c.cases = std::move(trajectories);
  return c;
}

EvalCurves RunDeletionEval(std::span<const EvalCase> cases, Backend& backend,
                           const DeletionConfig& config) {
  const std::vector<double> fractions = config.Fractions();
  auto* pipelined = dynamic_cast<ProcessBackend*>(&backend);
  std::vector<CaseTrajectory> trajectories;
  trajectories.reserve(cases.size());

  for (const EvalCase& ec : cases) {
    CaseTrajectory t;
    t.case_id = ec.contrast.case_id;
    t.gender = ec.contrast.gender_of_target;
    try {
      if (ec.map.n_frames != ec.features.n_frames() || ec.map.n_bins != ec.features.n_bins() ||
          ec.map.scores.size() != ec.features.num_cells()) {
        throw ArgumentError("saliency map shape differs from the features of " + t.case_id);
      }
      const std::vector<std::size_t> order = DeletionOrder(ec.map);
      backend.LoadFeatures(t.case_id, ec.features);
      // Different maps of one case must not collide on the backend.
      const std::string tag = Sha256Hex(std::string_view(
          reinterpret_cast<const char*>(order.data()), order.size() * sizeof(order[0]))).substr(0, 12);
      std::vector<GenerateRequest> requests;
      for (double f : fractions) {
        const std::size_t k = DeletedCount(ec.features.num_cells(), f);
        GenerateRequest g;
        g.feature_id = k == 0 ? t.case_id : t.case_id + "#del" + std::to_string(k) + "-" + tag;
        g.beam_size = config.beam_size;
        g.no_repeat_ngram = config.no_repeat_ngram;
        g.max_len = config.max_len;
        if (k > 0) {
          backend.LoadFeatures(g.feature_id,
                               DeleteFraction(ec.features, order, f, config.fill_value));
        }
        requests.push_back(std::move(g));
      }
      // Step 0 alone first so out-of-coverage cases cost one decode.
      const GenerateResponse first = backend.Generate(requests.front());
      t.hypotheses.push_back(first.text);
      t.outcomes.push_back(
          DetectOutcome(first.text, ec.contrast.target_word, ec.contrast.foil_word));
      if (t.outcomes.front() == OutcomeKind::kNeither) {
        t.status = CaseStatus::kOutOfCoverage;
      } else {
        std::vector<GenerateResponse> rest;
        const std::span<const GenerateRequest> tail(requests.data() + 1, requests.size() - 1);
        if (pipelined) {
          rest = pipelined->GenerateMany(tail);
        } else {
          for (const GenerateRequest& g : tail) rest.push_back(backend.Generate(g));
        }
        for (const GenerateResponse& r : rest) {
          t.hypotheses.push_back(r.text);
          t.outcomes.push_back(
              DetectOutcome(r.text, ec.contrast.target_word, ec.contrast.foil_word));
        }
      }
    } catch (const BackendError& e) {
      t.status = CaseStatus::kFailed;
      t.error = std::string(e.code()) + ": " + e.what();
      t.outcomes.clear();
      t.hypotheses.clear();
    }
    trajectories.push_back(std::move(t));
  }
  return SummarizeTrajectories(fractions, std::move(trajectories));
}

std::string CurvesCsv(const EvalCurves& c) {
  std::string out = "fraction,coverage,flip_rate,n_covered,n_flipped\n";
  for (std::size_t k = 0; k < c.fractions.size(); ++k) {
    out += FormatDouble(c.fractions[k]) + ',' + FormatDouble(c.coverage[k]) + ',' +
           FormatDouble(c.flip_rate[k]) + ',' + std::to_string(c.n_covered[k]) + ',' +
           std::to_string(c.n_flipped[k]) + '\n';
  }
  return out;
}

std::string CurvesReportJson(const EvalCurves& c) {
  nlohmann::ordered_json j;
  j["fractions"] = c.fractions;
  j["n_cases"] = c.n_cases;
  j["n_flip_base"] = c.n_flip_base;
  nlohmann::ordered_json cases = nlohmann::ordered_json::array();
  for (const CaseTrajectory& t : c.cases) {
    nlohmann::ordered_json e;
    e["case_id"] = t.case_id;
    e["gender"] = std::string(GenderName(t.gender));
    e["status"] = std::string(StatusName(t.status));
    std::vector<std::string> outcomes;
    for (OutcomeKind o : t.outcomes) outcomes.emplace_back(OutcomeName(o));
    e["outcomes"] = outcomes;
    e["hypotheses"] = t.hypotheses;
    if (!t.error.empty()) e["error"] = t.error;
    cases.push_back(std::move(e));
  }
  j["cases"] = std::move(cases);
  return j.dump(2) + "\n";
}

EvalCurves ParseCurvesCsv(std::string_view text) {
  EvalCurves c;
  bool header = true;
  std::size_t line_no = 0;
  while (!text.empty()) {
    const std::size_t nl = text.find('\n');
    std::string_view line = text.substr(0, nl);
    text = nl == std::string_view::npos ? std::string_view() : text.substr(nl + 1);
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.remove_suffix(1);
    if (line.empty() || line.front() == '#') continue;
    std::vector<std::string_view> fields;
    for (std::size_t b = 0;;) {
      const std::size_t e = line.find(',', b);
      fields.push_back(line.substr(b, e == std::string_view::npos ? line.size() - b : e - b));
      if (e == std::string_view::npos) break;
      b = e + 1;
    }
    auto fail = [&](const std::string& why) {
      throw ParseError(ParseError::Kind::kMalformed,
                       "curves line " + std::to_string(line_no) + ": " + why);
    };
    if (header) {
      if (fields.size() < 3 || fields[0] != "fraction" || fields[1] != "coverage" ||
          fields[2] != "flip_rate") {
        fail("expected a fraction,coverage,flip_rate header");
      }
      header = false;
      continue;
    }
    if (fields.size() < 3) fail("too few fields");
    double v[3];
    for (int k = 0; k < 3; ++k) {
      if (fields[k] == "nan") {
        v[k] = std::numeric_limits<double>::quiet_NaN();
        continue;
      }
      const auto r = std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), v[k]);
      if (r.ec != std::errc() || r.ptr != fields[k].data() + fields[k].size()) {
        fail("bad number '" + std::string(fields[k]) + "'");
      }
    }
    c.fractions.push_back(v[0]);
    c.coverage.push_back(v[1]);
    c.flip_rate.push_back(v[2]);
    std::size_t counts[2] = {0, 0};
    for (std::size_t k = 3; k < 5 && k < fields.size(); ++k) {
      std::from_chars(fields[k].data(), fields[k].data() + fields[k].size(), counts[k - 3]);
    }
    c.n_covered.push_back(counts[0]);
    c.n_flipped.push_back(counts[1]);
  }
  if (header) throw ParseError(ParseError::Kind::kMalformed, "curves CSV has no header");
  return c;
}

}  // namespace cxplain
