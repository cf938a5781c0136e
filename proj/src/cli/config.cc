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

#include "cxplain/cli/config.h"

#include <algorithm>
#include <atomic>
#include <charconv>
#include <mutex>
#include <thread>

#include "cxplain/backend/process.h"
#include "cxplain/backend/synthetic.h"
#include "cxplain/core/digest.h"
#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"

namespace cxplain {
namespace {

using json = nlohmann::json;

std::size_t AsCount(const json& v, std::string_view key) {
  if (!v.is_number_unsigned()) {
    throw ArgumentError("config key '" + std::string(key) + "' must be a non-negative integer");
  }
  return v.get<std::size_t>();
}

double AsReal(const json& v, std::string_view key) {
  if (!v.is_number()) throw ArgumentError("config key '" + std::string(key) + "' must be a number");
  return v.get<double>();
}

std::string AsString(const json& v, std::string_view key) {
  if (!v.is_string()) throw ArgumentError("config key '" + std::string(key) + "' must be a string");
  return v.get<std::string>();
}

std::vector<std::size_t> AsCountList(const json& v, std::string_view key) {
  if (!v.is_array()) throw ArgumentError("config key '" + std::string(key) + "' must be a list");
  std::vector<std::size_t> out;
  for (const json& e : v) out.push_back(AsCount(e, key));
  return out;
}

}  // namespace

const std::vector<ConfigKey>& ConfigKeys() {
  using K = ConfigValueKind;
  static const std::vector<ConfigKey> keys = {
      {"manifest", K::kString, "benchmark manifest (TSV)"},
      {"backend", K::kString, "backend command, or synthetic:<suite.json>"},
      {"output_dir", K::kString, "directory for outputs"},
      {"workers", K::kCount, "backend connections working in parallel"},
      {"scorer", K::kString, "base | difference | relative"},
      {"aggregation", K::kString, "chain_rule | length_norm | word_boundary"},
      {"level_targets", K::kCountList, "segments per level, comma separated"},
      {"frame_threshold", K::kCount, "frames at which segment counts stop scaling"},
      {"compactness", K::kReal, "SLIC compactness"},
      {"max_iterations", K::kCount, "SLIC iterations"},
      {"smoothing_sigma", K::kReal, "Gaussian pre-smoothing sigma (0 = off)"},
      {"n_masks", K::kCount, "perturbation masks over all levels"},
      {"mask_probability", K::kReal, "probability that a segment is masked"},
      {"seed", K::kCount, "mask RNG seed"},
      {"epsilon", K::kReal, "relative scorer denominator guard"},
      {"beam_size", K::kCount, "decoding beam"},
      {"no_repeat_ngram", K::kCount, "decoding n-gram blocking (0 = off)"},
      {"max_len", K::kCount, "decoding length limit"},
      {"masks_per_batch", K::kCount, "masks per score message"},
      {"step_fraction", K::kReal, "deletion step"},
      {"max_fraction", K::kReal, "last deletion fraction"},
      {"fill_value", K::kReal, "value written into deleted cells"},
  };
  return keys;
}

void RunConfig::Validate() const {
  explain.Validate();
  deletion.Validate();
  if (workers == 0) throw ArgumentError("workers must be >= 1");
}

nlohmann::ordered_json RunConfig::ToJson() const {
  nlohmann::ordered_json j;
  j["manifest"] = manifest.string();
  j["backend"] = backend;
  j["output_dir"] = output_dir.string();
  j["workers"] = workers;
  j["scorer"] = ScorerName(explain.scorer);
  j["aggregation"] = AggregationMethodName(explain.method);
  j["level_targets"] = explain.segmentation.level_targets;
  j["frame_threshold"] = explain.segmentation.frame_threshold;
  j["compactness"] = explain.segmentation.compactness;
  j["max_iterations"] = explain.segmentation.max_iterations;
  j["smoothing_sigma"] = explain.segmentation.smoothing_sigma;
  j["n_masks"] = explain.n_masks;
  j["mask_probability"] = explain.mask_probability;
  j["seed"] = explain.seed;
  j["epsilon"] = explain.epsilon;
  j["beam_size"] = explain.beam_size;
  j["no_repeat_ngram"] = explain.no_repeat_ngram;
  j["max_len"] = explain.max_len;
  j["masks_per_batch"] = explain.masks_per_batch;
  j["step_fraction"] = deletion.step_fraction;
  j["max_fraction"] = deletion.max_fraction;
  j["fill_value"] = deletion.fill_value;
  return j;
}

std::string RunConfig::Digest() const {
  nlohmann::ordered_json j = ToJson();
  for (const char* k : {"manifest", "backend", "output_dir", "workers", "masks_per_batch"}) {
    j.erase(k);
  }
  return Sha256Hex(j.dump()).substr(0, 16);
}

std::string RunConfig::CsvPreamble() const {
  return "# seed=" + std::to_string(explain.seed) + " config_digest=" + Digest() + "\n";
}

RunConfig ApplyConfigJson(const json& doc, RunConfig c) {
  if (!doc.is_object()) throw ArgumentError("config must be a JSON object");
  for (const auto& [key, v] : doc.items()) {
    if (key == "manifest") c.manifest = AsString(v, key);
    else if (key == "backend") c.backend = AsString(v, key);
    else if (key == "output_dir") c.output_dir = AsString(v, key);
    else if (key == "workers") c.workers = AsCount(v, key);
    else if (key == "scorer") c.explain.scorer = ParseScorerKind(AsString(v, key));
    else if (key == "aggregation") c.explain.method = ParseAggregationMethod(AsString(v, key));
    else if (key == "level_targets") c.explain.segmentation.level_targets = AsCountList(v, key);
    else if (key == "frame_threshold") c.explain.segmentation.frame_threshold = AsCount(v, key);
    else if (key == "compactness") c.explain.segmentation.compactness = AsReal(v, key);
    else if (key == "max_iterations") c.explain.segmentation.max_iterations = AsCount(v, key);
    else if (key == "smoothing_sigma") c.explain.segmentation.smoothing_sigma = AsReal(v, key);
    else if (key == "n_masks") c.explain.n_masks = AsCount(v, key);
    else if (key == "mask_probability") c.explain.mask_probability = AsReal(v, key);
    else if (key == "seed") c.explain.seed = AsCount(v, key);
    else if (key == "epsilon") c.explain.epsilon = AsReal(v, key);
    else if (key == "beam_size") c.explain.beam_size = c.deletion.beam_size = AsCount(v, key);
    else if (key == "no_repeat_ngram") {
      c.explain.no_repeat_ngram = c.deletion.no_repeat_ngram = AsCount(v, key);
    } else if (key == "max_len") c.explain.max_len = c.deletion.max_len = AsCount(v, key);
    else if (key == "masks_per_batch") c.explain.masks_per_batch = AsCount(v, key);
    else if (key == "step_fraction") c.deletion.step_fraction = AsReal(v, key);
    else if (key == "max_fraction") c.deletion.max_fraction = AsReal(v, key);
    else if (key == "fill_value") c.deletion.fill_value = static_cast<float>(AsReal(v, key));
    else throw ArgumentError("unknown config key '" + key + "'");
  }
  return c;
}

json ConfigValueFromText(const ConfigKey& key, std::string_view text) {
  auto count = [&](std::string_view s) {
    std::size_t v = 0;
    const auto r = std::from_chars(s.data(), s.data() + s.size(), v);
    if (r.ec != std::errc() || r.ptr != s.data() + s.size() || s.empty()) {
      throw ArgumentError("--" + std::string(key.name) + ": '" + std::string(s) +
                          "' is not a non-negative integer");
    }
    return v;
  };
  switch (key.kind) {
    case ConfigValueKind::kString:
      return std::string(text);
    case ConfigValueKind::kCount:
      return count(text);
    case ConfigValueKind::kReal: {
      double v = 0.0;
      const auto r = std::from_chars(text.data(), text.data() + text.size(), v);
      if (r.ec != std::errc() || r.ptr != text.data() + text.size() || text.empty()) {
        throw ArgumentError("--" + std::string(key.name) + ": '" + std::string(text) +
                            "' is not a number");
      }
      return v;
    }
    case ConfigValueKind::kCountList: {
      json list = json::array();
      std::size_t begin = 0;
      while (begin <= text.size()) {
        const std::size_t end = std::min(text.find(',', begin), text.size());
        list.push_back(count(text.substr(begin, end - begin)));
        begin = end + 1;
      }
      return list;
    }
  }
  return json();
}

BackendFactory MakeBackendFactory(const std::string& spec) {
  if (spec.empty()) {
    throw ArgumentError("no backend configured (set --backend or " + std::string(kBackendEnvVar) +
                        ")");
  }
  if (spec.starts_with(kSyntheticPrefix)) {
    auto suite = std::make_shared<const SyntheticSuite>(
        SyntheticSuite::FromJson(ReadFileBytes(spec.substr(kSyntheticPrefix.size()))));
    return [suite]() -> std::unique_ptr<Backend> {
      return std::make_unique<SyntheticBackend>(*suite);
    };
  }
  return [spec]() -> std::unique_ptr<Backend> { return std::make_unique<ProcessBackend>(spec); };
}

void ForEachWithBackends(std::size_t n, std::size_t workers, const BackendFactory& factory,
                         const std::function<void(std::size_t, Backend&)>& fn) {
  workers = std::max<std::size_t>(1, std::min(workers, n));
  std::atomic<std::size_t> next{0};
  std::mutex error_mutex;
  std::exception_ptr error;
  auto work = [&]() {
    try {
      std::unique_ptr<Backend> backend = factory();
      backend->Handshake();
      for (std::size_t i = next++; i < n; i = next++) fn(i, *backend);
      backend->Shutdown();
    } catch (...) {
      std::lock_guard<std::mutex> lock(error_mutex);
      if (!error) error = std::current_exception();
      next = n;
    }
  };
  if (workers == 1) {
    work();
  } else {
    std::vector<std::thread> threads;
    for (std::size_t w = 0; w < workers; ++w) threads.emplace_back(work);
    for (std::thread& t : threads) t.join();
  }
  if (error) std::rethrow_exception(error);
}

}  // namespace cxplain
