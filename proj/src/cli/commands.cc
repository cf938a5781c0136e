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

#include "cxplain/cli/commands.h"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdlib>
#include <limits>
#include <optional>

#include "CLI11.hpp"
#include "cxplain/attribution/saliency.h"
#include "cxplain/backend/planted.h"
#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"
#include "cxplain/core/manifest.h"
#include "cxplain/core/numeric.h"

namespace cxplain {
namespace {

namespace fs = std::filesystem;
using json = nlohmann::json;

constexpr AggregationMethod kMethods[] = {AggregationMethod::kWordBoundary,
                                          AggregationMethod::kLengthNorm,
                                          AggregationMethod::kChainRule};
constexpr ScorerKind kScorers[] = {ScorerKind::kBase, ScorerKind::kContrastiveDifference,
                                   ScorerKind::kContrastiveRelative};

std::string Num(double x) {
  if (std::isnan(x)) return "nan";
  char buf[32];
  const auto r = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, r.ptr);
}

void WriteText(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  WriteFileBytes(path, text);
}

// ---- config resolution ----------------------------------------------------

struct ConfigFlags {
  std::string config_path;
  std::map<std::string, std::string> values;  // flags given on the command line
};

void AddConfigOptions(CLI::App* cmd, ConfigFlags* flags) {
  cmd->add_option("--config", flags->config_path, "JSON config; flags override its keys");
  for (const ConfigKey& key : ConfigKeys()) {
    const std::string name(key.name);
    cmd->add_option_function<std::string>(
        "--" + name, [flags, name](const std::string& v) { flags->values[name] = v; },
        std::string(key.help));
  }
}

RunConfig ResolveConfig(const ConfigFlags& flags, RunConfig base) {
  if (const char* env = std::getenv(std::string(kBackendEnvVar).c_str())) base.backend = env;
  if (!flags.config_path.empty()) {
    std::string text;
    try {
      text = ReadFileBytes(flags.config_path);
    } catch (const IoError& e) {
      throw ArgumentError(std::string("cannot read config: ") + e.what());
    }
    json doc;
    try {
      doc = json::parse(text);
    } catch (const json::exception& e) {
      throw ArgumentError("config " + flags.config_path + " is not valid JSON: " + e.what());
    }
    base = ApplyConfigJson(doc, base);
  }
  json overrides = json::object();
  for (const ConfigKey& key : ConfigKeys()) {
    const auto it = flags.values.find(std::string(key.name));
    if (it != flags.values.end()) overrides[it->first] = ConfigValueFromText(key, it->second);
  }
  RunConfig c = ApplyConfigJson(overrides, base);
  c.Validate();
  return c;
}

std::vector<ContrastCase> LoadCases(const RunConfig& c) {
  if (c.manifest.empty()) throw ArgumentError("no manifest configured (--manifest)");
  std::vector<ContrastCase> cases = LoadManifestStrict(c.manifest);
  if (cases.empty()) throw ArgumentError("no cases in manifest " + c.manifest.string());
  return cases;
}

// ---- explain --------------------------------------------------------------

enum class CaseState { kOk, kSkipped, kFailed };

struct ExplainedCase {
  CaseState state = CaseState::kOk;
  std::string detail;
  std::vector<SaliencyMap> maps;         // one per requested scorer
  std::vector<std::string> provenance;  // aligned with maps
};

std::vector<ExplainedCase> ExplainCases(const std::vector<ContrastCase>& cases,
                                        const RunConfig& c, const BackendFactory& factory,
                                        const std::vector<ScorerKind>& scorers) {
  std::vector<ExplainedCase> out(cases.size());
  const std::string digest = c.Digest();
  ForEachWithBackends(cases.size(), c.workers, factory, [&](std::size_t i, Backend& backend) {
    const ContrastCase& cc = cases[i];
    ExplainedCase& r = out[i];
    try {
      const Spectrogram features =
          LoadFeatures(cc.features_path, FormatForPath(cc.features_path));
      const Explanation ex = ComputeExplanation(cc, features, backend, c.explain);
      for (ScorerKind s : scorers) {
        r.maps.push_back(ExplanationMap(ex, s, c.explain.epsilon));
        r.provenance.push_back(ProvenanceJson(ex, c.explain, s, digest));
      }
    } catch (const CoverageError& e) {
      r.state = CaseState::kSkipped;
      r.detail = std::string("out_of_coverage\t") + e.what();
    } catch (const SpanError& e) {
      r.state = CaseState::kSkipped;
      r.detail = std::string("span_error\t") + e.what();
    } catch (const BackendError& e) {
      r.state = CaseState::kFailed;
      r.detail = "backend_error\t" + e.code() + ": " + e.what();
    } catch (const IoError& e) {
      r.state = CaseState::kFailed;
      r.detail = std::string("feature_error\t") + e.what();
    } catch (const ParseError& e) {
      r.state = CaseState::kFailed;
      r.detail = std::string("feature_error\t") + e.what();
    }
  });
  return out;
}

// Maps, provenance sidecars and skipped.tsv for scorer `k` into `dir`.
void WriteExplainOutputs(const fs::path& dir, const std::vector<ContrastCase>& cases,
                         const std::vector<ExplainedCase>& results, std::size_t k,
                         const RunConfig& c) {
  fs::create_directories(dir);
  std::string skipped = c.CsvPreamble() + "case_id\tstatus\tdetail\n";
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const ExplainedCase& r = results[i];
    if (r.state == CaseState::kOk) {
      SaveSaliency(r.maps[k], dir / (cases[i].case_id + ".fbnk"));
      WriteText(dir / (cases[i].case_id + ".provenance.json"), r.provenance[k]);
    } else {
      std::string detail = r.detail;
      std::replace(detail.begin(), detail.end(), '\n', ' ');
      skipped += cases[i].case_id + '\t' + detail + '\n';
    }
  }
  WriteText(dir / "skipped.tsv", skipped);
}

struct Tally {
  std::size_t ok = 0, skipped = 0, failed = 0;
};

Tally Count(const std::vector<ExplainedCase>& results) {
  Tally t;
  for (const ExplainedCase& r : results) {
    (r.state == CaseState::kOk ? t.ok : r.state == CaseState::kSkipped ? t.skipped : t.failed)++;
  }
  return t;
}

// ---- evaluate -------------------------------------------------------------

EvalCurves EvaluateMaps(const std::vector<ContrastCase>& cases,
                        const std::vector<std::optional<SaliencyMap>>& maps,
                        const std::vector<std::string>& missing_reason, const RunConfig& c,
                        const BackendFactory& factory) {
  const std::vector<double> fractions = c.deletion.Fractions();
  std::vector<CaseTrajectory> trajectories(cases.size());
  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (maps[i]) {
      todo.push_back(i);
    } else {
      trajectories[i].case_id = cases[i].case_id;
      trajectories[i].gender = cases[i].gender_of_target;
      trajectories[i].status = CaseStatus::kSkipped;
      trajectories[i].error = missing_reason[i];
    }
  }
  ForEachWithBackends(todo.size(), c.workers, factory, [&](std::size_t j, Backend& backend) {
    const std::size_t i = todo[j];
    CaseTrajectory t;
    try {
      const Spectrogram features =
          LoadFeatures(cases[i].features_path, FormatForPath(cases[i].features_path));
      const EvalCase ec{cases[i], features, *maps[i]};
      t = std::move(RunDeletionEval(std::span(&ec, 1), backend, c.deletion).cases.front());
    } catch (const IoError& e) {
      t.status = CaseStatus::kFailed;
      t.error = e.what();
    } catch (const ParseError& e) {
      t.status = CaseStatus::kFailed;
      t.error = e.what();
    } catch (const ArgumentError& e) {
      t.status = CaseStatus::kFailed;
      t.error = e.what();
    }
    t.case_id = cases[i].case_id;
    t.gender = cases[i].gender_of_target;
    trajectories[i] = std::move(t);
  });
  return SummarizeTrajectories(fractions, std::move(trajectories));
}

std::size_t FailedCount(const EvalCurves& curves) {
  return static_cast<std::size_t>(
      std::count_if(curves.cases.begin(), curves.cases.end(),
                    [](const CaseTrajectory& t) { return t.status == CaseStatus::kFailed; }));
}

std::string ReportWithProvenance(const EvalCurves& curves, const RunConfig& c) {
  nlohmann::ordered_json j;
  j["seed"] = c.explain.seed;
  j["config_digest"] = c.Digest();
  const nlohmann::ordered_json body = nlohmann::ordered_json::parse(CurvesReportJson(curves));
  for (const auto& [k, v] : body.items()) j[k] = v;
  return j.dump(2) + "\n";
}

void WriteCurves(const fs::path& dir, const std::string& stem, const EvalCurves& curves,
                 const RunConfig& c, bool by_gender) {
  WriteText(dir / (stem + ".csv"), c.CsvPreamble() + CurvesCsv(curves));
  if (by_gender) {
    for (Gender g : {Gender::kFemale, Gender::kMale}) {
      const EvalCurves sub = SummarizeTrajectories(
          curves.fractions, curves.cases, [g](const CaseTrajectory& t) { return t.gender == g; });
      WriteText(dir / (stem + "_" + std::string(GenderName(g)) + ".csv"),
                c.CsvPreamble() + CurvesCsv(sub));
    }
  }
}

// Explains in memory with c.explain.scorer and returns maps per case.
std::vector<std::optional<SaliencyMap>> InlineMaps(const std::vector<ContrastCase>& cases,
                                                   const RunConfig& c,
                                                   const BackendFactory& factory,
                                                   std::vector<std::string>* reasons,
                                                   Tally* tally) {
  const std::vector<ExplainedCase> results = ExplainCases(cases, c, factory, {c.explain.scorer});
  *tally = Count(results);
  std::vector<std::optional<SaliencyMap>> maps(cases.size());
  reasons->assign(cases.size(), "");
  for (std::size_t i = 0; i < cases.size(); ++i) {
    if (results[i].state == CaseState::kOk) {
      maps[i] = results[i].maps.front();
    } else {
      (*reasons)[i] = results[i].detail;
    }
  }
  return maps;
}

// ---- commands ---------------------------------------------------------------

int CmdExplain(const RunConfig& c, std::ostream& out) {
  const std::vector<ContrastCase> cases = LoadCases(c);
  const BackendFactory factory = MakeBackendFactory(c.backend);
  const std::vector<ExplainedCase> results = ExplainCases(cases, c, factory, {c.explain.scorer});
  WriteExplainOutputs(c.output_dir, cases, results, 0, c);
  const Tally t = Count(results);
  out << "explained " << t.ok << ", skipped " << t.skipped << ", failed " << t.failed << " -> "
      << c.output_dir.string() << "\n";
  return t.failed > 0 ? kExitPartial : kExitOk;
}

int CmdEvaluate(const RunConfig& c, const std::string& maps_dir, std::ostream& out) {
  const std::vector<ContrastCase> cases = LoadCases(c);
  const BackendFactory factory = MakeBackendFactory(c.backend);
  std::vector<std::optional<SaliencyMap>> maps(cases.size());
  std::vector<std::string> reasons(cases.size());
  Tally explain_tally;
  if (maps_dir.empty()) {
    maps = InlineMaps(cases, c, factory, &reasons, &explain_tally);
  } else {
    const auto files = ListMapFiles(maps_dir);
    for (std::size_t i = 0; i < cases.size(); ++i) {
      const auto it = files.find(cases[i].case_id);
      if (it == files.end()) {
        reasons[i] = "no map in " + maps_dir;
      } else {
        maps[i] = LoadSaliency(it->second);
      }
    }
  }
  const EvalCurves curves = EvaluateMaps(cases, maps, reasons, c, factory);
  WriteCurves(c.output_dir, "curves", curves, c, true);
  WriteText(c.output_dir / "report.json", ReportWithProvenance(curves, c));
  const std::size_t failed = FailedCount(curves) + explain_tally.failed;
  out << "evaluated " << curves.n_cases << " cases over " << curves.fractions.size()
      << " steps, failed " << failed << " -> " << c.output_dir.string() << "\n";
  return failed > 0 ? kExitPartial : kExitOk;
}

int CmdCorrelate(const RunConfig& c, const std::string& a, const std::string& b,
                 const std::string& output, std::ostream& out) {
  const std::string csv = c.CsvPreamble() + CorrelationCsv(CorrelateMapDirs(a, b));
  if (output.empty()) {
    out << csv;
  } else {
    WriteText(output, csv);
  }
  return kExitOk;
}

std::map<AggregationMethod, EvalCurves> CurvesPerMethod(const RunConfig& c,
                                                        const std::string& curves_dir,
                                                        std::size_t* failed) {
  std::map<AggregationMethod, EvalCurves> curves;
  if (!curves_dir.empty()) {
    for (AggregationMethod m : kMethods) {
      const fs::path p = fs::path(curves_dir) / (std::string(AggregationMethodName(m)) + ".csv");
      curves[m] = ParseCurvesCsv(ReadFileBytes(p));
    }
    return curves;
  }
  const std::vector<ContrastCase> cases = LoadCases(c);
  const BackendFactory factory = MakeBackendFactory(c.backend);
  for (AggregationMethod m : kMethods) {
    RunConfig cm = c;
    cm.explain.method = m;
    std::vector<std::string> reasons;
    Tally tally;
    const auto maps = InlineMaps(cases, cm, factory, &reasons, &tally);
    curves[m] = EvaluateMaps(cases, maps, reasons, cm, factory);
    *failed += tally.failed + FailedCount(curves[m]);
    WriteCurves(c.output_dir, std::string(AggregationMethodName(m)), curves[m], c, false);
  }
  return curves;
}

int CmdCompareAggregators(const RunConfig& c, const std::string& curves_dir, std::ostream& out) {
  std::size_t failed = 0;
  const auto curves = CurvesPerMethod(c, curves_dir, &failed);
  const std::string csv = c.CsvPreamble() + ComparisonCsv(CompareAggregators(curves));
  WriteText(c.output_dir / "aggregators.csv", csv);
  out << csv;
  return failed > 0 ? kExitPartial : kExitOk;
}

struct DemoOptions {
  std::size_t n_cases = 10;
  std::size_t out_of_coverage_cases = 0;
};

int CmdSynthDemo(RunConfig c, const DemoOptions& demo, std::ostream& out) {
  PlantedSuiteOptions po;
  po.n_cases = demo.n_cases;
  po.out_of_coverage_cases = demo.out_of_coverage_cases;
  po.seed = c.explain.seed;
  const PlantedSuite suite = BuildPlantedSuite(po);

  const fs::path data = c.output_dir / "data";
  fs::create_directories(data);
  const fs::path suite_path = data / "suite.json";
  WriteText(suite_path, suite.suite.ToJson());
  std::vector<ContrastCase> cases;
  for (const PlantedCase& pc : suite.cases) {
    ContrastCase cc = pc.contrast;
    cc.features_path = data / pc.contrast.features_path;
    SaveFeatures(pc.features, cc.features_path, FeatureFormat::kBinary);
    cases.push_back(cc);
  }
  c.manifest = data / "manifest.tsv";
  SaveManifest(cases, c.manifest);
  cases = LoadCases(c);

  // The demo never takes its backend from the environment.
  std::string spec = std::string(kSyntheticPrefix) + suite_path.string();
  if (!c.backend.empty()) {
    spec = c.backend;
    for (std::size_t at; (at = spec.find("{suite}")) != std::string::npos;) {
      spec.replace(at, 7, suite_path.string());
    }
  }
  const BackendFactory factory = MakeBackendFactory(spec);
  const std::vector<ScorerKind> scorers(std::begin(kScorers), std::end(kScorers));

  std::size_t failed = 0;
  std::map<AggregationMethod, EvalCurves> per_method;
  for (AggregationMethod m : kMethods) {
    RunConfig cm = c;
    cm.explain.method = m;
    const fs::path dir = c.output_dir / std::string(AggregationMethodName(m));
    const std::vector<ExplainedCase> results = ExplainCases(cases, cm, factory, scorers);
    failed += Count(results).failed;
    for (std::size_t k = 0; k < scorers.size(); ++k) {
      WriteExplainOutputs(dir / "maps" / std::string(ScorerName(scorers[k])), cases, results, k,
                          cm);
      std::vector<std::optional<SaliencyMap>> maps(cases.size());
      std::vector<std::string> reasons(cases.size());
      for (std::size_t i = 0; i < cases.size(); ++i) {
        if (results[i].state == CaseState::kOk) {
          maps[i] = results[i].maps[k];
        } else {
          reasons[i] = results[i].detail;
        }
      }
      const EvalCurves curves = EvaluateMaps(cases, maps, reasons, cm, factory);
      failed += FailedCount(curves);
      const std::string stem = "curves_" + std::string(ScorerName(scorers[k]));
      WriteCurves(dir, stem, curves, cm, true);
      WriteText(dir / ("report_" + std::string(ScorerName(scorers[k])) + ".json"),
                ReportWithProvenance(curves, cm));
      if (scorers[k] == c.explain.scorer) per_method[m] = curves;
    }
    out << AggregationMethodName(m) << ": explained " << Count(results).ok << " of "
        << cases.size() << "\n";
  }

  // Scorer correlations on the configured aggregation method.
  const fs::path maps_root =
      c.output_dir / std::string(AggregationMethodName(c.explain.method)) / "maps";
  std::string table = c.CsvPreamble() + "pair,mean_r,n_cases\n";
  for (std::size_t x = 0; x < scorers.size(); ++x) {
    for (std::size_t y = x + 1; y < scorers.size(); ++y) {
      const auto rows = CorrelateMapDirs(maps_root / std::string(ScorerName(scorers[x])),
                                         maps_root / std::string(ScorerName(scorers[y])));
      CompensatedSum sum;
      for (const CorrelationRow& r : rows) {
        if (!std::isnan(r.r)) sum.Add(r.r);
      }
      const std::string pair =
          std::string(ScorerName(scorers[x])) + "~" + std::string(ScorerName(scorers[y]));
      table += pair + "," + Num(sum.count() ? sum.Mean() : std::nan("")) + "," +
               std::to_string(sum.count()) + "\n";
      out << pair << " mean r = " << Num(sum.Mean()) << "\n";
    }
  }
  WriteText(c.output_dir / "correlations.csv", table);

  std::string comparison = c.CsvPreamble();
  try {
    comparison += ComparisonCsv(CompareAggregators(per_method));
  } catch (const DegenerateError& e) {
    comparison += std::string("# ") + e.what() + "\n";
  }
  WriteText(c.output_dir / "aggregators.csv", comparison);
  out << "synth-demo outputs in " << c.output_dir.string() << "\n";
  return failed > 0 ? kExitPartial : kExitOk;
}

}  // namespace

std::map<std::string, fs::path> ListMapFiles(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw ArgumentError("not a directory: " + dir.string());
  std::map<std::string, fs::path> out;
  for (const fs::directory_entry& e : fs::directory_iterator(dir)) {
    if (!e.is_regular_file()) continue;
    const std::string ext = e.path().extension().string();
    if (ext == ".fbnk" || ext == ".csv") out[e.path().stem().string()] = e.path();
  }
  return out;
}

std::vector<CorrelationRow> CorrelateMapDirs(const fs::path& a, const fs::path& b) {
  const auto fa = ListMapFiles(a);
  const auto fb = ListMapFiles(b);
  std::vector<std::string> only_a, only_b;
  for (const auto& [id, p] : fa) {
    if (!fb.count(id)) only_a.push_back(id);
  }
  for (const auto& [id, p] : fb) {
    if (!fa.count(id)) only_b.push_back(id);
  }
  if (!only_a.empty() || !only_b.empty()) {
    std::string msg = "case ids differ between " + a.string() + " and " + b.string() + ":";
    for (const auto& id : only_a) msg += " -" + id;
    for (const auto& id : only_b) msg += " +" + id;
    throw ArgumentError(msg);
  }
  if (fa.empty()) throw ArgumentError("no maps in " + a.string());
  std::vector<CorrelationRow> rows;
  for (const auto& [id, pa] : fa) {
    const SaliencyMap ma = LoadSaliency(pa);
    const SaliencyMap mb = LoadSaliency(fb.at(id));
    if (ma.n_frames != mb.n_frames || ma.n_bins != mb.n_bins) {
      throw ArgumentError("map shapes differ for " + id);
    }
    CorrelationRow row{id, std::numeric_limits<double>::quiet_NaN()};
    try {
      row.r = Pearson(ma.scores, mb.scores);
    } catch (const DegenerateError&) {
    }
    rows.push_back(row);
  }
  return rows;
}

std::string CorrelationCsv(const std::vector<CorrelationRow>& rows) {
  std::string out = "case_id,pearson_r\n";
  CompensatedSum sum;
  for (const CorrelationRow& r : rows) {
    out += r.case_id + "," + Num(r.r) + "\n";
    if (!std::isnan(r.r)) sum.Add(r.r);
  }
  out += "mean," + Num(sum.count() ? sum.Mean() : std::nan("")) + "\n";
  return out;
}

std::vector<ComparisonRow> CompareAggregators(
    const std::map<AggregationMethod, EvalCurves>& curves) {
  for (AggregationMethod m : kMethods) {
    if (!curves.count(m)) {
      throw ArgumentError("no curves for " + std::string(AggregationMethodName(m)));
    }
  }
  const std::vector<double>& fractions = curves.at(kMethods[0]).fractions;
  for (const auto& [m, c] : curves) {
    if (c.fractions.size() != fractions.size()) {
      throw ArgumentError("deletion steps differ between aggregation methods");
    }
    for (std::size_t k = 0; k < fractions.size(); ++k) {
      if (std::abs(c.fractions[k] - fractions[k]) > 1e-9) {
        throw ArgumentError("deletion steps differ between aggregation methods");
      }
    }
  }
  const std::pair<AggregationMethod, AggregationMethod> pairs[] = {
      {AggregationMethod::kWordBoundary, AggregationMethod::kLengthNorm},
      {AggregationMethod::kWordBoundary, AggregationMethod::kChainRule},
      {AggregationMethod::kLengthNorm, AggregationMethod::kChainRule}};
  std::vector<ComparisonRow> rows;
  for (const char* metric : {"coverage", "flip_rate"}) {
    const bool coverage = std::string_view(metric) == "coverage";
    for (const auto& [ma, mb] : pairs) {
      const auto& sa = coverage ? curves.at(ma).coverage : curves.at(ma).flip_rate;
      const auto& sb = coverage ? curves.at(mb).coverage : curves.at(mb).flip_rate;
      std::vector<double> x, y;
      for (std::size_t k = 0; k < sa.size(); ++k) {
        if (std::isnan(sa[k]) || std::isnan(sb[k])) continue;
        x.push_back(sa[k]);
        y.push_back(sb[k]);
      }
      if (x.size() < 2) {
        throw DegenerateError(std::string(metric) + ": fewer than 2 deletion steps to compare");
      }
      rows.push_back({metric, ma, mb, PairedTTest(x, y), x.size()});
    }
  }
  return rows;
}

std::string ComparisonCsv(const std::vector<ComparisonRow>& rows) {
  std::string out = "metric,method_a,method_b,t,p,n_steps\n";
  for (const ComparisonRow& r : rows) {
    out += r.metric + "," + std::string(AggregationMethodName(r.a)) + "," +
           std::string(AggregationMethodName(r.b)) + "," + Num(r.test.t) + "," + Num(r.test.p) +
           "," + std::to_string(r.n_steps) + "\n";
  }
  return out;
}

int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app("Contrastive feature attribution for speech-to-text models", "cxplain");
  app.require_subcommand(1);
  ConfigFlags flags;
  std::string maps_dir, curves_dir, corr_a, corr_b, corr_output;
  DemoOptions demo;

  CLI::App* explain = app.add_subcommand("explain", "saliency maps for every manifest case");
  AddConfigOptions(explain, &flags);
  CLI::App* evaluate = app.add_subcommand("evaluate", "deletion curves (coverage, flip rate)");
  AddConfigOptions(evaluate, &flags);
  evaluate->add_option("--maps", maps_dir, "directory of maps from explain (default: explain inline)");
  CLI::App* correlate = app.add_subcommand("correlate", "per-case Pearson r between two map directories");
  AddConfigOptions(correlate, &flags);
  correlate->add_option("map_dir_a", corr_a)->required();
  correlate->add_option("map_dir_b", corr_b)->required();
  correlate->add_option("--output", corr_output, "CSV path (default: stdout)");
  CLI::App* compare = app.add_subcommand("compare-aggregators", "paired t-tests between aggregation methods");
  AddConfigOptions(compare, &flags);
  compare->add_option("--curves_dir", curves_dir,
                      "directory with chain_rule.csv, length_norm.csv, word_boundary.csv "
                      "(default: run each method inline)");
  CLI::App* synth = app.add_subcommand("synth-demo", "planted-truth suite end to end");
  AddConfigOptions(synth, &flags);
  synth->add_option("--n_cases", demo.n_cases, "planted cases");
  synth->add_option("--out_of_coverage_cases", demo.out_of_coverage_cases,
                    "cases asking about a pair the model never emits");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    RunConfig base;
    if (synth->parsed()) base.output_dir = "cxplain_demo";
    const RunConfig c = ResolveConfig(flags, base);
    if (explain->parsed()) return CmdExplain(c, out);
    if (evaluate->parsed()) return CmdEvaluate(c, maps_dir, out);
    if (correlate->parsed()) return CmdCorrelate(c, corr_a, corr_b, corr_output, out);
    if (compare->parsed()) return CmdCompareAggregators(c, curves_dir, out);
    if (synth->parsed()) return CmdSynthDemo(c, demo, out);
  } catch (const ArgumentError& e) {
    err << "cxplain: " << e.what() << "\n";
    return kExitConfig;
  } catch (const ManifestError& e) {
    err << "cxplain: " << e.what() << "\n";
    return kExitConfig;
  } catch (const BackendError& e) {
    err << "cxplain: backend error (" << e.code() << "): " << e.what() << "\n";
    return kExitBackend;
  } catch (const ProtocolError& e) {
    err << "cxplain: backend protocol error: " << e.what() << "\n";
    return kExitBackend;
  } catch (const std::exception& e) {
    err << "cxplain: " << e.what() << "\n";
    return kExitOther;
  }
  return kExitOther;
}

}  // namespace cxplain
