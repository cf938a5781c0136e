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

// The cxplain command line: explain, evaluate, correlate,
// compare-aggregators and synth-demo.

#ifndef CXPLAIN_CLI_COMMANDS_H_
#define CXPLAIN_CLI_COMMANDS_H_

#include <filesystem>
#include <map>
#include <ostream>
#include <string>
#include <vector>

#include "cxplain/cli/config.h"
#include "cxplain/evaluation/deletion.h"
#include "cxplain/evaluation/statistics.h"

namespace cxplain {

// args excludes the program name. Returns an ExitCode.
int RunCli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

// Map files (*.fbnk, *.csv) in a directory keyed by file stem.
std::map<std::string, std::filesystem::path> ListMapFiles(const std::filesystem::path& dir);

struct CorrelationRow {
  std::string case_id;
  double r = 0.0;  // NaN when a map has zero variance
};

// Per-case Pearson r between same-named maps. Throws ArgumentError unless
// both directories hold exactly the same ids (and at least one).
std::vector<CorrelationRow> CorrelateMapDirs(const std::filesystem::path& a,
                                             const std::filesystem::path& b);

// "case_id,pearson_r" rows, then "mean,<mean over finite r>".
std::string CorrelationCsv(const std::vector<CorrelationRow>& rows);

struct ComparisonRow {
  std::string metric;  // "coverage" or "flip_rate"
  AggregationMethod a;
  AggregationMethod b;
  TTestResult test;
  std::size_t n_steps = 0;
};

// Paired t-tests over deletion steps for word_boundary vs length_norm,
// word_boundary vs chain_rule and length_norm vs chain_rule, on coverage
// then flip rate. Steps where either side is NaN are dropped. Throws
// ArgumentError when a method is missing or fractions differ, and
// DegenerateError when fewer than 2 steps remain.
std::vector<ComparisonRow> CompareAggregators(const std::map<AggregationMethod, EvalCurves>& curves);

// "metric,method_a,method_b,t,p,n_steps"
std::string ComparisonCsv(const std::vector<ComparisonRow>& rows);

}  // namespace cxplain

#endif  // CXPLAIN_CLI_COMMANDS_H_
