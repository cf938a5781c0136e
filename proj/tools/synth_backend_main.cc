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

// Serves the synthetic backend over stdin/stdout.

#include <iostream>

#include "CLI11.hpp"
#include "cxplain/backend/process.h"
#include "cxplain/backend/synthetic.h"
#include "cxplain/core/feature_io.h"

int main(int argc, char** argv) {
  CLI::App app("Synthetic planted-truth backend speaking the cxplain wire protocol");
  std::string suite_path;
  std::size_t reorder = 1;
  app.add_option("--suite", suite_path, "suite JSON")->required();
  app.add_option("--reorder", reorder, "reply reordering window (testing)");
  CLI11_PARSE(app, argc, argv);

  try {
    const std::string text = cxplain::ReadFileBytes(suite_path);
    cxplain::SyntheticBackend backend(cxplain::SyntheticSuite::FromJson(text));
    cxplain::ProtocolServer server(backend, {reorder});
    std::ios::sync_with_stdio(false);
    server.Serve(std::cin, std::cout);
  } catch (const std::exception& e) {
    std::cerr << "cxplain_synth_backend: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
