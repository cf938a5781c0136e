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

#ifndef CXPLAIN_BACKEND_BACKEND_H_
#define CXPLAIN_BACKEND_BACKEND_H_

#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/backend/protocol.h"
#include "cxplain/core/types.h"

namespace cxplain {

// A model oracle. One instance is one serial conversation; it is not safe to
// call concurrently. Failures reported by the model side surface as
// BackendError (code as on the wire); broken traffic as ProtocolError.
class Backend {
 public:
  virtual ~Backend() = default;

  // Validated vocabulary facts; repeated calls return the same value.
  virtual TokenizerInfo Handshake() = 0;

  // Registers features under `feature_id`. Re-registering identical content
  // is a no-op; different content under a known id is
  // BackendError("feature_conflict").
  virtual void LoadFeatures(const std::string& feature_id, const Spectrogram& spec) = 0;

  // One response per request, in request order.
  virtual std::vector<ScoreResponse> ScoreBatch(std::span<const ScoreRequest> requests) = 0;

  virtual GenerateResponse Generate(const GenerateRequest& request) = 0;

  virtual std::vector<TokenId> Tokenize(std::string_view text) = 0;

  virtual void Shutdown() {}
};

ScoreResponse ScoreSequence(Backend& backend, const ScoreRequest& request);

}  // namespace cxplain

#endif  // CXPLAIN_BACKEND_BACKEND_H_
