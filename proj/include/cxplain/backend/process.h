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

// Both ends of the wire protocol: a server that exposes any Backend over a
// line stream, and a client that drives a backend subprocess.

#ifndef CXPLAIN_BACKEND_PROCESS_H_
#define CXPLAIN_BACKEND_PROCESS_H_

#include <sys/types.h>

#include <cstdint>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "cxplain/backend/backend.h"

namespace cxplain {

struct ServerOptions {
  // Replies are held until this many are pending (or no further input is
  // buffered) and then written newest first. 1 answers in order; larger
  // values exercise the client's correlation-id matching.
  std::size_t reorder_window = 1;
};

class ProtocolServer {
 public:
  explicit ProtocolServer(Backend& backend, ServerOptions options = {});

  // Reply line (no newline) for one request line. Never throws: failures
  // become error replies. Sets *shutdown after a shutdown request.
  std::string HandleLine(std::string_view line, bool* shutdown);

  // Serves until a shutdown request or end of input.
  void Serve(std::istream& in, std::ostream& out);

 private:
  Backend& backend_;
  ServerOptions options_;
};

class ProcessBackend : public Backend {
 public:
  // Runs `command` through /bin/sh -c with pipes on stdin/stdout; stderr is
  // inherited. Throws BackendError("spawn_failed").
  explicit ProcessBackend(const std::string& command);
  ~ProcessBackend() override;

  ProcessBackend(const ProcessBackend&) = delete;
  ProcessBackend& operator=(const ProcessBackend&) = delete;

  // Throws ProtocolError("version_mismatch") or ProtocolError("invalid_handshake").
  TokenizerInfo Handshake() override;
  void LoadFeatures(const std::string& feature_id, const Spectrogram& spec) override;
  std::vector<ScoreResponse> ScoreBatch(std::span<const ScoreRequest> requests) override;
  GenerateResponse Generate(const GenerateRequest& request) override;
  std::vector<TokenId> Tokenize(std::string_view text) override;
  // Sends shutdown, waits for the reply and reaps the child. Idempotent.
  void Shutdown() override;

  // Writes every batch before waiting on any reply; replies are matched by
  // id, so the backend may answer in any order.
  std::vector<std::vector<ScoreResponse>> ScoreBatches(
      std::span<const std::vector<ScoreRequest>> batches);

  // Same, for generate requests.
  std::vector<GenerateResponse> GenerateMany(std::span<const GenerateRequest> requests);

 private:
  // Writes the messages and reads until every one of them has a reply.
  // A negative timeout waits forever; expiry is BackendError("timeout").
  std::vector<Reply> Exchange(std::vector<Message> messages, int timeout_ms = -1);
  Reply RoundTrip(Message message, int timeout_ms = -1);
  void ReadAvailable();
  void ReapChild();

  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  std::uint64_t next_id_ = 1;
  std::string read_buffer_;
  std::map<std::uint64_t, Reply> pending_;
  std::optional<TokenizerInfo> tokenizer_;
  bool closed_ = false;
  bool broken_ = false;  // unusable traffic seen; skip the shutdown exchange
};

}  // namespace cxplain

#endif  // CXPLAIN_BACKEND_PROCESS_H_
