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

// Backend wire protocol: newline-delimited JSON objects over a byte stream.
//
// Request:  {"id": 7, "type": "<kind>", ...fields}
// Reply:    {"id": 7, "type": "<kind>", "ok": true, "result": {...}}
//           {"id": 7, "ok": false, "error": {"code": "...", "message": "..."}}
//
// Kinds and request fields:
//   handshake      protocol_version
//   load_features  feature_id, fbnk_base64
//   score_batch    requests: [{feature_id, mask, prefix_tokens,
//                              continuation_tokens, want_bow_mass_at}]
//   generate       feature_id, mask, beam_size, no_repeat_ngram, max_len
//   tokenize       text
//   shutdown
//
// A mask is null/absent (unperturbed) or [[bit, run_length], ...] over the
// row-major cells. Result payloads:
//   handshake      protocol_version, vocab_size, bow_token_ids,
//                  punctuation_token_ids, eos_token_id, token_surfaces
//   load_features  {}
//   score_batch    responses: [{token_probs: [...], bow_masses: {"step": p}}]
//   generate       tokens, text
//   tokenize       tokens
//   shutdown       {}
// An error reply to a line whose id could not be read carries "id": null.

#ifndef CXPLAIN_BACKEND_PROTOCOL_H_
#define CXPLAIN_BACKEND_PROTOCOL_H_

#include <cstddef>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "cxplain/core/types.h"
#include "cxplain/perturbation/rle.h"

namespace cxplain {

inline constexpr int kProtocolVersion = 1;

struct ScoreRequest {
  std::string feature_id;
  std::optional<RleBitset> mask;  // absent = unperturbed
  std::vector<TokenId> prefix_tokens;
  std::vector<TokenId> continuation_tokens;
  std::vector<std::size_t> want_bow_mass_at;  // steps in [0, continuation size]

  bool operator==(const ScoreRequest& other) const = default;
};

struct ScoreResponse {
  std::vector<double> token_probs;
  std::map<std::size_t, double> bow_masses;

  bool operator==(const ScoreResponse& other) const = default;
};

struct GenerateRequest {
  std::string feature_id;
  std::optional<RleBitset> mask;
  std::size_t beam_size = 5;
  std::size_t no_repeat_ngram = 5;
  std::size_t max_len = 256;

  bool operator==(const GenerateRequest& other) const = default;
};

struct GenerateResponse {
  std::vector<TokenId> tokens;
  std::string text;

  bool operator==(const GenerateResponse& other) const = default;
};

// Throws ProtocolError("invalid_request") on an empty continuation, a bow
// step beyond the continuation, or beam_size 0.
void ValidateScoreRequest(const ScoreRequest& request);
void ValidateGenerateRequest(const GenerateRequest& request);
// Throws ProtocolError when the response does not answer the request:
// length mismatch, probabilities outside [0, 1] or non-finite, missing bow
// steps.
void ValidateScoreResponse(const ScoreRequest& request, const ScoreResponse& response);

enum class MessageType {
  kHandshake,
  kLoadFeatures,
  kScoreBatch,
  kGenerate,
  kTokenize,
  kShutdown
};

std::string_view MessageTypeName(MessageType type);
std::optional<MessageType> ParseMessageType(std::string_view name);

// A request. Only the fields of its type are meaningful.
struct Message {
  std::uint64_t id = 0;
  MessageType type = MessageType::kHandshake;
  int protocol_version = kProtocolVersion;  // handshake
  std::string feature_id;                   // load_features
  std::string fbnk_bytes;                   // load_features, raw (not base64)
  std::vector<ScoreRequest> score_requests;  // score_batch
  GenerateRequest generate;                 // generate
  std::string text;                         // tokenize

  bool operator==(const Message& other) const = default;
};

struct WireError {
  std::string code;
  std::string message;

  bool operator==(const WireError& other) const = default;
};

struct Reply {
  std::optional<std::uint64_t> id;
  std::optional<MessageType> type;  // absent on errors for unparseable lines
  std::optional<WireError> error;   // set iff the reply is a failure
  int protocol_version = kProtocolVersion;        // handshake
  TokenizerInfo tokenizer;                        // handshake
  std::vector<ScoreResponse> score_responses;     // score_batch
  GenerateResponse generate;                      // generate
  std::vector<TokenId> tokens;                    // tokenize

  bool ok() const { return !error.has_value(); }
  bool operator==(const Reply& other) const = default;
};

// Single line, no trailing newline.
std::string SerializeMessage(const Message& message);
// Throws ProtocolError carrying the wire code for the failure.
Message ParseMessage(std::string_view line);

std::string SerializeReply(const Reply& reply);
Reply ParseReply(std::string_view line);

// Best effort: the "id" of a line that failed to parse, if readable.
std::optional<std::uint64_t> PeekMessageId(std::string_view line);

std::string Base64Encode(std::string_view bytes);
// Throws ProtocolError on invalid characters or length.
std::string Base64Decode(std::string_view text);

}  // namespace cxplain

#endif  // CXPLAIN_BACKEND_PROTOCOL_H_
