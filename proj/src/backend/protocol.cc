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

#include "cxplain/backend/protocol.h"

#include <openssl/evp.h>

#include <charconv>
#include <cmath>
#include <limits>

#include "json.hpp"
#include "cxplain/core/errors.h"

namespace cxplain {
namespace {

using json = nlohmann::json;

constexpr const char* kTypeNames[] = {"handshake", "load_features", "score_batch",
                                      "generate",  "tokenize",      "shutdown"};

[[noreturn]] void Malformed(const std::string& what) { throw ProtocolError(what); }

const json& Field(const json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end()) Malformed(std::string("missing field '") + key + "'");
  return *it;
}

std::uint64_t AsUnsigned(const json& value, const char* what) {
  if (value.is_number_unsigned()) return value.get<std::uint64_t>();
  if (value.is_number_integer() && value.get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(value.get<std::int64_t>());
  }
  Malformed(std::string("'") + what + "' must be a non-negative integer");
}

TokenId AsToken(const json& value) {
  if (!value.is_number_integer()) Malformed("token ids must be integers");
  const std::int64_t v = value.is_number_unsigned()
                             ? static_cast<std::int64_t>(std::min<std::uint64_t>(
                                   value.get<std::uint64_t>(), INT64_MAX))
                             : value.get<std::int64_t>();
  if (v < std::numeric_limits<TokenId>::min() || v > std::numeric_limits<TokenId>::max()) {
    Malformed("token id out of range");
  }
  return static_cast<TokenId>(v);
}

std::vector<TokenId> AsTokens(const json& value, const char* what) {
  if (!value.is_array()) Malformed(std::string("'") + what + "' must be an array");
  std::vector<TokenId> out;
  out.reserve(value.size());
  for (const json& v : value) out.push_back(AsToken(v));
  return out;
}

std::string AsString(const json& value, const char* what) {
  if (!value.is_string()) Malformed(std::string("'") + what + "' must be a string");
  return value.get<std::string>();
}

double AsNumber(const json& value, const char* what) {
  if (!value.is_number()) Malformed(std::string("'") + what + "' must be a number");
  return value.get<double>();
}

json MaskToJson(const std::optional<RleBitset>& mask) {
  if (!mask) return nullptr;
  json runs = json::array();
  for (const RleRun& run : mask->runs) runs.push_back({run.bit ? 1 : 0, run.length});
  return runs;
}

std::optional<RleBitset> MaskFromJson(const json& obj) {
  auto it = obj.find("mask");
  if (it == obj.end() || it->is_null()) return std::nullopt;
  if (!it->is_array()) Malformed("'mask' must be null or an array of runs");
  RleBitset rle;
  for (const json& run : *it) {
    if (!run.is_array() || run.size() != 2) Malformed("mask runs are [bit, length] pairs");
    const std::uint64_t bit = AsUnsigned(run[0], "mask bit");
    const std::uint64_t length = AsUnsigned(run[1], "mask run length");
    if (bit > 1) Malformed("mask bit must be 0 or 1");
    if (length > UINT32_MAX) Malformed("mask run length exceeds 32 bits");
    rle.runs.push_back({bit == 1, static_cast<std::uint32_t>(length)});
  }
  return rle;
}

json ScoreRequestToJson(const ScoreRequest& r) {
  return {{"feature_id", r.feature_id},
          {"mask", MaskToJson(r.mask)},
          {"prefix_tokens", r.prefix_tokens},
          {"continuation_tokens", r.continuation_tokens},
          {"want_bow_mass_at", r.want_bow_mass_at}};
}

ScoreRequest ScoreRequestFromJson(const json& obj) {
  if (!obj.is_object()) Malformed("score request must be an object");
  ScoreRequest r;
  r.feature_id = AsString(Field(obj, "feature_id"), "feature_id");
  r.mask = MaskFromJson(obj);
  r.prefix_tokens = AsTokens(Field(obj, "prefix_tokens"), "prefix_tokens");
  r.continuation_tokens = AsTokens(Field(obj, "continuation_tokens"), "continuation_tokens");
  auto bow = obj.find("want_bow_mass_at");
  if (bow != obj.end()) {
    if (!bow->is_array()) Malformed("'want_bow_mass_at' must be an array");
    for (const json& v : *bow) r.want_bow_mass_at.push_back(AsUnsigned(v, "want_bow_mass_at"));
  }
  return r;
}

json ScoreResponseToJson(const ScoreResponse& r) {
  json masses = json::object();
  for (const auto& [step, mass] : r.bow_masses) masses[std::to_string(step)] = mass;
  return {{"token_probs", r.token_probs}, {"bow_masses", masses}};
}

ScoreResponse ScoreResponseFromJson(const json& obj) {
  if (!obj.is_object()) Malformed("score response must be an object");
  ScoreResponse r;
  const json& probs = Field(obj, "token_probs");
  if (!probs.is_array()) Malformed("'token_probs' must be an array");
  for (const json& p : probs) r.token_probs.push_back(AsNumber(p, "token_probs"));
  auto masses = obj.find("bow_masses");
  if (masses != obj.end()) {
    if (!masses->is_object()) Malformed("'bow_masses' must be an object");
    for (const auto& [key, value] : masses->items()) {
      std::size_t step = 0;
      auto [ptr, ec] = std::from_chars(key.data(), key.data() + key.size(), step);
      if (key.empty() || ec != std::errc() || ptr != key.data() + key.size()) {
        Malformed("bow_masses keys must be step indices");
      }
      r.bow_masses[step] = AsNumber(value, "bow_masses");
    }
  }
  return r;
}

json TokenizerToJson(const TokenizerInfo& info, int version) {
  return {{"protocol_version", version},
          {"vocab_size", info.vocab_size()},
          {"bow_token_ids", info.bow_token_ids()},
          {"punctuation_token_ids", info.punctuation_token_ids()},
          {"eos_token_id", info.eos_token_id()},
          {"token_surfaces", info.token_surfaces()}};
}

std::string Dump(const json& j) {
  return j.dump(-1, ' ', false, json::error_handler_t::replace);
}

json ParseObject(std::string_view line) {
  json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) Malformed("line is not valid JSON");
  if (!j.is_object()) Malformed("message must be a JSON object");
  return j;
}

MessageType RequireType(const json& obj) {
  const std::string name = AsString(Field(obj, "type"), "type");
  std::optional<MessageType> type = ParseMessageType(name);
  if (!type) throw ProtocolError("unknown message type '" + name + "'", "unsupported_type");
  return *type;
}

}  // namespace

void ValidateScoreRequest(const ScoreRequest& request) {
  if (request.continuation_tokens.empty()) {
    throw ProtocolError("continuation_tokens must not be empty", "invalid_request");
  }
  for (std::size_t step : request.want_bow_mass_at) {
    if (step > request.continuation_tokens.size()) {
      throw ProtocolError("bow step " + std::to_string(step) +
                              " is beyond the continuation",
                          "invalid_request");
    }
  }
}

void ValidateGenerateRequest(const GenerateRequest& request) {
  if (request.beam_size == 0) throw ProtocolError("beam_size must be >= 1", "invalid_request");
}

void ValidateScoreResponse(const ScoreRequest& request, const ScoreResponse& response) {
  if (response.token_probs.size() != request.continuation_tokens.size()) {
    throw ProtocolError("response has " + std::to_string(response.token_probs.size()) +
                        " probabilities for " +
                        std::to_string(request.continuation_tokens.size()) + " tokens");
  }
  auto check = [](double p) {
    if (!std::isfinite(p) || p < 0.0 || p > 1.0) {
      throw ProtocolError("probability outside [0, 1]");
    }
  };
  for (double p : response.token_probs) check(p);
  for (std::size_t step : request.want_bow_mass_at) {
    auto it = response.bow_masses.find(step);
    if (it == response.bow_masses.end()) {
      throw ProtocolError("response lacks bow mass at step " + std::to_string(step));
    }
    check(it->second);
  }
}

std::string_view MessageTypeName(MessageType type) {
  return kTypeNames[static_cast<int>(type)];
}

std::optional<MessageType> ParseMessageType(std::string_view name) {
  for (int i = 0; i < 6; ++i) {
    if (name == kTypeNames[i]) return static_cast<MessageType>(i);
  }
  return std::nullopt;
}

std::string SerializeMessage(const Message& m) {
  json j = {{"id", m.id}, {"type", MessageTypeName(m.type)}};
  switch (m.type) {
    case MessageType::kHandshake:
      j["protocol_version"] = m.protocol_version;
      break;
    case MessageType::kLoadFeatures:
      j["feature_id"] = m.feature_id;
      j["fbnk_base64"] = Base64Encode(m.fbnk_bytes);
      break;
    case MessageType::kScoreBatch: {
      json requests = json::array();
      for (const ScoreRequest& r : m.score_requests) requests.push_back(ScoreRequestToJson(r));
      j["requests"] = std::move(requests);
      break;
    }
    case MessageType::kGenerate:
      j["feature_id"] = m.generate.feature_id;
      j["mask"] = MaskToJson(m.generate.mask);
      j["beam_size"] = m.generate.beam_size;
      j["no_repeat_ngram"] = m.generate.no_repeat_ngram;
      j["max_len"] = m.generate.max_len;
      break;
    case MessageType::kTokenize:
      j["text"] = m.text;
      break;
    case MessageType::kShutdown:
      break;
  }
  return Dump(j);
}

Message ParseMessage(std::string_view line) {
  const json j = ParseObject(line);
  Message m;
  m.id = AsUnsigned(Field(j, "id"), "id");
  m.type = RequireType(j);
  switch (m.type) {
    case MessageType::kHandshake: {
      const json& v = Field(j, "protocol_version");
      if (!v.is_number_integer()) Malformed("'protocol_version' must be an integer");
      m.protocol_version = v.get<int>();
      break;
    }
    case MessageType::kLoadFeatures:
      m.feature_id = AsString(Field(j, "feature_id"), "feature_id");
      m.fbnk_bytes = Base64Decode(AsString(Field(j, "fbnk_base64"), "fbnk_base64"));
      break;
    case MessageType::kScoreBatch: {
      const json& requests = Field(j, "requests");
      if (!requests.is_array()) Malformed("'requests' must be an array");
      for (const json& r : requests) m.score_requests.push_back(ScoreRequestFromJson(r));
      break;
    }
    case MessageType::kGenerate: {
      m.generate.feature_id = AsString(Field(j, "feature_id"), "feature_id");
      m.generate.mask = MaskFromJson(j);
      if (j.contains("beam_size")) m.generate.beam_size = AsUnsigned(j["beam_size"], "beam_size");
      if (j.contains("no_repeat_ngram")) {
        m.generate.no_repeat_ngram = AsUnsigned(j["no_repeat_ngram"], "no_repeat_ngram");
      }
      if (j.contains("max_len")) m.generate.max_len = AsUnsigned(j["max_len"], "max_len");
      break;
    }
    case MessageType::kTokenize:
      m.text = AsString(Field(j, "text"), "text");
      break;
    case MessageType::kShutdown:
      break;
  }
  return m;
}

std::string SerializeReply(const Reply& r) {
  json j;
  j["id"] = r.id ? json(*r.id) : json(nullptr);
  if (r.type) j["type"] = MessageTypeName(*r.type);
  j["ok"] = r.ok();
  if (r.error) {
    j["error"] = {{"code", r.error->code}, {"message", r.error->message}};
    return Dump(j);
  }
  if (!r.type) throw ArgumentError("successful reply needs a type");
  json result = json::object();
  switch (*r.type) {
    case MessageType::kHandshake:
      result = TokenizerToJson(r.tokenizer, r.protocol_version);
      break;
    case MessageType::kScoreBatch: {
      json responses = json::array();
      for (const ScoreResponse& s : r.score_responses) responses.push_back(ScoreResponseToJson(s));
      result["responses"] = std::move(responses);
      break;
    }
    case MessageType::kGenerate:
      result["tokens"] = r.generate.tokens;
      result["text"] = r.generate.text;
      break;
    case MessageType::kTokenize:
      result["tokens"] = r.tokens;
      break;
    case MessageType::kLoadFeatures:
    case MessageType::kShutdown:
      break;
  }
  j["result"] = std::move(result);
  return Dump(j);
}

Reply ParseReply(std::string_view line) {
  const json j = ParseObject(line);
  Reply r;
  const json& id = Field(j, "id");
  if (!id.is_null()) r.id = AsUnsigned(id, "id");
  if (j.contains("type")) r.type = RequireType(j);
  const json& ok = Field(j, "ok");
  if (!ok.is_boolean()) Malformed("'ok' must be a boolean");
  if (!ok.get<bool>()) {
    const json& err = Field(j, "error");
    if (!err.is_object()) Malformed("'error' must be an object");
    r.error = WireError{AsString(Field(err, "code"), "code"),
                        AsString(Field(err, "message"), "message")};
    return r;
  }
  if (!r.type) Malformed("successful reply lacks 'type'");
  const json& result = Field(j, "result");
  if (!result.is_object()) Malformed("'result' must be an object");
  switch (*r.type) {
    case MessageType::kHandshake: {
      const json& v = Field(result, "protocol_version");
      if (!v.is_number_integer()) Malformed("'protocol_version' must be an integer");
      r.protocol_version = v.get<int>();
      const json& surfaces = Field(result, "token_surfaces");
      if (!surfaces.is_array()) Malformed("'token_surfaces' must be an array");
      std::vector<std::string> table;
      for (const json& s : surfaces) table.push_back(AsString(s, "token_surfaces"));
      r.tokenizer = TokenizerInfo(AsUnsigned(Field(result, "vocab_size"), "vocab_size"),
                                  AsTokens(Field(result, "bow_token_ids"), "bow_token_ids"),
                                  AsTokens(Field(result, "punctuation_token_ids"),
                                           "punctuation_token_ids"),
                                  AsToken(Field(result, "eos_token_id")), std::move(table));
      break;
    }
    case MessageType::kScoreBatch: {
      const json& responses = Field(result, "responses");
      if (!responses.is_array()) Malformed("'responses' must be an array");
      for (const json& s : responses) r.score_responses.push_back(ScoreResponseFromJson(s));
      break;
    }
    case MessageType::kGenerate:
      r.generate.tokens = AsTokens(Field(result, "tokens"), "tokens");
      r.generate.text = AsString(Field(result, "text"), "text");
      break;
    case MessageType::kTokenize:
      r.tokens = AsTokens(Field(result, "tokens"), "tokens");
      break;
    case MessageType::kLoadFeatures:
    case MessageType::kShutdown:
      break;
  }
  return r;
}

std::optional<std::uint64_t> PeekMessageId(std::string_view line) {
  json j = json::parse(line, nullptr, false);
  if (j.is_discarded() || !j.is_object()) return std::nullopt;
  auto it = j.find("id");
  if (it == j.end()) return std::nullopt;
  if (it->is_number_unsigned()) return it->get<std::uint64_t>();
  if (it->is_number_integer() && it->get<std::int64_t>() >= 0) {
    return static_cast<std::uint64_t>(it->get<std::int64_t>());
  }
  return std::nullopt;
}

std::string Base64Encode(std::string_view bytes) {
  std::string out(4 * ((bytes.size() + 2) / 3), '\0');
  const int n = EVP_EncodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(bytes.data()),
                                static_cast<int>(bytes.size()));
  out.resize(static_cast<std::size_t>(n));
  return out;
}

std::string Base64Decode(std::string_view text) {
  if (text.size() % 4 != 0) throw ProtocolError("base64 length is not a multiple of 4");
  if (text.empty()) return "";
  std::string out(3 * (text.size() / 4), '\0');
  const int n = EVP_DecodeBlock(reinterpret_cast<unsigned char*>(out.data()),
                                reinterpret_cast<const unsigned char*>(text.data()),
                                static_cast<int>(text.size()));
  if (n < 0) throw ProtocolError("invalid base64 payload");
  std::size_t padding = 0;
  if (text.back() == '=') ++padding;
  if (text.size() >= 2 && text[text.size() - 2] == '=') ++padding;
  out.resize(static_cast<std::size_t>(n) - padding);
  return out;
}

}  // namespace cxplain
