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

#include "cxplain/backend/process.h"

#include <fcntl.h>
#include <poll.h>
#include <signal.h>
#include <spawn.h>
#include <sys/wait.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>
#include <istream>
#include <ostream>
#include <set>

#include "cxplain/core/errors.h"
#include "cxplain/core/feature_io.h"

extern char** environ;

namespace cxplain {

ScoreResponse ScoreSequence(Backend& backend, const ScoreRequest& request) {
  std::vector<ScoreResponse> out = backend.ScoreBatch(std::span(&request, 1));
  if (out.size() != 1) throw ProtocolError("score batch of one returned " +
                                           std::to_string(out.size()) + " responses");
  return std::move(out.front());
}

ProtocolServer::ProtocolServer(Backend& backend, ServerOptions options)
    : backend_(backend), options_(options) {
  if (options_.reorder_window == 0) options_.reorder_window = 1;
}

std::string ProtocolServer::HandleLine(std::string_view line, bool* shutdown) {
  *shutdown = false;
  Reply reply;
  auto fail = [&](const std::string& code, const std::string& message) {
    if (!reply.id) reply.id = PeekMessageId(line);
    reply.error = WireError{code, message};
  };
  try {
    Message m = ParseMessage(line);
    reply.id = m.id;
    reply.type = m.type;
    switch (m.type) {
      case MessageType::kHandshake:
        if (m.protocol_version != kProtocolVersion) {
          throw ProtocolError("server speaks protocol version " +
                                  std::to_string(kProtocolVersion) + ", client asked for " +
                                  std::to_string(m.protocol_version),
                              "version_mismatch");
        }
        reply.tokenizer = backend_.Handshake();
        break;
      case MessageType::kLoadFeatures: {
        Spectrogram spec = [&] {
          try {
            return DecodeFbnk(m.fbnk_bytes);
          } catch (const ParseError& e) {
            throw ProtocolError(std::string("bad FBNK payload: ") + e.what(),
                                "invalid_request");
          }
        }();
        backend_.LoadFeatures(m.feature_id, spec);
        break;
      }
      case MessageType::kScoreBatch:
        for (const ScoreRequest& r : m.score_requests) ValidateScoreRequest(r);
        reply.score_responses = backend_.ScoreBatch(m.score_requests);
        break;
      case MessageType::kGenerate:
        ValidateGenerateRequest(m.generate);
        reply.generate = backend_.Generate(m.generate);
        break;
      case MessageType::kTokenize:
        reply.tokens = backend_.Tokenize(m.text);
        break;
      case MessageType::kShutdown:
        backend_.Shutdown();
        *shutdown = true;
        break;
    }
  } catch (const ProtocolError& e) {
    fail(e.code(), e.what());
  } catch (const BackendError& e) {
    fail(e.code(), e.what());
  } catch (const std::exception& e) {
    fail("internal", e.what());
  }
  return SerializeReply(reply);
}

void ProtocolServer::Serve(std::istream& in, std::ostream& out) {
  std::vector<std::string> held;
  auto flush = [&] {
    for (auto it = held.rbegin(); it != held.rend(); ++it) out << *it << '\n';
    out.flush();
    held.clear();
  };
  std::string line;
  bool shutdown = false;
  while (!shutdown && std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    held.push_back(HandleLine(line, &shutdown));
    // Flush before a read that could block, so a lone request is never held.
    if (held.size() >= options_.reorder_window || shutdown || in.rdbuf()->in_avail() <= 0) {
      flush();
    }
  }
  flush();
}

namespace {

void CloseFd(int& fd) {
  if (fd >= 0) ::close(fd);
  fd = -1;
}

std::string ErrnoText(const char* what) {
  return std::string(what) + ": " + std::strerror(errno);
}

}  // namespace

ProcessBackend::ProcessBackend(const std::string& command) {
  ::signal(SIGPIPE, SIG_IGN);
  int in_pipe[2];
  int out_pipe[2];
  if (::pipe2(in_pipe, O_CLOEXEC) != 0) throw BackendError("spawn_failed", ErrnoText("pipe"));
  if (::pipe2(out_pipe, O_CLOEXEC) != 0) {
    ::close(in_pipe[0]);
    ::close(in_pipe[1]);
    throw BackendError("spawn_failed", ErrnoText("pipe"));
  }
  posix_spawn_file_actions_t actions;
  posix_spawn_file_actions_init(&actions);
  posix_spawn_file_actions_adddup2(&actions, in_pipe[0], STDIN_FILENO);
  posix_spawn_file_actions_adddup2(&actions, out_pipe[1], STDOUT_FILENO);
  const char* argv[] = {"/bin/sh", "-c", command.c_str(), nullptr};
  const int rc = ::posix_spawn(&pid_, "/bin/sh", &actions, nullptr,
                               const_cast<char* const*>(argv), environ);
  posix_spawn_file_actions_destroy(&actions);
  ::close(in_pipe[0]);
  ::close(out_pipe[1]);
  to_child_ = in_pipe[1];
  from_child_ = out_pipe[0];
  if (rc != 0) {
    pid_ = -1;
    CloseFd(to_child_);
    CloseFd(from_child_);
    throw BackendError("spawn_failed", std::string("posix_spawn: ") + std::strerror(rc));
  }
}

ProcessBackend::~ProcessBackend() {
  try {
    Shutdown();
  } catch (...) {
  }
  CloseFd(to_child_);
  CloseFd(from_child_);
  if (pid_ > 0) {
    ::kill(pid_, SIGTERM);
    ReapChild();
  }
}

void ProcessBackend::ReapChild() {
  if (pid_ <= 0) return;
  int status = 0;
  // A well-behaved backend exits once stdin closes; give it two seconds.
  for (int i = 0; i < 200; ++i) {
    const pid_t r = ::waitpid(pid_, &status, WNOHANG);
    if (r == pid_ || (r < 0 && errno != EINTR)) {
      pid_ = -1;
      return;
    }
    ::usleep(10000);
  }
  ::kill(pid_, SIGKILL);
  while (::waitpid(pid_, &status, 0) < 0 && errno == EINTR) {
  }
  pid_ = -1;
}

void ProcessBackend::ReadAvailable() {
  char buf[65536];
  ssize_t n;
  do {
    n = ::read(from_child_, buf, sizeof(buf));
  } while (n < 0 && errno == EINTR);
  if (n < 0) throw BackendError("io_error", ErrnoText("read from backend"));
  if (n == 0) {
    closed_ = true;
    CloseFd(to_child_);
    CloseFd(from_child_);
    int status = 0;
    std::string how = "exited";
    if (pid_ > 0 && ::waitpid(pid_, &status, 0) == pid_) {
      pid_ = -1;
      if (WIFEXITED(status)) how = "exited with status " + std::to_string(WEXITSTATUS(status));
      if (WIFSIGNALED(status)) how = "was killed by signal " + std::to_string(WTERMSIG(status));
    }
    throw BackendError("backend_exited", "backend " + how + " before replying");
  }
  read_buffer_.append(buf, static_cast<std::size_t>(n));
  std::size_t start = 0;
  for (std::size_t nl; (nl = read_buffer_.find('\n', start)) != std::string::npos;
       start = nl + 1) {
    std::string_view line(read_buffer_.data() + start, nl - start);
    if (line.empty()) continue;
    Reply reply = ParseReply(line);
    if (!reply.id) {
      const WireError err = reply.error.value_or(WireError{"malformed", "reply without id"});
      throw BackendError(err.code, "backend rejected a message: " + err.message);
    }
    pending_[*reply.id] = std::move(reply);
  }
  read_buffer_.erase(0, start);
}

std::vector<Reply> ProcessBackend::Exchange(std::vector<Message> messages, int timeout_ms) {
  if (closed_) throw BackendError("backend_exited", "backend connection is closed");
  try {
    std::string outgoing;
    std::vector<std::uint64_t> ids;
    for (Message& m : messages) {
      m.id = next_id_++;
      ids.push_back(m.id);
      outgoing += SerializeMessage(m);
      outgoing.push_back('\n');
    }
    std::set<std::uint64_t> waiting(ids.begin(), ids.end());
    for (std::uint64_t id : ids) {
      if (pending_.count(id)) waiting.erase(id);
    }
    std::size_t written = 0;
    while (written < outgoing.size() || !waiting.empty()) {
      pollfd fds[2];
      nfds_t n = 0;
      fds[n++] = {from_child_, POLLIN, 0};
      if (written < outgoing.size()) fds[n++] = {to_child_, POLLOUT, 0};
      const int ready = ::poll(fds, n, timeout_ms);
      if (ready < 0) {
        if (errno == EINTR) continue;
        throw BackendError("io_error", ErrnoText("poll"));
      }
      if (ready == 0) throw BackendError("timeout", "backend did not answer in time");
      if (n == 2 && (fds[1].revents & (POLLOUT | POLLERR | POLLHUP))) {
        const ssize_t w = ::write(to_child_, outgoing.data() + written, outgoing.size() - written);
        if (w < 0 && errno != EINTR && errno != EAGAIN) {
          if (errno == EPIPE) {
            // The child went away; reading will report how.
            written = outgoing.size();
          } else {
            throw BackendError("io_error", ErrnoText("write to backend"));
          }
        } else if (w > 0) {
          written += static_cast<std::size_t>(w);
        }
      }
      if (fds[0].revents & (POLLIN | POLLHUP | POLLERR)) {
        ReadAvailable();
        for (auto it = waiting.begin(); it != waiting.end();) {
          it = pending_.count(*it) ? waiting.erase(it) : std::next(it);
        }
      }
    }
    std::vector<Reply> replies;
    for (std::size_t i = 0; i < ids.size(); ++i) {
      auto node = pending_.extract(ids[i]);
      Reply& r = node.mapped();
      if (r.error) throw BackendError(r.error->code, r.error->message);
      if (r.type != messages[i].type) {
        throw ProtocolError("reply type does not match request " + std::to_string(ids[i]));
      }
      replies.push_back(std::move(r));
    }
    return replies;
  } catch (const ProtocolError&) {
    broken_ = true;
    throw;
  }
}

Reply ProcessBackend::RoundTrip(Message message, int timeout_ms) {
  std::vector<Message> one;
  one.push_back(std::move(message));
  return std::move(Exchange(std::move(one), timeout_ms).front());
}

TokenizerInfo ProcessBackend::Handshake() {
  if (tokenizer_) return *tokenizer_;
  Message m;
  m.type = MessageType::kHandshake;
  Reply r = [&] {
    try {
      return RoundTrip(m);
    } catch (const BackendError& e) {
      if (e.code() == "version_mismatch") throw ProtocolError(e.what(), "version_mismatch");
      throw;
    }
  }();
  if (r.protocol_version != kProtocolVersion) {
    broken_ = true;
    throw ProtocolError("backend speaks protocol version " +
                            std::to_string(r.protocol_version),
                        "version_mismatch");
  }
  try {
    r.tokenizer.Validate();
  } catch (const ArgumentError& e) {
    broken_ = true;
    throw ProtocolError(std::string("invalid handshake: ") + e.what(), "invalid_handshake");
  }
  tokenizer_ = r.tokenizer;
  return *tokenizer_;
}

void ProcessBackend::LoadFeatures(const std::string& feature_id, const Spectrogram& spec) {
  Message m;
  m.type = MessageType::kLoadFeatures;
  m.feature_id = feature_id;
  m.fbnk_bytes = EncodeFbnk(spec);
  RoundTrip(std::move(m));
}

std::vector<std::vector<ScoreResponse>> ProcessBackend::ScoreBatches(
    std::span<const std::vector<ScoreRequest>> batches) {
  std::vector<Message> messages;
  for (const auto& batch : batches) {
    Message m;
    m.type = MessageType::kScoreBatch;
    m.score_requests = batch;
    messages.push_back(std::move(m));
  }
  std::vector<Reply> replies = Exchange(std::move(messages));
  std::vector<std::vector<ScoreResponse>> out;
  for (std::size_t i = 0; i < replies.size(); ++i) {
    if (replies[i].score_responses.size() != batches[i].size()) {
      throw ProtocolError("score batch answered with the wrong number of responses");
    }
    for (std::size_t j = 0; j < batches[i].size(); ++j) {
      ValidateScoreResponse(batches[i][j], replies[i].score_responses[j]);
    }
    out.push_back(std::move(replies[i].score_responses));
  }
  return out;
}

std::vector<ScoreResponse> ProcessBackend::ScoreBatch(std::span<const ScoreRequest> requests) {
  std::vector<std::vector<ScoreRequest>> one = {
      std::vector<ScoreRequest>(requests.begin(), requests.end())};
  return std::move(ScoreBatches(one).front());
}

std::vector<GenerateResponse> ProcessBackend::GenerateMany(
    std::span<const GenerateRequest> requests) {
  std::vector<Message> messages;
  for (const GenerateRequest& g : requests) {
    Message m;
    m.type = MessageType::kGenerate;
    m.generate = g;
    messages.push_back(std::move(m));
  }
  std::vector<GenerateResponse> out;
  for (Reply& r : Exchange(std::move(messages))) out.push_back(std::move(r.generate));
  return out;
}

GenerateResponse ProcessBackend::Generate(const GenerateRequest& request) {
  return std::move(GenerateMany(std::span(&request, 1)).front());
}

std::vector<TokenId> ProcessBackend::Tokenize(std::string_view text) {
  Message m;
  m.type = MessageType::kTokenize;
  m.text = std::string(text);
  return RoundTrip(std::move(m)).tokens;
}

void ProcessBackend::Shutdown() {
  if (closed_) return;
  if (!broken_) {
    Message m;
    m.type = MessageType::kShutdown;
    try {
      RoundTrip(std::move(m), 5000);
    } catch (const Error&) {
      // Gone or unresponsive; closing stdin and reaping follow.
    }
  }
  closed_ = true;
  CloseFd(to_child_);
  CloseFd(from_child_);
  ReapChild();
}

}  // namespace cxplain
