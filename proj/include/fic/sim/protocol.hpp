// Copyright 2026 The ficteleop Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

// Framing and message helpers of the live-session protocol: every message is
// a JSON object preceded by its byte length as a 4-byte big-endian integer.

#pragma once

#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

#include "fic/sim/master_input.hpp"
#include "json.hpp"

namespace fic::sim {

inline constexpr std::uint32_t kMaxFrameBytes = 1u << 20;

/// A protocol violation. `code` is the machine-readable reason sent to the
/// peer before the session is closed.
class ProtocolError : public std::runtime_error {
 public:
  ProtocolError(std::string code, const std::string& reason)
      : std::runtime_error(reason), code_(std::move(code)) {}
  const std::string& code() const { return code_; }

 private:
  std::string code_;
};

std::string encode_frame(const nlohmann::json& msg);

/// Incremental decoder for a byte stream.
class FrameDecoder {
 public:
  void feed(const char* data, std::size_t n) { buffer_.append(data, n); }
  /// Next complete message, if any. Throws ProtocolError on bad frames.
  std::optional<nlohmann::json> next();

 private:
  std::string buffer_;
};

/// Blocking socket I/O. write_frame returns false when the peer is gone.
bool write_frame(int fd, const nlohmann::json& msg);
/// Waits up to timeout_ms (negative: forever). Returns nullopt on timeout;
/// throws ProtocolError("closed") when the peer hung up.
std::optional<nlohmann::json> read_frame(int fd, FrameDecoder& dec, int timeout_ms);

/// Every message must carry the schema version and a type.
std::string message_type(const nlohmann::json& msg);

nlohmann::json master_input_message(const MasterSample& s);
MasterSample parse_master_input(const nlohmann::json& msg);

/// Step message: the record's columns as named fields.
nlohmann::json step_message(const std::vector<std::string>& columns,
                            const std::vector<double>& values);

nlohmann::json error_message(const std::string& code, const std::string& reason);

/// TCP helpers for loopback sessions.
int connect_tcp(const std::string& host, int port);

}  // namespace fic::sim
