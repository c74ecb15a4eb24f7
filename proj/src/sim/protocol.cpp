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

#include "fic/sim/protocol.hpp"

#include <arpa/inet.h>
#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <unistd.h>

#include <cerrno>
#include <cstring>

#include "fic/sim/config.hpp"

namespace fic::sim {

using nlohmann::json;

std::string encode_frame(const json& msg) {
  const std::string body = msg.dump();
  if (body.size() > kMaxFrameBytes) throw std::length_error("message too large");
  const auto n = static_cast<std::uint32_t>(body.size());
  std::string out(4, '\0');
  out[0] = static_cast<char>((n >> 24) & 0xff);
  out[1] = static_cast<char>((n >> 16) & 0xff);
  out[2] = static_cast<char>((n >> 8) & 0xff);
  out[3] = static_cast<char>(n & 0xff);
  return out + body;
}

std::optional<json> FrameDecoder::next() {
  if (buffer_.size() < 4) return std::nullopt;
  const auto* b = reinterpret_cast<const unsigned char*>(buffer_.data());
  const std::uint32_t n = (std::uint32_t{b[0]} << 24) | (std::uint32_t{b[1]} << 16) |
                          (std::uint32_t{b[2]} << 8) | std::uint32_t{b[3]};
  if (n > kMaxFrameBytes) throw ProtocolError("bad_frame", "frame exceeds the size limit");
  if (buffer_.size() < 4 + static_cast<std::size_t>(n)) return std::nullopt;
  json msg;
  try {
    msg = json::parse(buffer_.begin() + 4, buffer_.begin() + 4 + n);
  } catch (const json::exception& e) {
    throw ProtocolError("bad_json", e.what());
  }
  buffer_.erase(0, 4 + static_cast<std::size_t>(n));
  if (!msg.is_object()) throw ProtocolError("bad_json", "message must be a JSON object");
  return msg;
}

bool write_frame(int fd, const json& msg) {
  const std::string f = encode_frame(msg);
  std::size_t off = 0;
  while (off < f.size()) {
    const ssize_t w = ::send(fd, f.data() + off, f.size() - off, MSG_NOSIGNAL);
    if (w < 0 && errno == EINTR) continue;
    if (w <= 0) return false;
    off += static_cast<std::size_t>(w);
  }
  return true;
}

std::optional<json> read_frame(int fd, FrameDecoder& dec, int timeout_ms) {
  for (;;) {
    if (auto m = dec.next()) return m;
    pollfd p{fd, POLLIN, 0};
    const int r = ::poll(&p, 1, timeout_ms);
    if (r < 0 && errno == EINTR) continue;
    if (r == 0) return std::nullopt;
    char buf[65536];
    const ssize_t n = ::recv(fd, buf, sizeof buf, 0);
    if (n < 0 && errno == EINTR) continue;
    if (n <= 0) throw ProtocolError("closed", "peer closed the connection");
    dec.feed(buf, static_cast<std::size_t>(n));
  }
}

std::string message_type(const json& msg) {
  if (!msg.contains("schema_version")) {
    throw ProtocolError("schema_missing", "message lacks schema_version");
  }
  if (!msg["schema_version"].is_number_integer() || msg["schema_version"] != kSchemaVersion) {
    throw ProtocolError("schema_mismatch", "unsupported schema_version");
  }
  if (!msg.contains("type") || !msg["type"].is_string()) {
    throw ProtocolError("bad_field", "message lacks a type");
  }
  return msg["type"].get<std::string>();
}

json master_input_message(const MasterSample& s) {
  const auto x = s.x_m.to_array();
  return {{"type", "master_input"},
          {"schema_version", kSchemaVersion},
          {"t", s.t},
          {"mode", mode_name(s.mode)},
          {"x_M", x},
          {"v_M", {s.v_m.angular(0), s.v_m.angular(1), s.v_m.angular(2), s.v_m.linear(0),
                   s.v_m.linear(1), s.v_m.linear(2)}},
          {"K_H", s.k_h}};
}

namespace {

std::vector<double> numbers(const json& msg, const char* key, std::size_t n) {
  if (!msg.contains(key) || !msg[key].is_array() || msg[key].size() != n) {
    throw ProtocolError("bad_field", std::string(key) + " must be an array of " +
                                         std::to_string(n) + " numbers");
  }
  std::vector<double> v;
  for (const json& e : msg[key]) {
    if (!e.is_number()) throw ProtocolError("bad_field", std::string(key) + " has a non-number");
    v.push_back(e.get<double>());
  }
  return v;
}

double number(const json& msg, const char* key) {
  if (!msg.contains(key) || !msg[key].is_number()) {
    throw ProtocolError("bad_field", std::string(key) + " must be a number");
  }
  return msg[key].get<double>();
}

}  // namespace

MasterSample parse_master_input(const json& msg) {
  MasterSample s;
  s.t = number(msg, "t");
  if (!msg.contains("mode") || !msg["mode"].is_string()) {
    throw ProtocolError("bad_field", "mode must be a string");
  }
  try {
    s.mode = parse_mode(msg["mode"].get<std::string>());
    s.x_m = Pose::from_array(numbers(msg, "x_M", 7));
  } catch (const std::invalid_argument& e) {
    throw ProtocolError("bad_field", e.what());
  }
  const auto v = numbers(msg, "v_M", 6);
  s.v_m = Twist{Vec3(v[0], v[1], v[2]), Vec3(v[3], v[4], v[5])};
  s.k_h = number(msg, "K_H");
  return s;
}

json step_message(const std::vector<std::string>& columns, const std::vector<double>& values) {
  json m{{"type", "step"}, {"schema_version", kSchemaVersion}};
  for (std::size_t i = 0; i < columns.size(); ++i) m[columns[i]] = values[i];
  return m;
}

json error_message(const std::string& code, const std::string& reason) {
  return {{"type", "error"}, {"schema_version", kSchemaVersion}, {"code", code},
          {"reason", reason}};
}

int connect_tcp(const std::string& host, int port) {
  const int fd = ::socket(AF_INET, SOCK_STREAM, 0);
  if (fd < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(port));
  if (::inet_pton(AF_INET, host.c_str(), &addr.sin_addr) != 1) {
    ::close(fd);
    throw std::invalid_argument("bad IPv4 address " + host);
  }
  if (::connect(fd, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0) {
    const std::string err = std::strerror(errno);
    ::close(fd);
    throw std::runtime_error("connect: " + err);
  }
  const int one = 1;
  ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
  return fd;
}

}  // namespace fic::sim
