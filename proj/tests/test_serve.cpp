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

#include <unistd.h>

#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <future>
#include <map>
#include <sstream>
#include <thread>

#include "doctest.h"
#include "fic/sim/config.hpp"
#include "fic/sim/protocol.hpp"
#include "fic/sim/scenario.hpp"
#include "fic/sim/server.hpp"
#include "fic/sim/trace.hpp"

using namespace fic;
using namespace fic::sim;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

const fs::path kScenarios = FIC_SCENARIO_DIR;

fs::path scratch(const std::string& name) {
  const fs::path p = fs::temp_directory_path() /
                     ("fic_serve_" + std::to_string(::getpid())) / name;
  fs::remove_all(p);
  fs::create_directories(p);
  return p;
}

ScenarioConfig step_config(double duration, const fs::path& script = {}) {
  std::ifstream in(kScenarios / "step.cfg");
  std::stringstream s;
  s << in.rdbuf();
  std::string text = s.str();
  text.replace(text.find("duration: 3.0"), 13, "duration: " + std::to_string(duration));
  if (!script.empty()) {
    text.replace(text.find("scripts/step.csv"), 16, script.string());
  }
  return parse_config(text, kScenarios);
}

// Server on an ephemeral port for the duration of a test.
class Server {
 public:
  explicit Server(const ScenarioConfig& cfg, int sessions = 1) {
    std::promise<int> port;
    auto ready = port.get_future();
    ServeOptions opt;
    opt.max_sessions = sessions;
    opt.heartbeat_ms = 100;
    opt.stop = &stop_;
    opt.on_listening = [&port](int p) { port.set_value(p); };
    thread_ = std::thread([cfg, opt] { run_server(cfg, opt); });
    port_ = ready.get();
  }
  ~Server() {
    stop_ = true;
    thread_.join();
  }
  int port() const { return port_; }

 private:
  std::atomic<bool> stop_{false};
  std::thread thread_;
  int port_ = 0;
};

class Client {
 public:
  explicit Client(int port) : fd_(connect_tcp("127.0.0.1", port)) {}
  ~Client() { ::close(fd_); }

  void send(json msg) {
    if (!msg.contains("schema_version")) msg["schema_version"] = kSchemaVersion;
    REQUIRE(write_frame(fd_, msg));
  }
  void send_raw(const std::string& bytes) {
    REQUIRE(::write(fd_, bytes.data(), bytes.size()) == static_cast<ssize_t>(bytes.size()));
  }
  // Next message that is not a heartbeat.
  json next() {
    for (;;) {
      auto m = read_frame(fd_, dec_, 5000);
      REQUIRE(m.has_value());
      if ((*m)["type"] != "heartbeat") return *m;
    }
  }
  json expect(const std::string& type) {
    json m = next();
    REQUIRE_MESSAGE(m["type"] == type, m.dump());
    return m;
  }
  json hello(const std::string& input, bool lockstep, int decimation) {
    send({{"type", "hello"}, {"input", input}, {"lockstep", lockstep}, {"decimation", decimation}});
    return expect("welcome");
  }
  void control(const std::string& action, long ticks = 0) {
    json m = {{"type", "control"}, {"action", action}};
    if (ticks > 0) m["ticks"] = ticks;
    send(m);
  }
  // Advances and collects the step messages until "advanced".
  std::vector<json> advance(long ticks) {
    control("advance", ticks);
    std::vector<json> steps;
    for (;;) {
      json m = next();
      if (m["type"] == "advanced") return steps;
      REQUIRE_MESSAGE(m["type"] == "step", m.dump());
      steps.push_back(m);
    }
  }

 private:
  int fd_;
  FrameDecoder dec_;
};

MasterSample sample(double t, MasterModeKind mode, const Vec3& p) {
  MasterSample s;
  s.t = t;
  s.mode = mode;
  s.x_m = Pose::from_translation(p);
  return s;
}

}  // namespace

TEST_CASE("frames round trip whole and byte by byte") {
  const json a = {{"type", "x"}, {"schema_version", 1}, {"v", {1.5, -2.25e-17, 3}}};
  const json b = {{"type", "y"}, {"schema_version", 1}, {"s", std::string(70000, 'q')}};
  const std::string bytes = encode_frame(a) + encode_frame(b);
  CHECK(static_cast<unsigned char>(bytes[0]) == 0);
  CHECK(bytes.size() == 8 + a.dump().size() + b.dump().size());

  FrameDecoder whole;
  whole.feed(bytes.data(), bytes.size());
  CHECK(whole.next() == a);
  CHECK(whole.next() == b);
  CHECK_FALSE(whole.next().has_value());

  FrameDecoder trickle;
  std::vector<json> got;
  for (char c : bytes) {
    trickle.feed(&c, 1);
    while (auto m = trickle.next()) got.push_back(*m);
  }
  REQUIRE(got.size() == 2);
  CHECK(got[0] == a);
  CHECK(got[1] == b);
}

TEST_CASE("bad frames raise coded protocol errors") {
  auto code_of = [](const std::string& bytes) {
    FrameDecoder d;
    d.feed(bytes.data(), bytes.size());
    try {
      d.next();
    } catch (const ProtocolError& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(code_of(std::string("\x7f\x00\x00\x00", 4)) == "bad_frame");
  CHECK(code_of(std::string("\x00\x00\x00\x03{x}", 7)) == "bad_json");
  CHECK(code_of(std::string("\x00\x00\x00\x02[]", 6)) == "bad_json");

  auto type_code = [](const json& m) {
    try {
      message_type(m);
    } catch (const ProtocolError& e) {
      return e.code();
    }
    return std::string("none");
  };
  CHECK(type_code({{"type", "hello"}}) == "schema_missing");
  CHECK(type_code({{"type", "hello"}, {"schema_version", 2}}) == "schema_mismatch");
  CHECK(type_code({{"schema_version", 1}}) == "bad_field");
  CHECK(type_code({{"type", "hello"}, {"schema_version", 1}}) == "none");
}

TEST_CASE("master input messages round trip and reject malformed fields") {
  MasterSample s = sample(0.125, MasterModeKind::Velocity, Vec3(0.01, -0.02, 0.03));
  s.v_m.linear = Vec3(0.1, 0.2, 0.3);
  s.v_m.angular = Vec3(-0.1, 0.0, 0.5);
  s.k_h = 0.4;
  const MasterSample r = parse_master_input(master_input_message(s));
  CHECK(r.t == s.t);
  CHECK(r.mode == s.mode);
  CHECK(r.x_m.translation == s.x_m.translation);
  CHECK(r.v_m.linear == s.v_m.linear);
  CHECK(r.v_m.angular == s.v_m.angular);
  CHECK(r.k_h == s.k_h);

  json bad = master_input_message(s);
  bad["x_M"] = {1, 0, 0};
  CHECK_THROWS_AS(parse_master_input(bad), ProtocolError);
  bad = master_input_message(s);
  bad.erase("K_H");
  CHECK_THROWS_AS(parse_master_input(bad), ProtocolError);
  bad = master_input_message(s);
  bad["mode"] = "sideways";
  CHECK_THROWS(parse_master_input(bad));
}

TEST_CASE("with no client nothing advances; each session starts at t = 0") {
  Server server(step_config(1.0), 2);
  std::this_thread::sleep_for(std::chrono::milliseconds(300));
  {
    Client c(server.port());
    const json w = c.hello("script", true, 10);
    CHECK(w["ticks"] == 1000);
    CHECK(w["columns"].front() == "tick");
    std::this_thread::sleep_for(std::chrono::milliseconds(300));
    c.control("status");
    json st = c.expect("status");
    CHECK(st["tick"] == 0);
    CHECK(st["t"] == 0.0);
    const auto steps = c.advance(25);
    CHECK(steps.size() == 3);  // ticks 0, 10, 20
    c.control("status");
    CHECK(c.expect("status")["tick"] == 25);
  }
  Client again(server.port());
  again.hello("script", true, 10);
  again.control("status");
  CHECK(again.expect("status")["tick"] == 0);
  again.control("stop");
  CHECK(again.expect("end")["tick"] == 0);
}

TEST_CASE("a mode toggle shows in the next tick's record") {
  Server server(step_config(1.0));
  Client c(server.port());
  c.hello("live", true, 1);
  c.send(master_input_message(sample(0.0, MasterModeKind::Position, Vec3::Zero())));
  auto steps = c.advance(5);
  REQUIRE(steps.size() == 5);
  for (const json& s : steps) CHECK(s["m_mode"] == 0.0);

  c.send(master_input_message(sample(0.005, MasterModeKind::Velocity, Vec3::Zero())));
  steps = c.advance(1);
  REQUIRE(steps.size() == 1);
  CHECK(steps[0]["tick"] == 5.0);
  CHECK(steps[0]["m_mode"] == 1.0);
}

TEST_CASE("100 Hz live circle reproduces the scripted run") {
  const fs::path dir = scratch("circle");
  std::vector<MasterSample> circle;
  for (int k = 0; k <= 100; ++k) {
    const double t = k * 0.01;
    const double a = 2.0 * M_PI * t;
    circle.push_back(sample(t, MasterModeKind::Position,
                            Vec3(0.02 * (std::cos(a) - 1.0), 0.0, 0.02 * std::sin(a))));
  }
  write_master_csv(dir / "circle.csv", circle);
  const ScenarioConfig cfg = step_config(1.0, dir / "circle.csv");
  const Trace scripted = read_trace(run_scenario(cfg, dir).trace);
  REQUIRE(scripted.rows.size() == 1000);

  Server server(cfg);
  Client c(server.port());
  c.hello("live", true, 1);
  std::vector<json> live;
  for (int k = 0; k < 100; ++k) {
    c.send(master_input_message(circle[k]));
    for (json& s : c.advance(10)) live.push_back(std::move(s));
  }
  c.expect("end");
  REQUIRE(live.size() == scripted.rows.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < live.size(); ++i) {
    for (std::size_t j = 0; j < scripted.columns.size(); ++j) {
      const double v = live[i][scripted.columns[j]].get<double>();
      worst = std::max(worst, std::abs(v - scripted.rows[i][j]));
    }
  }
  CHECK(worst <= 1e-9);
}

TEST_CASE("live input in a scripted session ends it with input_conflict") {
  Server server(step_config(1.0));
  Client c(server.port());
  c.hello("script", true, 10);
  c.send(master_input_message(sample(0.0, MasterModeKind::Position, Vec3::Zero())));
  const json e = c.expect("error");
  CHECK(e["code"] == "input_conflict");
}

TEST_CASE("handshake and ordering violations are reported by code") {
  auto first_error = [](const std::function<void(Client&)>& act) {
    Server server(step_config(1.0));
    Client c(server.port());
    act(c);
    const json e = c.expect("error");
    return e["code"].get<std::string>();
  };
  CHECK(first_error([](Client& c) { c.control("advance", 1); }) == "handshake");
  CHECK(first_error([](Client& c) {
          c.send_raw(encode_frame({{"type", "hello"}}));
        }) == "schema_missing");
  CHECK(first_error([](Client& c) {
          c.send({{"type", "hello"}, {"input", "psychic"}});
        }) == "bad_field");
  CHECK(first_error([](Client& c) {
          c.hello("live", true, 1);
          c.send(master_input_message(sample(0.1, MasterModeKind::Position, Vec3::Zero())));
          c.send(master_input_message(sample(0.1, MasterModeKind::Position, Vec3::Zero())));
        }) == "time_order");
  CHECK(first_error([](Client& c) {
          c.hello("live", true, 1);
          c.send({{"type", "teleport"}});
        }) == "unknown_type");
  CHECK(first_error([](Client& c) {
          c.hello("live", true, 1);
          c.send_raw(std::string("\x00\x00\x00\x01{", 5));
        }) == "bad_json");
  CHECK(first_error([](Client& c) {
          c.hello("script", false, 10);
          c.control("advance", 1);
        }) == "bad_field");
}

TEST_CASE("real-time session streams, pauses and stops") {
  Server server(step_config(3.0));
  Client c(server.port());
  c.hello("script", false, 20);
  double last_tick = -1.0;
  for (int i = 0; i < 5; ++i) {
    const json s = c.expect("step");
    CHECK(s["tick"].get<double>() > last_tick);
    CHECK(std::fmod(s["tick"].get<double>(), 20.0) == 0.0);
    last_tick = s["tick"].get<double>();
  }
  c.control("pause");
  std::this_thread::sleep_for(std::chrono::milliseconds(100));
  c.control("status");
  json st;
  do st = c.next(); while (st["type"] != "status");
  CHECK(st["paused"] == true);
  const long held = st["tick"].get<long>();
  std::this_thread::sleep_for(std::chrono::milliseconds(200));
  c.control("status");
  do st = c.next(); while (st["type"] != "status");
  CHECK(st["tick"].get<long>() == held);

  c.control("resume");
  c.control("stop");
  json m;
  do m = c.next(); while (m["type"] != "end");
  CHECK(m["tick"].get<long>() >= held);
}
