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

#include "fic/sim/server.hpp"

#include <netinet/in.h>
#include <netinet/tcp.h>
#include <poll.h>
#include <sys/socket.h>
#include <arpa/inet.h>
#include <unistd.h>

#include <chrono>
#include <cstring>
#include <deque>
#include <iostream>
#include <mutex>
#include <thread>

#include "fic/sim/protocol.hpp"
#include "fic/sim/scenario.hpp"

namespace fic::sim {

using nlohmann::json;
using Clock = std::chrono::steady_clock;

namespace {

json tagged(json m) {
  m["schema_version"] = kSchemaVersion;
  return m;
}

struct SessionSetup {
  bool lockstep = false;
  bool live = true;
  int decimation = 10;
};

SessionSetup read_hello(int fd, FrameDecoder& dec, const ScenarioConfig& cfg,
                        const ServeOptions& opt) {
  const auto hello = read_frame(fd, dec, 5000);
  if (!hello) throw ProtocolError("handshake", "no hello within 5 s");
  if (message_type(*hello) != "hello") throw ProtocolError("handshake", "expected hello first");
  SessionSetup s;
  s.decimation = opt.decimation;
  s.live = cfg.master.script.empty();
  if (hello->contains("input")) {
    const json& in = (*hello)["input"];
    if (in == "live") s.live = true;
    else if (in == "script") s.live = false;
    else throw ProtocolError("bad_field", "input must be live or script");
  }
  if (!s.live && cfg.master.script.empty()) {
    throw ProtocolError("no_script", "scenario has no master script");
  }
  if (hello->contains("lockstep")) {
    if (!(*hello)["lockstep"].is_boolean()) throw ProtocolError("bad_field", "lockstep is a bool");
    s.lockstep = (*hello)["lockstep"].get<bool>();
  }
  if (hello->contains("decimation")) {
    const json& d = (*hello)["decimation"];
    if (!d.is_number_integer() || d.get<int>() < 1) {
      throw ProtocolError("bad_field", "decimation must be a positive integer");
    }
    s.decimation = d.get<int>();
  }
  return s;
}

json welcome(const Simulation& sim, const SessionSetup& s) {
  return tagged({{"type", "welcome"},
                 {"scenario", sim.config().name},
                 {"dt", sim.config().dt},
                 {"ticks", sim.config().total_ticks()},
                 {"columns", sim.columns()},
                 {"phase_labels", sim.phase_labels()},
                 {"decimation", s.decimation},
                 {"input", s.live ? "live" : "script"},
                 {"lockstep", s.lockstep}});
}

std::string control_action(const json& msg) {
  if (!msg.contains("action") || !msg["action"].is_string()) {
    throw ProtocolError("bad_field", "control needs an action");
  }
  return msg["action"].get<std::string>();
}

// Checks a live sample against the session and the previous one.
MasterSample accept_input(const json& msg, const SessionSetup& s, double& last_t) {
  if (!s.live) throw ProtocolError("input_conflict", "session replays the scenario script");
  MasterSample in = parse_master_input(msg);
  if (!(in.t > last_t)) throw ProtocolError("time_order", "master_input times must increase");
  last_t = in.t;
  return in;
}

json end_message(const Simulation& sim) {
  return tagged({{"type", "end"}, {"tick", sim.tick()}, {"t", sim.time()}});
}

json step_of(const Simulation& sim, std::vector<double>& row) {
  row.clear();
  flatten(sim.last(), row);
  return step_message(sim.columns(), row);
}

void lockstep_session(int fd, FrameDecoder& dec, Simulation& sim, const SessionSetup& s,
                      const ServeOptions& opt) {
  std::vector<double> row;
  double last_t = -1.0;
  for (;;) {
    if (opt.stop && opt.stop->load()) return;
    const auto msg = read_frame(fd, dec, opt.heartbeat_ms);
    if (!msg) {
      write_frame(fd, tagged({{"type", "heartbeat"}, {"tick", sim.tick()}, {"paused", true}}));
      continue;
    }
    const std::string type = message_type(*msg);
    if (type == "master_input") {
      sim.push_input(accept_input(*msg, s, last_t));
    } else if (type == "control") {
      const std::string action = control_action(*msg);
      if (action == "advance") {
        long n = 1;
        if (msg->contains("ticks")) {
          if (!(*msg)["ticks"].is_number_integer() || (*msg)["ticks"].get<long>() < 1) {
            throw ProtocolError("bad_field", "ticks must be a positive integer");
          }
          n = (*msg)["ticks"].get<long>();
        }
        for (long i = 0; i < n && !sim.done(); ++i) {
          sim.step();
          if (sim.last().tick % s.decimation == 0 && !write_frame(fd, step_of(sim, row))) return;
        }
        write_frame(fd, tagged({{"type", "advanced"}, {"tick", sim.tick()}, {"t", sim.time()}}));
        if (sim.done()) {
          write_frame(fd, end_message(sim));
          return;
        }
      } else if (action == "status") {
        write_frame(fd, tagged({{"type", "status"}, {"tick", sim.tick()}, {"t", sim.time()},
                                {"paused", true}}));
      } else if (action == "stop") {
        write_frame(fd, end_message(sim));
        return;
      } else if (action != "pause" && action != "resume") {
        throw ProtocolError("bad_field", "unknown control action " + action);
      }
    } else {
      throw ProtocolError("unknown_type", "unexpected message type " + type);
    }
  }
}

// State shared by the real-time loop thread and the session thread.
struct Shared {
  std::mutex mu;
  std::deque<MasterSample> inbox;
  std::deque<json> outbox;
  std::size_t capacity = 256;
  std::uint64_t dropped = 0;
  bool paused = false;
  bool stop = false;
  bool finished = false;
  long tick = 0;
  double t = 0.0;

  void post(json m) {
    if (outbox.size() >= capacity) {
      outbox.pop_front();
      ++dropped;
    }
    outbox.push_back(std::move(m));
  }
};

void realtime_loop(Simulation& sim, Shared& sh, int decimation) {
  std::vector<double> row;
  auto epoch = Clock::now();
  long epoch_tick = 0;
  for (;;) {
    bool paused;
    {
      std::lock_guard<std::mutex> lk(sh.mu);
      if (sh.stop) return;
      while (!sh.inbox.empty()) {
        sim.push_input(sh.inbox.front());
        sh.inbox.pop_front();
      }
      paused = sh.paused;
    }
    if (paused) {
      epoch_tick = -1;  // re-anchor the pace on resume
      std::this_thread::sleep_for(std::chrono::milliseconds(5));
      continue;
    }
    if (epoch_tick < 0) {
      epoch = Clock::now();
      epoch_tick = sim.tick();
    }
    json step;
    json tail;
    try {
      sim.step();
      if (sim.last().tick % decimation == 0) step = step_of(sim, row);
      if (sim.done()) tail = end_message(sim);
    } catch (const NumericalAbort& e) {
      tail = error_message("numerical_abort", e.what());
    }
    {
      std::lock_guard<std::mutex> lk(sh.mu);
      sh.tick = sim.tick();
      sh.t = sim.time();
      if (!step.is_null()) sh.post(std::move(step));
      if (!tail.is_null()) {
        sh.post(std::move(tail));
        sh.finished = true;
        return;
      }
    }
    const auto due = epoch + std::chrono::duration<double>(
                                 static_cast<double>(sim.tick() - epoch_tick) * sim.config().dt);
    std::this_thread::sleep_until(std::chrono::time_point_cast<Clock::duration>(due));
  }
}

void realtime_session(int fd, FrameDecoder& dec, Simulation& sim, const SessionSetup& s,
                      const ServeOptions& opt) {
  Shared sh;
  sh.capacity = opt.queue_capacity;
  std::thread loop(realtime_loop, std::ref(sim), std::ref(sh), s.decimation);
  auto stop_loop = [&] {
    {
      std::lock_guard<std::mutex> lk(sh.mu);
      sh.stop = true;
    }
    if (loop.joinable()) loop.join();
  };
  try {
    double last_t = -1.0;
    auto last_beat = Clock::now();
    for (;;) {
      if (opt.stop && opt.stop->load()) break;
      std::deque<json> out;
      bool finished;
      {
        std::lock_guard<std::mutex> lk(sh.mu);
        out.swap(sh.outbox);
        finished = sh.finished;
      }
      for (const json& m : out) {
        if (!write_frame(fd, m)) throw ProtocolError("closed", "peer closed the connection");
      }
      if (finished) break;
      if (Clock::now() - last_beat > std::chrono::milliseconds(opt.heartbeat_ms)) {
        last_beat = Clock::now();
        json beat;
        {
          std::lock_guard<std::mutex> lk(sh.mu);
          beat = tagged({{"type", "heartbeat"}, {"tick", sh.tick}, {"t", sh.t},
                         {"paused", sh.paused}, {"dropped", sh.dropped}});
        }
        write_frame(fd, beat);
      }
      const auto msg = read_frame(fd, dec, 2);
      if (!msg) continue;
      const std::string type = message_type(*msg);
      std::lock_guard<std::mutex> lk(sh.mu);
      if (type == "master_input") {
        sh.inbox.push_back(accept_input(*msg, s, last_t));
      } else if (type == "control") {
        const std::string action = control_action(*msg);
        if (action == "pause") sh.paused = true;
        else if (action == "resume") sh.paused = false;
        else if (action == "status") {
          sh.post(tagged({{"type", "status"}, {"tick", sh.tick}, {"t", sh.t},
                          {"paused", sh.paused}}));
        } else if (action == "stop") {
          sh.stop = true;
          break;
        } else if (action == "advance") {
          throw ProtocolError("bad_field", "advance needs a lockstep session");
        } else {
          throw ProtocolError("bad_field", "unknown control action " + action);
        }
      } else {
        throw ProtocolError("unknown_type", "unexpected message type " + type);
      }
    }
  } catch (...) {
    stop_loop();
    throw;
  }
  stop_loop();
  if (!sh.finished) write_frame(fd, end_message(sim));
}

void serve_client(int fd, const ScenarioConfig& cfg, const ServeOptions& opt) {
  FrameDecoder dec;
  try {
    const SessionSetup s = read_hello(fd, dec, cfg, opt);
    Simulation sim(cfg, s.live ? InputSource::Live : InputSource::Script);
    write_frame(fd, welcome(sim, s));
    if (s.lockstep) {
      lockstep_session(fd, dec, sim, s, opt);
    } else {
      realtime_session(fd, dec, sim, s, opt);
    }
  } catch (const ProtocolError& e) {
    if (e.code() != "closed") write_frame(fd, error_message(e.code(), e.what()));
  } catch (const NumericalAbort& e) {
    write_frame(fd, error_message("numerical_abort", e.what()));
  } catch (const ConfigError& e) {
    write_frame(fd, error_message("config", e.what()));
  } catch (const std::invalid_argument& e) {
    write_frame(fd, error_message("bad_field", e.what()));
  }
}

}  // namespace

int run_server(const ScenarioConfig& cfg, const ServeOptions& opt) {
  const int srv = ::socket(AF_INET, SOCK_STREAM, 0);
  if (srv < 0) throw std::runtime_error("socket: " + std::string(std::strerror(errno)));
  const int one = 1;
  ::setsockopt(srv, SOL_SOCKET, SO_REUSEADDR, &one, sizeof one);
  sockaddr_in addr{};
  addr.sin_family = AF_INET;
  addr.sin_port = htons(static_cast<std::uint16_t>(opt.port));
  if (::inet_pton(AF_INET, opt.host.c_str(), &addr.sin_addr) != 1) {
    ::close(srv);
    throw std::invalid_argument("bad IPv4 address " + opt.host);
  }
  if (::bind(srv, reinterpret_cast<sockaddr*>(&addr), sizeof addr) != 0 ||
      ::listen(srv, 4) != 0) {
    const std::string err = std::strerror(errno);
    ::close(srv);
    throw std::runtime_error("cannot listen on port " + std::to_string(opt.port) + ": " + err);
  }
  socklen_t len = sizeof addr;
  ::getsockname(srv, reinterpret_cast<sockaddr*>(&addr), &len);
  if (opt.on_listening) opt.on_listening(ntohs(addr.sin_port));

  int sessions = 0;
  while (opt.max_sessions == 0 || sessions < opt.max_sessions) {
    if (opt.stop && opt.stop->load()) break;
    pollfd p{srv, POLLIN, 0};
    if (::poll(&p, 1, 100) <= 0) continue;
    const int fd = ::accept(srv, nullptr, nullptr);
    if (fd < 0) continue;
    ::setsockopt(fd, IPPROTO_TCP, TCP_NODELAY, &one, sizeof one);
    serve_client(fd, cfg, opt);
    ::close(fd);
    ++sessions;
  }
  ::close(srv);
  return 0;
}

}  // namespace fic::sim
