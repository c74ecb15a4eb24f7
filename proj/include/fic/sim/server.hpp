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

#pragma once

#include <atomic>
#include <functional>
#include <string>

#include "fic/sim/config.hpp"

namespace fic::sim {

struct ServeOptions {
  std::string host = "127.0.0.1";
  int port = 0;  // 0 picks a free port, reported through on_listening
  int decimation = 10;
  int heartbeat_ms = 500;
  std::size_t queue_capacity = 256;  // outbound messages held for a slow client
  int max_sessions = 0;              // 0: serve until stopped
  std::function<void(int port)> on_listening;
  const std::atomic<bool>* stop = nullptr;
};

/// Serves live sessions on a TCP socket, one client at a time. Each session
/// starts a fresh simulation at t = 0; with no client connected nothing
/// advances. Returns a process exit code.
///
/// Session: the client opens with
///   {type: "hello", schema_version, input: "live"|"script", lockstep, decimation}
/// and the server answers "welcome" with the column list. In lockstep the
/// simulation moves only on {type: "control", action: "advance", ticks}; each
/// advance is acknowledged with "advanced". Otherwise it runs at wall-clock
/// pace and honours pause/resume. Both modes accept "status" and "stop", and
/// stream "step" records every `decimation` ticks. A violation ends the
/// session with {type: "error", code, reason}.
int run_server(const ScenarioConfig& cfg, const ServeOptions& options);

}  // namespace fic::sim
