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

#include <cstdint>
#include <deque>
#include <random>
#include <stdexcept>
#include <vector>

namespace fic::sim {

/// Uniform double in [0, 1) from the top 53 bits of one engine draw. The
/// standard distributions are not bit-reproducible across library versions.
inline double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

struct ChannelStats {
  std::uint64_t sent = 0;
  std::uint64_t delivered = 0;
  std::uint64_t dropped = 0;
};

/// One direction of a lossy, delayed link. Messages become visible at
/// send time + latency + jitter, never before an earlier message, so
/// delivery order always equals send order.
template <typename T>
class DelayChannel {
 public:
  DelayChannel(double latency, double jitter, double drop_rate, std::uint64_t seed)
      : latency_(latency), jitter_(jitter), drop_rate_(drop_rate), rng_(seed) {
    if (latency < 0 || jitter < 0) throw std::invalid_argument("channel: negative delay");
    if (!(drop_rate >= 0.0 && drop_rate < 1.0)) {
      throw std::invalid_argument("channel: drop_rate must lie in [0, 1)");
    }
  }

  void send(const T& msg, double now) {
    ++stats_.sent;
    // Both draws happen for every message so the stream stays aligned.
    const double drop_draw = uniform01(rng_);
    const double jitter = jitter_ * uniform01(rng_);
    if (drop_draw < drop_rate_) {
      ++stats_.dropped;
      return;
    }
    double release = now + latency_ + jitter;
    if (!fifo_.empty() && release < fifo_.back().release) release = fifo_.back().release;
    fifo_.push_back({release, msg});
  }

  /// Messages due by `now`, in send order.
  std::vector<T> poll(double now) {
    std::vector<T> out;
    while (!fifo_.empty() && fifo_.front().release <= now + kTimeSlack) {
      out.push_back(std::move(fifo_.front().msg));
      fifo_.pop_front();
      ++stats_.delivered;
    }
    return out;
  }

  std::size_t depth() const { return fifo_.size(); }
  const ChannelStats& stats() const { return stats_; }

 private:
  // Absorbs rounding between "t + latency" and the tick clock.
  static constexpr double kTimeSlack = 1e-9;

  struct Entry {
    double release;
    T msg;
  };

  double latency_;
  double jitter_;
  double drop_rate_;
  std::mt19937_64 rng_;
  std::deque<Entry> fifo_;
  ChannelStats stats_;
};

}  // namespace fic::sim
