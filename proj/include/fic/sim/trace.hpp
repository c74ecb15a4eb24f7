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

#include <cstdio>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"

namespace fic::sim {

/// Unreadable, truncated or inconsistent trace.
class TraceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Streams rows to a CSV file. The JSON sidecar is written by close(), with
/// the final row count, so a trace without a matching sidecar is incomplete.
class TraceWriter {
 public:
  TraceWriter(const std::filesystem::path& csv, std::vector<std::string> columns,
              nlohmann::json sidecar);
  ~TraceWriter();
  TraceWriter(const TraceWriter&) = delete;
  TraceWriter& operator=(const TraceWriter&) = delete;

  void write(const std::vector<double>& row);
  void close();

 private:
  void flush_buffer();

  std::filesystem::path csv_;
  std::vector<std::string> columns_;
  nlohmann::json sidecar_;
  std::FILE* file_ = nullptr;
  std::string buffer_;
  long rows_ = 0;
};

struct Trace {
  std::vector<std::string> columns;
  std::vector<std::vector<double>> rows;
  nlohmann::json sidecar;

  /// Index of a column, or -1.
  int column(const std::string& name) const;
  std::vector<double> series(const std::string& name) const;
};

std::filesystem::path sidecar_path(const std::filesystem::path& csv);

/// Loads a trace and checks it against its sidecar.
Trace read_trace(const std::filesystem::path& csv);

}  // namespace fic::sim
