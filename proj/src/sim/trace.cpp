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

#include "fic/sim/trace.hpp"

#include <fstream>
#include <sstream>

#include "fic/sim/config.hpp"
#include "fic/sim/numfmt.hpp"

namespace fic::sim {

namespace fs = std::filesystem;

fs::path sidecar_path(const fs::path& csv) {
  fs::path p = csv;
  p.replace_extension(".json");
  return p;
}

TraceWriter::TraceWriter(const fs::path& csv, std::vector<std::string> columns,
                         nlohmann::json sidecar)
    : csv_(csv), columns_(std::move(columns)), sidecar_(std::move(sidecar)) {
  // A stale sidecar would make a half-written CSV look complete.
  std::error_code ec;
  fs::remove(sidecar_path(csv_), ec);
  file_ = std::fopen(csv_.c_str(), "wb");
  if (!file_) throw std::runtime_error("cannot write trace " + csv_.string());
  for (std::size_t i = 0; i < columns_.size(); ++i) {
    if (i) buffer_ += ',';
    buffer_ += columns_[i];
  }
  buffer_ += '\n';
}

TraceWriter::~TraceWriter() {
  if (file_) std::fclose(file_);
}

void TraceWriter::flush_buffer() {
  if (!buffer_.empty() && std::fwrite(buffer_.data(), 1, buffer_.size(), file_) != buffer_.size()) {
    throw std::runtime_error("short write on " + csv_.string());
  }
  buffer_.clear();
}

void TraceWriter::write(const std::vector<double>& row) {
  if (!file_) throw std::logic_error("trace already closed");
  if (row.size() != columns_.size()) throw std::logic_error("trace row width mismatch");
  for (std::size_t i = 0; i < row.size(); ++i) {
    if (i) buffer_ += ',';
    append_double(buffer_, row[i]);
  }
  buffer_ += '\n';
  ++rows_;
  if (buffer_.size() > (1u << 20)) flush_buffer();
}

void TraceWriter::close() {
  if (!file_) return;
  flush_buffer();
  std::fclose(file_);
  file_ = nullptr;
  sidecar_["rows"] = rows_;
  sidecar_["columns"] = columns_;
  std::ofstream out(sidecar_path(csv_), std::ios::binary);
  out << sidecar_.dump(2) << '\n';
  if (!out) throw std::runtime_error("cannot write trace sidecar for " + csv_.string());
}

int Trace::column(const std::string& name) const {
  for (std::size_t i = 0; i < columns.size(); ++i) {
    if (columns[i] == name) return static_cast<int>(i);
  }
  return -1;
}

std::vector<double> Trace::series(const std::string& name) const {
  const int c = column(name);
  if (c < 0) throw TraceError("trace has no column " + name);
  std::vector<double> out;
  out.reserve(rows.size());
  for (const auto& r : rows) out.push_back(r[c]);
  return out;
}

Trace read_trace(const fs::path& csv) {
  std::ifstream in(csv, std::ios::binary);
  if (!in) throw TraceError("cannot open trace " + csv.string());
  std::stringstream ss;
  ss << in.rdbuf();
  const std::string text = ss.str();
  if (text.empty() || text.back() != '\n') {
    throw TraceError(csv.string() + ": truncated (no final newline)");
  }

  std::ifstream side(sidecar_path(csv));
  if (!side) throw TraceError(csv.string() + ": missing sidecar " + sidecar_path(csv).string());
  Trace t;
  try {
    t.sidecar = nlohmann::json::parse(side);
  } catch (const nlohmann::json::exception& e) {
    throw TraceError(sidecar_path(csv).string() + ": " + e.what());
  }
  if (!t.sidecar.contains("schema_version") || t.sidecar["schema_version"] != kSchemaVersion) {
    throw TraceError(csv.string() + ": unsupported or missing schema_version");
  }

  std::size_t pos = 0;
  auto next_line = [&](std::string_view& line) {
    if (pos >= text.size()) return false;
    const std::size_t end = text.find('\n', pos);
    line = std::string_view(text).substr(pos, end - pos);
    pos = end + 1;
    return true;
  };
  std::string_view line;
  next_line(line);
  for (std::size_t a = 0; a <= line.size();) {
    const std::size_t b = std::min(line.find(',', a), line.size());
    t.columns.emplace_back(line.substr(a, b - a));
    a = b + 1;
  }
  if (!t.sidecar.contains("columns") ||
      t.sidecar["columns"].get<std::vector<std::string>>() != t.columns) {
    throw TraceError(csv.string() + ": header does not match the sidecar columns");
  }
  long lineno = 1;
  while (next_line(line)) {
    ++lineno;
    std::vector<double> row;
    row.reserve(t.columns.size());
    for (std::size_t a = 0; a <= line.size();) {
      const std::size_t b = std::min(line.find(',', a), line.size());
      try {
        row.push_back(parse_double(line.substr(a, b - a)));
      } catch (const std::invalid_argument& e) {
        throw TraceError(csv.string() + ":" + std::to_string(lineno) + ": " + e.what());
      }
      a = b + 1;
    }
    if (row.size() != t.columns.size()) {
      throw TraceError(csv.string() + ":" + std::to_string(lineno) + ": wrong number of fields");
    }
    t.rows.push_back(std::move(row));
  }
  if (!t.sidecar.contains("rows") || t.sidecar["rows"].get<long>() != lineno - 1) {
    throw TraceError(csv.string() + ": truncated (row count differs from the sidecar)");
  }
  return t;
}

}  // namespace fic::sim
