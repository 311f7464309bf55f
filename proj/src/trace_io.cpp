// Copyright 2026 plateloop authors.
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

#include "plateloop/trace.hpp"

#include <cerrno>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>

namespace plateloop {

namespace {

void throw_io(const std::filesystem::path& path, const char* what) {
  throw std::runtime_error(std::string(what) + ": " + path.string());
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream is(path);
  if (!is) throw_io(path, "cannot open for reading");
  return is;
}

std::ofstream open_out(const std::filesystem::path& path) {
  std::ofstream os(path, std::ios::binary | std::ios::trunc);
  if (!os) throw_io(path, "cannot open for writing");
  return os;
}

void expect_header(std::istream& is, const char* expected) {
  std::string line;
  if (!std::getline(is, line)) {
    throw std::runtime_error("missing CSV header");
  }
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != expected) {
    throw std::runtime_error("unexpected CSV header: " + line);
  }
}

/// Parses exactly `count` comma-separated doubles starting at `p`.
const char* parse_doubles(const char* p, double* out, int count) {
  for (int k = 0; k < count; ++k) {
    if (k > 0) {
      if (*p != ',') return nullptr;
      ++p;
    }
    char* end = nullptr;
    errno = 0;
    out[k] = std::strtod(p, &end);
    if (end == p || errno == ERANGE) return nullptr;
    p = end;
  }
  return p;
}

}  // namespace

void write_controller_csv(std::ostream& os,
                          const std::vector<TraceRecord>& rows) {
  os << kControllerCsvHeader << '\n';
  char buf[320];
  for (const TraceRecord& r : rows) {
    const int len = std::snprintf(
        buf, sizeof buf, "%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f,%.9f\n",
        r.time_s, r.ref_x_m, r.ref_y_m, r.ball_x_m, r.ball_y_m, r.roll_rad,
        r.pitch_rad, r.u_x_v, r.u_y_v);
    os.write(buf, len);
  }
}

void write_controller_csv(const std::filesystem::path& path,
                          const std::vector<TraceRecord>& rows) {
  auto os = open_out(path);
  write_controller_csv(os, rows);
  os.flush();
  if (!os) throw_io(path, "write failed");
}

std::vector<TraceRecord> read_controller_csv(std::istream& is) {
  expect_header(is, kControllerCsvHeader);
  std::vector<TraceRecord> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    double v[9];
    if (parse_doubles(line.c_str(), v, 9) == nullptr) {
      throw std::runtime_error("malformed trace row: " + line);
    }
    rows.push_back(TraceRecord{v[0], v[1], v[2], v[3], v[4], v[5], v[6], v[7],
                               v[8]});
  }
  return rows;
}

std::vector<TraceRecord> read_controller_csv(
    const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_controller_csv(is);
}

void write_packets_csv(std::ostream& os,
                       const std::vector<netem::PacketRecord>& rows) {
  os << kPacketsCsvHeader << '\n';
  char buf[320];
  for (const netem::PacketRecord& r : rows) {
    const int len = std::snprintf(
        buf, sizeof buf, "%s,%llu,%zu,%.9f,%.9f,%d\n", r.flow_id.c_str(),
        static_cast<unsigned long long>(r.seq), r.size_bytes, r.send_time_s,
        r.deliver_time_s, r.attempts);
    os.write(buf, len);
  }
}

void write_packets_csv(const std::filesystem::path& path,
                       const std::vector<netem::PacketRecord>& rows) {
  auto os = open_out(path);
  write_packets_csv(os, rows);
  os.flush();
  if (!os) throw_io(path, "write failed");
}

std::vector<netem::PacketRecord> read_packets_csv(std::istream& is) {
  expect_header(is, kPacketsCsvHeader);
  std::vector<netem::PacketRecord> rows;
  std::string line;
  while (std::getline(is, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto comma = line.find(',');
    if (comma == std::string::npos) {
      throw std::runtime_error("malformed packet row: " + line);
    }
    netem::PacketRecord r;
    r.flow_id = line.substr(0, comma);
    double v[5];
    const char* rest = line.c_str() + comma + 1;
    if (parse_doubles(rest, v, 5) == nullptr) {
      throw std::runtime_error("malformed packet row: " + line);
    }
    r.seq = static_cast<std::uint64_t>(v[0]);
    r.size_bytes = static_cast<std::size_t>(v[1]);
    r.send_time_s = v[2];
    r.deliver_time_s = v[3];
    r.attempts = static_cast<int>(v[4]);
    rows.push_back(std::move(r));
  }
  return rows;
}

std::vector<netem::PacketRecord> read_packets_csv(
    const std::filesystem::path& path) {
  auto is = open_in(path);
  return read_packets_csv(is);
}

}  // namespace plateloop
