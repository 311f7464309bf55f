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

#pragma once

#include <filesystem>
#include <iosfwd>
#include <vector>

#include "plateloop/netem.hpp"

namespace plateloop {

/// One controller update: reference, measured plant state as seen by the
/// controller, and the commanded voltages. roll_rad is the plate angle acting
/// on the X axis, pitch_rad the one acting on the Y axis.
struct TraceRecord {
  double time_s = 0.0;
  double ref_x_m = 0.0;
  double ref_y_m = 0.0;
  double ball_x_m = 0.0;
  double ball_y_m = 0.0;
  double roll_rad = 0.0;
  double pitch_rad = 0.0;
  double u_x_v = 0.0;
  double u_y_v = 0.0;
};

// CSV round-trip for the two trace kinds. Fixed column order, 9 decimal
// digits on every real column.
inline constexpr char kControllerCsvHeader[] =
    "time_s,ref_x_m,ref_y_m,ball_x_m,ball_y_m,roll_rad,pitch_rad,u_x_v,u_y_v";
inline constexpr char kPacketsCsvHeader[] =
    "flow_id,seq,size_bytes,send_time_s,deliver_time_s,attempts";

void write_controller_csv(std::ostream& os,
                          const std::vector<TraceRecord>& rows);
void write_controller_csv(const std::filesystem::path& path,
                          const std::vector<TraceRecord>& rows);
std::vector<TraceRecord> read_controller_csv(std::istream& is);
std::vector<TraceRecord> read_controller_csv(const std::filesystem::path& path);

void write_packets_csv(std::ostream& os,
                       const std::vector<netem::PacketRecord>& rows);
void write_packets_csv(const std::filesystem::path& path,
                       const std::vector<netem::PacketRecord>& rows);
std::vector<netem::PacketRecord> read_packets_csv(std::istream& is);
std::vector<netem::PacketRecord> read_packets_csv(
    const std::filesystem::path& path);

}  // namespace plateloop
