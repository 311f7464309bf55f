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

#include <cstdint>
#include <functional>
#include <map>
#include <optional>
#include <queue>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "plateloop/rng.hpp"

namespace plateloop::netem {

struct LinkParams {
  double delay_s = 0.010;      // mean propagation delay
  double jitter_s = 0.001;     // uniform on [delay - jitter, delay + jitter]
  double loss = 0.01;          // per-traversal drop probability
  double bandwidth_bps = 1e7;  // serialization rate

  void validate() const;
};

/// Star topology: h1, sta1, sta2, each attached to one switch by its own
/// duplex link. Every host-to-host path crosses exactly two links.
enum class HostId { h1, sta1, sta2 };

std::string_view host_name(HostId id);

struct Topology {
  LinkParams h1;
  LinkParams sta1;
  LinkParams sta2;

  const LinkParams& link_for(HostId id) const;
  void validate() const;
};

/// Static forwarding: the egress link out of the switch is the destination's
/// link. Self-addressed traffic is a configuration error.
HostId switch_forward(HostId src, HostId dst);

struct Message {
  std::string flow_id;
  std::uint64_t seq = 0;
  std::vector<std::uint8_t> payload;
  std::size_t size_bytes = 0;  // wire size; payload may be smaller
  double send_time_s = 0.0;    // first application-level send
  int attempts = 0;  // transport bookkeeping, set when the first copy lands
};

/// One application-level message as seen end to end.
struct PacketRecord {
  std::string flow_id;
  std::uint64_t seq = 0;
  std::size_t size_bytes = 0;
  double send_time_s = 0.0;
  double deliver_time_s = 0.0;  // in-order release to the application
  int attempts = 0;             // transmissions issued before first arrival
};

/// Jittered one-way propagation delay: delay + U, U uniform on
/// [-jitter, +jitter].
double sample_link_delay(const LinkParams& params, RngStream& rng);

/// One direction of one host-switch link. FIFO serialization: a message
/// cannot begin serializing before the previous one finishes, and the slot is
/// consumed even when the message is then lost.
class DirectedLink {
 public:
  DirectedLink(const LinkParams& params, RngStream jitter_rng,
               RngStream loss_rng)
      : params_(params), jitter_rng_(jitter_rng), loss_rng_(loss_rng) {}

  /// Arrival time at the far end, or nullopt when the traversal is lost.
  /// Both RNG streams advance exactly once per call regardless of outcome,
  /// so the draw sequence is a pure function of the call count.
  std::optional<double> transmit(double submit_time_s, std::size_t size_bytes);

  double busy_until() const { return busy_until_; }
  const LinkParams& params() const { return params_; }

 private:
  LinkParams params_;
  RngStream jitter_rng_;
  RngStream loss_rng_;
  double busy_until_ = 0.0;
};

/// Receiver-side reorder/dedup state for one flow. Delivered sequence numbers
/// are exactly 0,1,2,... with no gaps or duplicates.
class FlowReceiver {
 public:
  /// Accepts one arrival and returns the maximal in-sequence prefix now
  /// releasable (possibly empty: duplicate or out-of-order arrival).
  std::vector<Message> deliver(Message msg);

  std::uint64_t next_expected_seq() const { return next_expected_; }
  std::size_t buffered() const { return buffer_.size(); }

 private:
  std::uint64_t next_expected_ = 0;
  std::map<std::uint64_t, Message> buffer_;
};

/// Time-ordered event dispatcher. Ties broken by insertion order, so the
/// schedule is a total deterministic order.
class EventQueue {
 public:
  void schedule(double time_s, std::function<void()> action);

  double now() const { return now_; }
  bool empty() const { return heap_.empty(); }
  double next_time() const;

  /// Dispatches the earliest event. Returns false when the queue is empty.
  bool run_one();

  /// Dispatches every event with time < t_end, then sets now to t_end.
  void run_until(double t_end);

 private:
  struct Entry {
    double time_s;
    std::uint64_t id;
    std::function<void()> action;
  };
  struct Later {
    bool operator()(const Entry& a, const Entry& b) const {
      if (a.time_s != b.time_s) return a.time_s > b.time_s;
      return a.id > b.id;
    }
  };

  std::priority_queue<Entry, std::vector<Entry>, Later> heap_;
  std::uint64_t next_id_ = 0;
  double now_ = 0.0;
};

/// The emulated network: impaired duplex links around a zero-delay switch,
/// plus reliable in-order flows on top (the transport analog). Loss is
/// recovered by timer retransmission every rto until the first copy survives
/// both links; the receiver discards duplicates and releases messages in
/// sequence order.
class Network {
 public:
  /// Handler for one in-order release batch (one or more consecutive
  /// messages; a single arrival can unblock several buffered ones).
  using DeliveryHandler = std::function<void(const std::vector<Message>&)>;

  /// Streams are derived from `seed` by stable labels per (link direction,
  /// purpose), so the schedule is independent of event interleaving and
  /// bit-identical across machines for a fixed seed.
  Network(EventQueue& queue, const Topology& topology, double rto_s,
          std::uint64_t seed);

  /// Declares a unidirectional flow. Every message on the flow has the given
  /// wire size. Throws when the id is taken, src == dst, or rto does not
  /// exceed the flow's expected one-way latency (retransmissions would fire
  /// before any copy could arrive).
  void open_flow(const std::string& flow_id, HostId src, HostId dst,
                 std::size_t size_bytes, DeliveryHandler handler);

  /// Sends one message on an open flow at the current queue time.
  void send(const std::string& flow_id, std::vector<std::uint8_t> payload);

  const std::vector<PacketRecord>& packet_trace() const { return trace_; }
  std::vector<PacketRecord> take_packet_trace() { return std::move(trace_); }

  /// Messages sent but not yet released to the application.
  std::size_t in_flight() const { return in_flight_; }

 private:
  struct Flow {
    HostId src;
    HostId dst;
    std::size_t size_bytes;
    DeliveryHandler handler;
    std::uint64_t next_seq = 0;
    FlowReceiver receiver;
  };

  struct PendingKey {
    std::string flow_id;
    std::uint64_t seq;
    bool operator<(const PendingKey& o) const {
      if (flow_id != o.flow_id) return flow_id < o.flow_id;
      return seq < o.seq;
    }
  };

  struct PendingSend {
    Message msg;
    int attempts = 0;
  };

  void attempt(const PendingKey& key);
  void on_path_arrival(const PendingKey& key);

  DirectedLink& uplink(HostId host);
  DirectedLink& downlink(HostId host);

  EventQueue& queue_;
  Topology topology_;
  double rto_s_;
  std::vector<DirectedLink> links_;  // up/down per host, fixed order
  std::map<std::string, Flow> flows_;
  std::map<PendingKey, PendingSend> pending_;
  std::vector<PacketRecord> trace_;
  std::size_t in_flight_ = 0;
};

}  // namespace plateloop::netem
