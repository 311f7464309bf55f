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

#include "plateloop/netem.hpp"

#include <algorithm>
#include <string>
#include <utility>

namespace plateloop::netem {

void LinkParams::validate() const {
  if (!(jitter_s >= 0.0)) {
    throw std::invalid_argument("link jitter must be >= 0");
  }
  if (!(delay_s >= jitter_s)) {
    throw std::invalid_argument("link delay must be >= jitter");
  }
  if (!(loss >= 0.0 && loss < 1.0)) {
    throw std::invalid_argument("link loss must be in [0, 1)");
  }
  if (!(bandwidth_bps > 0.0)) {
    throw std::invalid_argument("link bandwidth must be positive");
  }
}

std::string_view host_name(HostId id) {
  switch (id) {
    case HostId::h1:
      return "h1";
    case HostId::sta1:
      return "sta1";
    case HostId::sta2:
      return "sta2";
  }
  throw std::invalid_argument("unknown host");
}

const LinkParams& Topology::link_for(HostId id) const {
  switch (id) {
    case HostId::h1:
      return h1;
    case HostId::sta1:
      return sta1;
    case HostId::sta2:
      return sta2;
  }
  throw std::invalid_argument("unknown host");
}

void Topology::validate() const {
  h1.validate();
  sta1.validate();
  sta2.validate();
}

HostId switch_forward(HostId src, HostId dst) {
  if (src == dst) {
    throw std::invalid_argument("self-addressed message has no egress link");
  }
  return dst;
}

double sample_link_delay(const LinkParams& params, RngStream& rng) {
  return params.delay_s + rng.uniform(-params.jitter_s, params.jitter_s);
}

std::optional<double> DirectedLink::transmit(double submit_time_s,
                                             std::size_t size_bytes) {
  const double start = std::max(submit_time_s, busy_until_);
  const double serialized =
      start + static_cast<double>(size_bytes) * 8.0 / params_.bandwidth_bps;
  busy_until_ = serialized;

  // Both draws always happen so each stream's position depends only on the
  // number of transmissions, not on their outcomes.
  const double propagation = sample_link_delay(params_, jitter_rng_);
  const bool lost = loss_rng_.bernoulli(params_.loss);
  if (lost) return std::nullopt;
  return serialized + propagation;
}

std::vector<Message> FlowReceiver::deliver(Message msg) {
  std::vector<Message> released;
  if (msg.seq < next_expected_ || buffer_.count(msg.seq) != 0) {
    return released;  // duplicate
  }
  if (msg.seq != next_expected_) {
    buffer_.emplace(msg.seq, std::move(msg));
    return released;
  }
  released.push_back(std::move(msg));
  ++next_expected_;
  for (auto it = buffer_.begin();
       it != buffer_.end() && it->first == next_expected_;
       it = buffer_.erase(it)) {
    released.push_back(std::move(it->second));
    ++next_expected_;
  }
  return released;
}

void EventQueue::schedule(double time_s, std::function<void()> action) {
  if (time_s < now_) {
    throw std::logic_error("cannot schedule an event in the past");
  }
  heap_.push(Entry{time_s, next_id_++, std::move(action)});
}

double EventQueue::next_time() const {
  if (heap_.empty()) {
    throw std::logic_error("event queue is empty");
  }
  return heap_.top().time_s;
}

bool EventQueue::run_one() {
  if (heap_.empty()) return false;
  // The heap owns entries by value; copy the action out before popping so
  // the handler may schedule freely.
  std::function<void()> action = heap_.top().action;
  now_ = heap_.top().time_s;
  heap_.pop();
  action();
  return true;
}

void EventQueue::run_until(double t_end) {
  while (!heap_.empty() && heap_.top().time_s < t_end) {
    run_one();
  }
  now_ = std::max(now_, t_end);
}

namespace {

std::string direction_label(HostId host, bool toward_switch) {
  std::string h{host_name(host)};
  return toward_switch ? h + "->s1" : "s1->" + h;
}

double serialization_s(std::size_t size_bytes, const LinkParams& p) {
  return static_cast<double>(size_bytes) * 8.0 / p.bandwidth_bps;
}

}  // namespace

Network::Network(EventQueue& queue, const Topology& topology, double rto_s,
                 std::uint64_t seed)
    : queue_(queue), topology_(topology), rto_s_(rto_s) {
  topology_.validate();
  if (!(rto_s_ > 0.0)) {
    throw std::invalid_argument("rto must be positive");
  }
  // Fixed construction order: (h1, sta1, sta2) x (up, down). Streams are
  // derived by label, so the order only affects storage, not randomness.
  const HostId hosts[] = {HostId::h1, HostId::sta1, HostId::sta2};
  links_.reserve(6);
  for (HostId h : hosts) {
    for (bool up : {true, false}) {
      const std::string dir = direction_label(h, up);
      links_.emplace_back(topology_.link_for(h),
                          RngStream(seed, "jitter/" + dir),
                          RngStream(seed, "loss/" + dir));
    }
  }
}

DirectedLink& Network::uplink(HostId host) {
  return links_[static_cast<std::size_t>(host) * 2];
}

DirectedLink& Network::downlink(HostId host) {
  return links_[static_cast<std::size_t>(host) * 2 + 1];
}

void Network::open_flow(const std::string& flow_id, HostId src, HostId dst,
                        std::size_t size_bytes, DeliveryHandler handler) {
  if (flows_.count(flow_id) != 0) {
    throw std::invalid_argument("flow id already open: " + flow_id);
  }
  if (size_bytes == 0) {
    throw std::invalid_argument("message size must be positive");
  }
  switch_forward(src, dst);  // rejects src == dst

  // A retransmission period at or below the loss-free one-way latency would
  // spray copies before the first one can possibly arrive.
  const LinkParams& up = topology_.link_for(src);
  const LinkParams& down = topology_.link_for(dst);
  const double expected_one_way = up.delay_s + down.delay_s +
                                  serialization_s(size_bytes, up) +
                                  serialization_s(size_bytes, down);
  if (rto_s_ <= expected_one_way) {
    throw std::invalid_argument("rto must exceed the expected one-way delay (" +
                                std::to_string(expected_one_way) +
                                " s) of flow " + flow_id);
  }

  Flow f;
  f.src = src;
  f.dst = dst;
  f.size_bytes = size_bytes;
  f.handler = std::move(handler);
  flows_.emplace(flow_id, std::move(f));
}

void Network::send(const std::string& flow_id,
                   std::vector<std::uint8_t> payload) {
  auto it = flows_.find(flow_id);
  if (it == flows_.end()) {
    throw std::invalid_argument("send on unknown flow: " + flow_id);
  }
  Flow& f = it->second;
  Message msg;
  msg.flow_id = flow_id;
  msg.seq = f.next_seq++;
  msg.payload = std::move(payload);
  msg.size_bytes = f.size_bytes;
  msg.send_time_s = queue_.now();

  PendingKey key{flow_id, msg.seq};
  pending_.emplace(key, PendingSend{std::move(msg), 0});
  ++in_flight_;
  attempt(key);
}

void Network::attempt(const PendingKey& key) {
  auto it = pending_.find(key);
  if (it == pending_.end()) return;  // a copy already arrived
  ++it->second.attempts;

  const Flow& f = flows_.at(key.flow_id);
  // First hop starts serializing now; the switch hop starts when the copy
  // reaches the switch, keeping the egress link's FIFO in arrival order.
  if (auto at_switch = uplink(f.src).transmit(queue_.now(), f.size_bytes)) {
    queue_.schedule(*at_switch, [this, key] {
      const Flow& flow = flows_.at(key.flow_id);
      const HostId egress = switch_forward(flow.src, flow.dst);
      if (auto at_host = downlink(egress).transmit(queue_.now(),
                                                   flow.size_bytes)) {
        queue_.schedule(*at_host, [this, key] { on_path_arrival(key); });
      }
    });
  }
  queue_.schedule(queue_.now() + rto_s_, [this, key] { attempt(key); });
}

void Network::on_path_arrival(const PendingKey& key) {
  auto it = pending_.find(key);
  if (it == pending_.end()) return;  // a faster copy won; drop the duplicate
  Message msg = std::move(it->second.msg);
  msg.attempts = it->second.attempts;
  pending_.erase(it);

  Flow& f = flows_.at(key.flow_id);
  std::vector<Message> released = f.receiver.deliver(std::move(msg));
  if (released.empty()) return;  // buffered behind a gap

  for (const Message& r : released) {
    trace_.push_back(PacketRecord{r.flow_id, r.seq, r.size_bytes,
                                  r.send_time_s, queue_.now(), r.attempts});
    --in_flight_;
  }
  f.handler(released);
}

}  // namespace plateloop::netem
