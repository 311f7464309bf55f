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

#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "plateloop/netem.hpp"

using namespace plateloop::netem;
using plateloop::RngStream;

namespace {

LinkParams clean_link() {
  LinkParams p;
  p.delay_s = 0.010;
  p.jitter_s = 0.0;
  p.loss = 0.0;
  p.bandwidth_bps = 1e7;
  return p;
}

Topology clean_topology() {
  Topology t;
  t.h1 = clean_link();
  t.sta1 = clean_link();
  t.sta2 = clean_link();
  return t;
}

}  // namespace

TEST_CASE("switch forwarding picks the destination link") {
  CHECK(switch_forward(HostId::h1, HostId::sta1) == HostId::sta1);
  CHECK(switch_forward(HostId::sta2, HostId::h1) == HostId::h1);
  CHECK(switch_forward(HostId::sta1, HostId::sta2) == HostId::sta2);
  CHECK_THROWS_AS(switch_forward(HostId::h1, HostId::h1),
                  std::invalid_argument);
  CHECK(host_name(HostId::h1) == "h1");
  CHECK(host_name(HostId::sta1) == "sta1");
  CHECK(host_name(HostId::sta2) == "sta2");
}

TEST_CASE("link parameter validation rejects bad values") {
  LinkParams p;
  p.jitter_s = -0.001;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LinkParams{};
  p.jitter_s = 0.02;  // exceeds the mean delay, could go negative
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LinkParams{};
  p.loss = 1.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  p = LinkParams{};
  p.bandwidth_bps = 0.0;
  CHECK_THROWS_AS(p.validate(), std::invalid_argument);
  CHECK_NOTHROW(LinkParams{}.validate());
}

TEST_CASE("jitter-free transmission has an exact arrival time") {
  DirectedLink link(clean_link(), RngStream(1, "jitter/x"),
                    RngStream(1, "loss/x"));
  auto arrival = link.transmit(0.0, 1250);
  REQUIRE(arrival.has_value());
  // 1250 bytes at 10 Mbit/s serialize in exactly 1 ms.
  const double ser = 1250.0 * 8.0 / 1e7;
  CHECK(*arrival == (0.0 + ser) + 0.01);
  CHECK(link.busy_until() == ser);
}

TEST_CASE("jittered delays stay inside the window and center on the mean") {
  LinkParams p;
  p.delay_s = 0.010;
  p.jitter_s = 0.001;
  RngStream rng(7, "jitter/test");
  double sum = 0.0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    const double d = sample_link_delay(p, rng);
    REQUIRE(d >= 0.009);
    REQUIRE(d <= 0.011);
    sum += d;
  }
  CHECK(std::fabs(sum / n - 0.010) < 1e-5);
}

TEST_CASE("the link serializes strictly one message at a time") {
  DirectedLink link(clean_link(), RngStream(2, "jitter/x"),
                    RngStream(2, "loss/x"));
  const double ser = 64.0 * 8.0 / 1e7;
  auto first = link.transmit(0.0, 64);
  auto second = link.transmit(0.0, 64);
  REQUIRE(first.has_value());
  REQUIRE(second.has_value());
  CHECK(*first == (0.0 + ser) + 0.01);
  CHECK(*second == (ser + ser) + 0.01);  // queued behind the first
  CHECK(link.busy_until() == ser + ser);
}

TEST_CASE("a lost message still consumes its serialization slot") {
  LinkParams p = clean_link();
  p.loss = 0.999999999;  // effectively always lost, still a valid probability
  DirectedLink link(p, RngStream(3, "jitter/x"), RngStream(3, "loss/x"));
  auto arrival = link.transmit(0.0, 1250);
  CHECK_FALSE(arrival.has_value());
  CHECK(link.busy_until() == 1250.0 * 8.0 / 1e7);
}

TEST_CASE("empirical loss rate matches the configured probability") {
  LinkParams p = clean_link();
  p.loss = 0.5;
  DirectedLink link(p, RngStream(42, "jitter/x"), RngStream(42, "loss/x"));
  int lost = 0;
  const int n = 1000000;
  for (int i = 0; i < n; ++i) {
    if (!link.transmit(0.0, 1).has_value()) ++lost;
  }
  CHECK(std::fabs(static_cast<double>(lost) / n - 0.5) < 0.002);
}

TEST_CASE("flow receiver releases the maximal in-sequence prefix") {
  FlowReceiver rx;
  Message m;
  m.flow_id = "f";

  m.seq = 1;
  CHECK(rx.deliver(m).empty());  // gap: buffered
  CHECK(rx.buffered() == 1);

  m.seq = 3;
  CHECK(rx.deliver(m).empty());
  CHECK(rx.buffered() == 2);

  m.seq = 0;
  auto released = rx.deliver(m);  // unblocks 0 and 1
  REQUIRE(released.size() == 2);
  CHECK(released[0].seq == 0);
  CHECK(released[1].seq == 1);
  CHECK(rx.next_expected_seq() == 2);
  CHECK(rx.buffered() == 1);

  m.seq = 2;
  released = rx.deliver(m);
  REQUIRE(released.size() == 2);
  CHECK(released[0].seq == 2);
  CHECK(released[1].seq == 3);
  CHECK(rx.buffered() == 0);
}

TEST_CASE("flow receiver drops duplicates of delivered and buffered") {
  FlowReceiver rx;
  Message m;
  m.seq = 0;
  CHECK(rx.deliver(m).size() == 1);
  CHECK(rx.deliver(m).empty());  // already released

  m.seq = 2;
  CHECK(rx.deliver(m).empty());
  CHECK(rx.deliver(m).empty());  // duplicate of a buffered message
  CHECK(rx.buffered() == 1);
}

TEST_CASE("event queue dispatches in time order with stable ties") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(3.0, [&] { order.push_back(3); });
  q.schedule(1.0, [&] { order.push_back(1); });
  q.schedule(2.0, [&] { order.push_back(20); });
  q.schedule(2.0, [&] { order.push_back(21); });  // tie: insertion order

  CHECK(q.next_time() == 1.0);
  while (q.run_one()) {
  }
  CHECK(order == std::vector<int>{1, 20, 21, 3});
  CHECK(q.now() == 3.0);
  CHECK_FALSE(q.run_one());
}

TEST_CASE("events scheduled during dispatch run after same-time peers") {
  EventQueue q;
  std::vector<int> order;
  q.schedule(1.0, [&] {
    order.push_back(0);
    q.schedule(1.0, [&] { order.push_back(2); });  // same instant, later id
  });
  q.schedule(1.0, [&] { order.push_back(1); });
  while (q.run_one()) {
  }
  CHECK(order == std::vector<int>{0, 1, 2});
}

TEST_CASE("scheduling into the past is an error") {
  EventQueue q;
  q.schedule(5.0, [] {});
  q.run_one();
  CHECK(q.now() == 5.0);
  CHECK_THROWS_AS(q.schedule(4.0, [] {}), std::logic_error);
  CHECK_NOTHROW(q.schedule(5.0, [] {}));  // the present is fine
}

TEST_CASE("run_until stops strictly before the horizon") {
  EventQueue q;
  int fired = 0;
  q.schedule(4.0, [&] { ++fired; });
  q.schedule(5.0, [&] { ++fired; });  // exactly at the horizon: not run
  q.run_until(5.0);
  CHECK(fired == 1);
  CHECK(q.now() == 5.0);
  q.run_one();
  CHECK(fired == 2);
}

TEST_CASE("an unimpaired flow delivers with the exact two-hop latency") {
  EventQueue q;
  Network net(q, clean_topology(), 0.05, 99);
  std::vector<Message> got;
  net.open_flow("sensor", HostId::sta1, HostId::h1, 64,
                [&](const std::vector<Message>& batch) {
                  got.insert(got.end(), batch.begin(), batch.end());
                });
  net.send("sensor", {1, 2, 3});
  CHECK(net.in_flight() == 1);
  while (q.run_one()) {
  }

  REQUIRE(got.size() == 1);
  CHECK(got[0].seq == 0);
  CHECK(got[0].payload == std::vector<std::uint8_t>{1, 2, 3});
  CHECK(net.in_flight() == 0);

  REQUIRE(net.packet_trace().size() == 1);
  const PacketRecord& rec = net.packet_trace()[0];
  const double ser = 64.0 * 8.0 / 1e7;
  const double at_switch = (0.0 + ser) + 0.01;
  const double at_host = (at_switch + ser) + 0.01;
  CHECK(rec.send_time_s == 0.0);
  CHECK(rec.deliver_time_s == at_host);
  CHECK(rec.attempts == 1);
  CHECK(rec.size_bytes == 64);
  CHECK(rec.flow_id == "sensor");
}

TEST_CASE("flow bookkeeping rejects misuse") {
  EventQueue q;
  Network net(q, clean_topology(), 0.05, 1);
  net.open_flow("f", HostId::h1, HostId::sta1, 64, [](const auto&) {});
  CHECK_THROWS_AS(
      net.open_flow("f", HostId::h1, HostId::sta2, 64, [](const auto&) {}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      net.open_flow("g", HostId::h1, HostId::h1, 64, [](const auto&) {}),
      std::invalid_argument);
  CHECK_THROWS_AS(
      net.open_flow("h", HostId::h1, HostId::sta1, 0, [](const auto&) {}),
      std::invalid_argument);
  CHECK_THROWS_AS(net.send("missing", {}), std::invalid_argument);
  CHECK_THROWS_AS(Network(q, clean_topology(), 0.0, 1),
                  std::invalid_argument);
}

TEST_CASE("an rto inside the path latency is rejected at flow open") {
  EventQueue q;
  // One-way latency is 0.02 s of propagation plus two serializations; an rto
  // of 20 ms would retransmit before any copy could arrive.
  Network net(q, clean_topology(), 0.020, 1);
  CHECK_THROWS_AS(
      net.open_flow("f", HostId::h1, HostId::sta1, 64, [](const auto&) {}),
      std::invalid_argument);
}

namespace {

struct LossyRun {
  std::vector<PacketRecord> trace;
};

LossyRun run_lossy_flow(std::uint64_t seed, int n_messages) {
  EventQueue q;
  Topology topo;  // defaults: 10ms +-1ms, 1% loss per traversal
  Network net(q, topo, 0.05, seed);
  net.open_flow("sensor", HostId::sta1, HostId::h1, 64, [](const auto&) {});
  for (int i = 0; i < n_messages; ++i) {
    // Spaced far enough apart that recovery always completes in between.
    q.schedule(i * 1.0, [&net] { net.send("sensor", {}); });
  }
  while (q.run_one()) {
  }
  LossyRun out;
  out.trace = net.take_packet_trace();
  return out;
}

}  // namespace

TEST_CASE("lossy flow recovers every message in order") {
  const int n = 20000;
  const LossyRun run = run_lossy_flow(1234, n);
  REQUIRE(run.trace.size() == static_cast<std::size_t>(n));

  const double min_latency =
      2.0 * (0.010 - 0.001) + 2.0 * (64.0 * 8.0 / 1e7) - 1e-12;
  double attempt_sum = 0.0;
  int max_attempts = 1;
  for (int i = 0; i < n; ++i) {
    const PacketRecord& rec = run.trace[i];
    CHECK(rec.seq == static_cast<std::uint64_t>(i));  // no gaps, no dups
    CHECK(rec.send_time_s == doctest::Approx(i * 1.0));
    CHECK(rec.deliver_time_s - rec.send_time_s >= min_latency);
    CHECK(rec.attempts >= 1);
    if (i > 0) CHECK(rec.deliver_time_s > run.trace[i - 1].deliver_time_s);
    attempt_sum += rec.attempts;
    max_attempts = std::max(max_attempts, rec.attempts);
  }
  // Each copy survives both traversals with probability 0.99^2, so the mean
  // number of transmissions per message is 1/0.99^2.
  const double expected_attempts = 1.0 / (0.99 * 0.99);
  CHECK(std::fabs(attempt_sum / n - expected_attempts) <
        0.01 * expected_attempts);
  CHECK(max_attempts >= 2);  // losses actually happened
}

TEST_CASE("a fixed seed reproduces the packet trace bit for bit") {
  const LossyRun a = run_lossy_flow(777, 2000);
  const LossyRun b = run_lossy_flow(777, 2000);
  REQUIRE(a.trace.size() == b.trace.size());
  for (std::size_t i = 0; i < a.trace.size(); ++i) {
    CHECK(a.trace[i].seq == b.trace[i].seq);
    CHECK(a.trace[i].send_time_s == b.trace[i].send_time_s);
    CHECK(a.trace[i].deliver_time_s == b.trace[i].deliver_time_s);
    CHECK(a.trace[i].attempts == b.trace[i].attempts);
  }
  const LossyRun c = run_lossy_flow(778, 2000);
  bool any_diff = false;
  for (std::size_t i = 0; i < c.trace.size() && i < a.trace.size(); ++i) {
    if (a.trace[i].deliver_time_s != c.trace[i].deliver_time_s) {
      any_diff = true;
      break;
    }
  }
  CHECK(any_diff);  // a different seed actually changes the schedule
}
