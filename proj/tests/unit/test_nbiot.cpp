#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <map>
#include <random>

#include "shmtwin/error.hpp"
#include "shmtwin/nbiot.hpp"

using namespace shmtwin;
using namespace shmtwin::nbiot;

namespace {

using S = RadioState;
using E = RadioEvent;

// Written out independently of the implementation: every legal edge.
const std::map<std::pair<S, E>, S>& legal_edges() {
  static const std::map<std::pair<S, E>, S> t{
      {{S::OFF, E::power_on}, S::ATTACHING},
      {{S::ATTACHING, E::attach_done}, S::CONNECTED_TX},
      {{S::CONNECTED_TX, E::tx_done}, S::CONNECTED_EDRX},
      {{S::CONNECTED_EDRX, E::tx_request}, S::CONNECTED_TX},
      {{S::CONNECTED_EDRX, E::downlink}, S::CONNECTED_TX},
      {{S::CONNECTED_EDRX, E::inactivity}, S::IDLE_EDRX},
      {{S::IDLE_EDRX, E::t3324_expiry}, S::PSM},
      {{S::IDLE_EDRX, E::paging}, S::CONNECTED_TX},
      {{S::IDLE_EDRX, E::tx_request}, S::CONNECTED_TX},
      {{S::PSM, E::wake}, S::CONNECTED_TX},
      {{S::PSM, E::t3412_expiry}, S::ATTACHING},
  };
  return t;
}

std::vector<std::int16_t> random_samples(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_int_distribution<int> d(-32768, 32767);
  std::vector<std::int16_t> v(n);
  for (auto& x : v) x = static_cast<std::int16_t>(d(rng));
  return v;
}

}  // namespace

TEST(Radio, TransitionTableIsExactlyTheLegalEdges) {
  for (auto s : kAllStates)
    for (auto e : kAllEvents) {
      const auto it = legal_edges().find({s, e});
      const auto got = next_state(s, e);
      if (it == legal_edges().end())
        EXPECT_FALSE(got.has_value()) << to_string(s) << " + " << to_string(e);
      else
        EXPECT_EQ(got, it->second) << to_string(s) << " + " << to_string(e);
    }
}

TEST(Radio, IllegalEventLeavesAuditRecord) {
  RadioStateMachine m;
  m.step(E::tx_request);
  EXPECT_EQ(m.state(), S::OFF);
  ASSERT_EQ(m.audit().size(), 1u);
  EXPECT_EQ(m.audit()[0].index, 0u);
  EXPECT_EQ(m.audit()[0].event, E::tx_request);
  m.step(E::power_on);
  m.step(E::attach_done);
  m.step(E::wake);
  EXPECT_EQ(m.state(), S::CONNECTED_TX);
  ASSERT_EQ(m.audit().size(), 2u);
  EXPECT_EQ(m.audit()[1].index, 3u);
  EXPECT_EQ(m.audit()[1].state, S::CONNECTED_TX);
}

TEST(Radio, RandomEventStreamsFollowTheOracle) {
  std::mt19937_64 rng(77);
  std::uniform_int_distribution<std::size_t> pick(0, kAllEvents.size() - 1);
  RadioStateMachine m;
  S oracle = S::OFF;
  std::size_t illegal = 0;
  for (int i = 0; i < 10000; ++i) {
    const auto e = kAllEvents[pick(rng)];
    const auto it = legal_edges().find({oracle, e});
    if (it == legal_edges().end())
      ++illegal;
    else
      oracle = it->second;
    ASSERT_EQ(m.step(e), oracle) << "event " << i;
  }
  EXPECT_EQ(m.audit().size(), illegal);
  EXPECT_EQ(m.events_seen(), 10000u);
}

TEST(Radio, PsmWakeSkipsAttach) {
  EXPECT_EQ(step(S::PSM, E::wake), S::CONNECTED_TX);
  EXPECT_EQ(step(S::PSM, E::power_on), S::PSM);
}

TEST(Radio, TimerValidation) {
  TimerConfig t;
  EXPECT_NO_THROW(t.validate());
  t.t3412_s = 414.0 * 86400.0;
  EXPECT_THROW(t.validate(), InvalidArgument);
  t = {};
  t.t3324_s = 90000.0;
  EXPECT_THROW(t.validate(), InvalidArgument);
  t = {};
  t.cedrx_cycle_s = 0.1;
  EXPECT_THROW(t.validate(), InvalidArgument);
  t = {};
  t.iedrx_cycle_s = 10.24;
  EXPECT_THROW(t.validate(), InvalidArgument);
}

TEST(Coverage, ClassBoundaries) {
  EXPECT_EQ(classify_coverage(-70.0), CoverageClass::GOOD);
  EXPECT_EQ(classify_coverage(-94.999), CoverageClass::GOOD);
  EXPECT_EQ(classify_coverage(-95.0), CoverageClass::MEDIUM);
  EXPECT_EQ(classify_coverage(-109.999), CoverageClass::MEDIUM);
  EXPECT_EQ(classify_coverage(-110.0), CoverageClass::BAD);
  EXPECT_EQ(classify_coverage(-130.0), CoverageClass::BAD);
  EXPECT_THROW(classify_coverage(std::nan("")), InvalidArgument);
  EXPECT_EQ(parse_coverage("medium"), CoverageClass::MEDIUM);
  EXPECT_THROW(parse_coverage("great"), InvalidArgument);
}

TEST(Energy, EpbTable) {
  EXPECT_NEAR(epb(10, 0.7130), 8912.5, 1e-9);
  EXPECT_NEAR(epb(1300, 1.0326), 99.288, 1e-3);
  EXPECT_THROW(epb(0, 1.0), InvalidArgument);
  const EnergyParams p;
  for (std::size_t i = 1; i < p.payload_energy_table.size(); ++i) {
    const auto& a = p.payload_energy_table[i - 1];
    const auto& b = p.payload_energy_table[i];
    EXPECT_GT(b.energy_j, a.energy_j);
    EXPECT_LT(epb(b.payload_bytes, b.energy_j), epb(a.payload_bytes, a.energy_j));
  }
}

TEST(Energy, ParamsValidation) {
  EnergyParams p;
  p.coverage_multiplier.erase(CoverageClass::BAD);
  EXPECT_THROW(p.validate(), InvalidArgument);
  p = {};
  p.payload_energy_table[2].payload_bytes = 100;
  EXPECT_THROW(p.validate(), InvalidArgument);
}

TEST(Packets, RoundTripArbitraryLengths) {
  std::mt19937_64 rng(12);
  std::uniform_int_distribution<std::size_t> len(1, 5000);
  for (int trial = 0; trial < 50; ++trial) {
    const auto x = random_samples(len(rng), static_cast<std::uint64_t>(trial));
    const auto pk = packetize(x, 3);
    ASSERT_EQ(pk.size(), (x.size() + 649) / 650);
    for (std::size_t i = 0; i + 1 < pk.size(); ++i) ASSERT_FALSE(pk[i].padded());
    EXPECT_EQ(pk.back().pad_samples, pk.size() * 650 - x.size());
    EXPECT_EQ(unpad_concat(pk), x);
  }
  EXPECT_THROW(packetize({}, 0), InvalidArgument);
}

TEST(Packets, ReassemblyUsesSequenceOrder) {
  const auto x = random_samples(2000, 4);
  auto pk = packetize(x, 0);
  std::ranges::reverse(pk);
  EXPECT_EQ(unpad_concat(pk), x);
}

TEST(Packets, WireImageIsLittleEndian) {
  Packet p;
  p.samples[0] = -2;
  p.samples[1] = 0x1234;
  const auto bytes = encode_payload(p);
  EXPECT_EQ(bytes[0], 0xFE);
  EXPECT_EQ(bytes[1], 0xFF);
  EXPECT_EQ(bytes[2], 0x34);
  EXPECT_EQ(bytes[3], 0x12);
  const auto back = decode_payload(bytes, 9, 5, 7);
  EXPECT_EQ(back.samples, p.samples);
  EXPECT_EQ(back.seq, 5u);
  EXPECT_EQ(back.pad_samples, 7);
  std::vector<std::uint8_t> short_bytes(1299);
  EXPECT_THROW(decode_payload(short_bytes, 0, 0), InvalidArgument);
}

TEST(Uplink, DeterministicSessionMatchesClosedForm) {
  const EnergyParams p;
  for (std::size_t n : {1u, 2u, 10u, 65u}) {
    const std::vector<Packet> pk(n);
    for (auto c : {CoverageClass::GOOD, CoverageClass::MEDIUM, CoverageClass::BAD}) {
      const auto r = uplink_session(pk, c, p);
      const double oracle = p.multiplier(c) *
                            (0.65972 + 0.61697 + static_cast<double>(n - 1) * 0.45083);
      EXPECT_NEAR(r.total_energy_j, oracle, 1e-12);
      EXPECT_NEAR(session_energy_j(n, c, p), oracle, 1e-12);
      double phases = 0.0;
      for (const auto& ph : r.phases) phases += ph.energy_j;
      EXPECT_NEAR(phases, oracle, 1e-12);
    }
  }
  EXPECT_NEAR(session_energy_j(10, CoverageClass::GOOD, p), 5.33416, 1e-9);
  EXPECT_EQ(session_energy_j(0, CoverageClass::GOOD, p), 0.0);
}

TEST(Uplink, PhasesWalkTheStateMachine) {
  const std::vector<Packet> pk(3);
  const auto r = uplink_session(pk, CoverageClass::GOOD, EnergyParams{});
  ASSERT_EQ(r.phases.size(), 4u);
  for (std::size_t i = 0; i < 3; ++i) EXPECT_EQ(r.phases[i].state, S::CONNECTED_TX);
  EXPECT_EQ(r.phases[3].state, S::CONNECTED_EDRX);
  EXPECT_DOUBLE_EQ(r.duration_s, 6.0 + 0.5 + 0.5 + 15.5);
}

TEST(Uplink, BadCoverageRepeatsAndStretchesAirtime) {
  const std::vector<Packet> pk(2);
  const auto good = uplink_session(pk, CoverageClass::GOOD, EnergyParams{});
  const auto bad = uplink_session(pk, CoverageClass::BAD, EnergyParams{});
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_EQ(good.packets[i].retransmissions, 0);
    EXPECT_EQ(bad.packets[i].retransmissions, 4);
    EXPECT_DOUBLE_EQ(bad.packets[i].airtime_s, 5.0 * good.packets[i].airtime_s);
  }
  EXPECT_NEAR(bad.total_energy_j / good.total_energy_j, 3.8, 1e-12);
  EXPECT_THROW(uplink_session({}, CoverageClass::GOOD, EnergyParams{}), InvalidArgument);
}

TEST(Uplink, LognormalSigmaHitsRequestedPercentile) {
  const double s = lognormal_sigma_for_p95(2.0);
  EXPECT_NEAR(s, 0.49627, 1e-5);
  // Mean-one lognormal: p95 = exp(z s - s^2 / 2).
  EXPECT_NEAR(std::exp(1.6448536269514722 * s - 0.5 * s * s), 2.0, 1e-12);
  EXPECT_THROW(lognormal_sigma_for_p95(1.0), InvalidArgument);
  EXPECT_THROW(lognormal_sigma_for_p95(10.0), InvalidArgument);
}

TEST(Uplink, StochasticModePreservesMeanAndDispersion) {
  const EnergyParams p;
  UplinkOptions o;
  o.mode = UplinkMode::stochastic;
  const std::vector<Packet> one(1);
  std::vector<double> e;
  for (std::uint64_t k = 0; k < 20000; ++k)
    e.push_back(uplink_session(one, CoverageClass::MEDIUM, p, o, k).total_energy_j);
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  std::ranges::sort(e);
  const double target = session_energy_j(1, CoverageClass::MEDIUM, p);
  EXPECT_NEAR(mean, target, 0.02 * target);
  EXPECT_NEAR(e[19000] / mean, 2.0, 0.1);

  EXPECT_EQ(uplink_session(one, CoverageClass::GOOD, p, o, 5).total_energy_j,
            uplink_session(one, CoverageClass::GOOD, p, o, 5).total_energy_j);
}

TEST(Sink, LossFollowsBinomial) {
  const std::vector<Packet> pk = packetize(random_samples(650 * 2000, 1), 0);
  const double q = 0.1;
  const auto r = deliver(pk, q, 3);
  const double n = static_cast<double>(pk.size());
  const double lost = n - static_cast<double>(r.delivered);
  EXPECT_NEAR(lost, n * q, 4.0 * std::sqrt(n * q * (1 - q)));
  EXPECT_EQ(r.missing_seqs.size(), pk.size() - r.delivered);
  EXPECT_EQ(r.samples.size(), 650u * 2000u);
  for (auto seq : r.missing_seqs)
    for (std::size_t i = 0; i < 650; ++i) ASSERT_EQ(r.samples[seq * 650 + i], 0);
}

TEST(Sink, ZeroLossIsExact) {
  const auto x = random_samples(3333, 2);
  const auto pk = packetize(x, 0);
  const auto r = deliver(pk, 0.0, 8);
  EXPECT_EQ(r.samples, x);
  EXPECT_EQ(r.delivered, pk.size());
  EXPECT_TRUE(r.missing_seqs.empty());
  EXPECT_THROW(deliver(pk, 1.0, 0), InvalidArgument);
  EXPECT_THROW(deliver(pk, -0.1, 0), InvalidArgument);
}

TEST(Sink, EventLogRoundTrip) {
  const std::vector<Packet> pk = packetize(random_samples(1700, 5), 4);
  const auto rec = uplink_session(pk, CoverageClass::MEDIUM, EnergyParams{});
  const std::vector<bool> flags{true, false, true};
  const bool arr[] = {true, false, true};
  const auto events = to_events(rec, 7, arr);
  const auto path = std::filesystem::temp_directory_path() / "shmtwin_nbiot_tests" / "events.csv";
  write_event_log(path, events);
  const auto back = read_event_log(path);
  ASSERT_EQ(back.size(), events.size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].timestamp_s, events[i].timestamp_s);
    EXPECT_EQ(back[i].energy_j, events[i].energy_j);
    EXPECT_EQ(back[i].seq, events[i].seq);
    EXPECT_EQ(back[i].node_id, 7u);
    EXPECT_EQ(back[i].delivered, flags[i]);
  }
}

TEST(Sink, AggregatesPerSessionAndRejectsReordering) {
  Sink sink;
  sink.ingest({0.0, 1, 0, 0, 1.0, true});
  sink.ingest({1.0, 2, 0, 0, 2.0, false});
  sink.ingest({1.5, 1, 0, 1, 0.5, true});
  sink.ingest({1.5, 1, 1, 0, 0.25, true});
  EXPECT_THROW(sink.ingest({1.0, 1, 1, 1, 0.1, true}), InvalidArgument);
  const auto s = sink.sessions();
  ASSERT_EQ(s.size(), 3u);
  EXPECT_EQ(s[0].node_id, 1u);
  EXPECT_EQ(s[0].packets, 2u);
  EXPECT_DOUBLE_EQ(s[0].energy_j, 1.5);
  EXPECT_DOUBLE_EQ(s[0].last_s, 1.5);
  EXPECT_EQ(s[2].node_id, 2u);
  EXPECT_EQ(s[2].delivered, 0u);
  EXPECT_EQ(sink.events(), 4u);
}
