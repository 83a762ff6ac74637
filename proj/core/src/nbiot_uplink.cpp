#include <algorithm>
#include <bit>
#include <cmath>
#include <random>

#include "shmtwin/error.hpp"
#include "shmtwin/nbiot.hpp"
#include "shmtwin/series.hpp"

namespace shmtwin::nbiot {

void EnergyParams::validate() const {
  for (double v : {e_acq1s_mj, e_sd_wr_mj, e_c_1tx_mj, e_pkt_tx_mj, e_cdrx_disc_mj, i_sleep_ua, v_s})
    if (!(v > 0.0)) throw InvalidArgument("energy parameters must be positive");
  for (std::size_t i = 0; i < payload_energy_table.size(); ++i) {
    if (!(payload_energy_table[i].energy_j > 0.0) || payload_energy_table[i].payload_bytes == 0)
      throw InvalidArgument("payload table entries must be positive");
    if (i > 0 && payload_energy_table[i].payload_bytes <= payload_energy_table[i - 1].payload_bytes)
      throw InvalidArgument("payload table must be strictly increasing in payload");
  }
  for (auto c : {CoverageClass::GOOD, CoverageClass::MEDIUM, CoverageClass::BAD}) {
    auto it = coverage_multiplier.find(c);
    if (it == coverage_multiplier.end() || !(it->second > 0.0))
      throw InvalidArgument(std::string("missing or non-positive multiplier for ") + to_string(c));
  }
}

double epb(std::uint64_t payload_bytes, double energy_j) {
  if (payload_bytes == 0) throw InvalidArgument("payload must be > 0 bytes");
  return energy_j * 1e6 / (8.0 * static_cast<double>(payload_bytes));
}

std::vector<Packet> packetize(std::span<const std::int16_t> samples, std::uint32_t session_id) {
  if (samples.empty()) throw InvalidArgument("cannot packetize an empty series");
  const std::size_t n = (samples.size() + kSamplesPerPacket - 1) / kSamplesPerPacket;
  std::vector<Packet> out(n);
  for (std::size_t i = 0; i < n; ++i) {
    auto& p = out[i];
    p.session_id = session_id;
    p.seq = static_cast<std::uint32_t>(i);
    const std::size_t begin = i * kSamplesPerPacket;
    const std::size_t len = std::min(kSamplesPerPacket, samples.size() - begin);
    std::copy_n(samples.begin() + static_cast<std::ptrdiff_t>(begin), len, p.samples.begin());
    p.pad_samples = static_cast<std::uint16_t>(kSamplesPerPacket - len);
  }
  return out;
}

std::vector<std::int16_t> unpad_concat(std::span<const Packet> packets) {
  std::vector<const Packet*> order;
  for (const auto& p : packets) order.push_back(&p);
  std::ranges::sort(order, {}, [](const Packet* p) { return p->seq; });
  std::vector<std::int16_t> out;
  for (const auto* p : order) {
    auto pl = p->payload();
    out.insert(out.end(), pl.begin(), pl.end());
  }
  return out;
}

std::array<std::uint8_t, kPayloadBytes> encode_payload(const Packet& p) {
  std::array<std::uint8_t, kPayloadBytes> bytes{};
  for (std::size_t i = 0; i < kSamplesPerPacket; ++i) {
    const auto u = std::bit_cast<std::uint16_t>(p.samples[i]);
    bytes[2 * i] = static_cast<std::uint8_t>(u & 0xFF);
    bytes[2 * i + 1] = static_cast<std::uint8_t>(u >> 8);
  }
  return bytes;
}

Packet decode_payload(std::span<const std::uint8_t> bytes, std::uint32_t session_id,
                      std::uint32_t seq, std::uint16_t pad_samples) {
  if (bytes.size() != kPayloadBytes)
    throw InvalidArgument("payload must be exactly " + std::to_string(kPayloadBytes) + " bytes");
  if (pad_samples > kSamplesPerPacket) throw InvalidArgument("pad exceeds packet length");
  Packet p;
  p.session_id = session_id;
  p.seq = seq;
  p.pad_samples = pad_samples;
  for (std::size_t i = 0; i < kSamplesPerPacket; ++i) {
    const auto u = static_cast<std::uint16_t>(bytes[2 * i] | (bytes[2 * i + 1] << 8));
    p.samples[i] = std::bit_cast<std::int16_t>(u);
  }
  return p;
}

double lognormal_sigma_for_p95(double ratio) {
  constexpr double z95 = 1.6448536269514722;
  const double disc = z95 * z95 - 2.0 * std::log(ratio);
  if (!(ratio > 1.0) || disc < 0.0)
    throw InvalidArgument("p95/mean ratio must lie in (1, exp(z^2/2)]");
  return z95 - std::sqrt(disc);
}

double session_energy_j(std::size_t n_packets, CoverageClass coverage, const EnergyParams& params) {
  if (n_packets == 0) return 0.0;
  const double mj = params.e_c_1tx_mj + params.e_cdrx_disc_mj +
                    static_cast<double>(n_packets - 1) * params.e_pkt_tx_mj;
  return params.multiplier(coverage) * mj * 1e-3;
}

UplinkRecord uplink_session(std::span<const Packet> packets, CoverageClass coverage,
                            const EnergyParams& params, const UplinkOptions& opts,
                            std::uint64_t seed) {
  if (packets.empty()) throw InvalidArgument("uplink session needs at least one packet");
  params.validate();
  if (opts.mode == UplinkMode::stochastic && !(opts.sigma >= 0.0))
    throw InvalidArgument("dispersion sigma must be >= 0");

  const double mult = params.multiplier(coverage);
  const int ecl = opts.ecl.contains(coverage) ? opts.ecl.at(coverage) : 0;
  const int retx = coverage == CoverageClass::BAD ? (1 << ecl) : 0;
  const double tail_j = mult * params.e_cdrx_disc_mj * 1e-3;

  std::mt19937_64 rng(derive_seed(seed, 0x0b1d));
  std::normal_distribution<double> gauss(0.0, 1.0);

  UplinkRecord rec;
  rec.coverage = coverage;
  RadioStateMachine radio(RadioState::PSM);
  radio.step(RadioEvent::wake);

  double t = opts.start_s;
  for (std::size_t i = 0; i < packets.size(); ++i) {
    const bool last = i + 1 == packets.size();
    const double tx_j = mult * (i == 0 ? params.e_c_1tx_mj : params.e_pkt_tx_mj) * 1e-3;
    const double mean_j = tx_j + (last ? tail_j : 0.0);
    double energy = mean_j;
    if (opts.mode == UplinkMode::stochastic)
      energy = mean_j * std::exp(opts.sigma * gauss(rng) - 0.5 * opts.sigma * opts.sigma);

    PacketTx tx;
    tx.session_id = packets[i].session_id;
    tx.seq = packets[i].seq;
    tx.start_s = t;
    tx.airtime_s = (i == 0 ? opts.airtime.first_packet_s : opts.airtime.per_packet_s) * (1 + retx);
    tx.energy_j = energy;
    tx.retransmissions = retx;
    rec.packets.push_back(tx);

    const double scale = energy / mean_j;
    rec.phases.push_back({radio.state(), t, tx.airtime_s, tx_j * scale});
    t += tx.airtime_s;
    if (last) {
      radio.step(RadioEvent::tx_done);
      rec.phases.push_back({radio.state(), t, opts.airtime.cdrx_disc_s, tail_j * scale});
      t += opts.airtime.cdrx_disc_s;
      radio.step(RadioEvent::inactivity);
    }
  }
  for (const auto& p : rec.packets) rec.total_energy_j += p.energy_j;
  rec.duration_s = t - opts.start_s;
  return rec;
}

}  // namespace shmtwin::nbiot
