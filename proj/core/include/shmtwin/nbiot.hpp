#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

/// NB-IoT radio behavior: protocol states, coverage classes, uplink energy,
/// packetization and a lossy sink.
namespace shmtwin::nbiot {

// ---------------------------------------------------------------- states

enum class RadioState { OFF, ATTACHING, CONNECTED_TX, CONNECTED_EDRX, IDLE_EDRX, PSM };

enum class RadioEvent {
  power_on,
  attach_done,
  tx_request,
  tx_done,
  inactivity,
  t3324_expiry,
  t3412_expiry,
  paging,
  downlink,
  wake,
};

inline constexpr std::array kAllStates{RadioState::OFF,           RadioState::ATTACHING,
                                       RadioState::CONNECTED_TX,  RadioState::CONNECTED_EDRX,
                                       RadioState::IDLE_EDRX,     RadioState::PSM};
inline constexpr std::array kAllEvents{
    RadioEvent::power_on,     RadioEvent::attach_done,  RadioEvent::tx_request,
    RadioEvent::tx_done,      RadioEvent::inactivity,   RadioEvent::t3324_expiry,
    RadioEvent::t3412_expiry, RadioEvent::paging,       RadioEvent::downlink,
    RadioEvent::wake};

const char* to_string(RadioState s) noexcept;
const char* to_string(RadioEvent e) noexcept;

/// Legal transition target, or nullopt when the event is not accepted in
/// this state. PSM + wake resumes the saved context without re-attaching;
/// PSM + t3412_expiry starts a tracking area update through ATTACHING.
std::optional<RadioState> next_state(RadioState state, RadioEvent event) noexcept;

struct TimerConfig {
  double t3324_s = 20.0;       // active timer: time in I-eDRX before PSM
  double t3412_s = 86400.0;    // extended timer: TAU period
  double cedrx_cycle_s = 2.048;
  double iedrx_cycle_s = 5.12;

  static constexpr double kMaxT3412 = 413.0 * 86400.0;
  static constexpr double kMinEdrx = 0.256;
  static constexpr double kMaxEdrx = 9.216;

  void validate() const;
  bool operator==(const TimerConfig&) const = default;
};

struct AuditRecord {
  std::size_t index = 0;  // position in the event stream
  RadioState state{};
  RadioEvent event{};
};

/// One node's protocol state machine. Illegal events are no-ops that leave
/// an audit record.
class RadioStateMachine {
 public:
  explicit RadioStateMachine(RadioState initial = RadioState::OFF) : state_(initial) {}

  RadioState step(RadioEvent event);
  RadioState state() const noexcept { return state_; }
  const std::vector<AuditRecord>& audit() const noexcept { return audit_; }
  std::size_t events_seen() const noexcept { return seen_; }

 private:
  RadioState state_;
  std::vector<AuditRecord> audit_;
  std::size_t seen_ = 0;
};

/// Free-function form of RadioStateMachine::step.
RadioState step(RadioState state, RadioEvent event);

// -------------------------------------------------------------- coverage

enum class CoverageClass { GOOD, MEDIUM, BAD };

const char* to_string(CoverageClass c) noexcept;
CoverageClass parse_coverage(const std::string& name);

inline constexpr double kGoodAboveDbm = -95.0;
inline constexpr double kBadAtOrBelowDbm = -110.0;

/// GOOD above -95 dBm, BAD at or below -110 dBm, MEDIUM in between.
/// Boundary values fall in the worse class.
CoverageClass classify_coverage(double rssi_dbm);

// ---------------------------------------------------------------- energy

struct PayloadEnergy {
  std::uint32_t payload_bytes = 0;
  double energy_j = 0.0;
};

/// Measured energy constants of the BC95-G based node.
struct EnergyParams {
  double e_acq1s_mj = 52.596;
  double e_sd_wr_mj = 2.1816;
  double e_c_1tx_mj = 659.72;
  double e_pkt_tx_mj = 450.83;
  double e_cdrx_disc_mj = 616.97;
  double i_sleep_ua = 34.0;
  double v_s = 3.3;
  std::vector<PayloadEnergy> payload_energy_table{
      {10, 0.7130}, {200, 0.8123}, {500, 0.9405}, {1300, 1.0326}, {5400, 2.1199}, {10800, 3.6702}};
  std::map<CoverageClass, double> coverage_multiplier{
      {CoverageClass::GOOD, 1.0}, {CoverageClass::MEDIUM, 3.8 / 2.8}, {CoverageClass::BAD, 3.8}};

  void validate() const;
  double multiplier(CoverageClass c) const { return coverage_multiplier.at(c); }
  double sleep_power_w() const noexcept { return v_s * i_sleep_ua * 1e-6; }
};

/// Energy per bit in microjoules. Throws on a zero payload.
double epb(std::uint64_t payload_bytes, double energy_j);

// --------------------------------------------------------------- packets

inline constexpr std::size_t kSamplesPerPacket = 650;
inline constexpr std::size_t kPayloadBytes = 2 * kSamplesPerPacket;

/// 650 signed 16-bit samples (1300 bytes on the wire). Session id and
/// sequence number are simulator metadata, not part of the payload.
struct Packet {
  std::uint32_t session_id = 0;
  std::uint32_t seq = 0;
  std::array<std::int16_t, kSamplesPerPacket> samples{};
  std::uint16_t pad_samples = 0;  // trailing zero samples in the final packet

  bool padded() const noexcept { return pad_samples > 0; }
  std::span<const std::int16_t> payload() const noexcept {
    return std::span(samples).first(kSamplesPerPacket - pad_samples);
  }
};

std::vector<Packet> packetize(std::span<const std::int16_t> samples, std::uint32_t session_id);

/// Concatenation of the unpadded payloads, in sequence order.
std::vector<std::int16_t> unpad_concat(std::span<const Packet> packets);

/// Little-endian wire image of the 1300-byte payload.
std::array<std::uint8_t, kPayloadBytes> encode_payload(const Packet& p);
Packet decode_payload(std::span<const std::uint8_t> bytes, std::uint32_t session_id,
                      std::uint32_t seq, std::uint16_t pad_samples = 0);

// ---------------------------------------------------------------- uplink

enum class UplinkMode { deterministic, stochastic };

/// Lognormal sigma whose 95th percentile equals ratio * mean.
double lognormal_sigma_for_p95(double ratio);

struct AirtimeModel {
  double first_packet_s = 6.0;  // connection setup + first packet
  double per_packet_s = 0.5;
  double cdrx_disc_s = 15.5;    // C-eDRX tail and release
};

struct UplinkOptions {
  UplinkMode mode = UplinkMode::deterministic;
  double sigma = lognormal_sigma_for_p95(2.0);
  std::map<CoverageClass, int> ecl{{CoverageClass::GOOD, 0}, {CoverageClass::MEDIUM, 1},
                                   {CoverageClass::BAD, 2}};
  AirtimeModel airtime{};
  double start_s = 0.0;
};

struct PacketTx {
  std::uint32_t session_id = 0;
  std::uint32_t seq = 0;
  double start_s = 0.0;
  double airtime_s = 0.0;
  double energy_j = 0.0;
  int retransmissions = 0;
  bool delivered = true;
};

/// Contiguous piece of radio activity with a single protocol state.
struct RadioPhase {
  RadioState state{};
  double start_s = 0.0;
  double duration_s = 0.0;
  double energy_j = 0.0;
};

struct UplinkRecord {
  CoverageClass coverage = CoverageClass::GOOD;
  std::vector<PacketTx> packets;
  std::vector<RadioPhase> phases;
  double total_energy_j = 0.0;
  double duration_s = 0.0;
};

/// Energy of one session. Deterministic mode reproduces
/// multiplier * (E_c1tx + E_cdrx_disc + (N-1) E_pkt) exactly; the first packet
/// carries the connection cost and the last carries the C-eDRX/release tail.
UplinkRecord uplink_session(std::span<const Packet> packets, CoverageClass coverage,
                            const EnergyParams& params, const UplinkOptions& opts = {},
                            std::uint64_t seed = 0);

/// Closed-form deterministic session energy for n packets.
double session_energy_j(std::size_t n_packets, CoverageClass coverage, const EnergyParams& params);

// ------------------------------------------------------------------ sink

struct SinkReport {
  std::vector<std::int16_t> samples;  // lost packets are zero-filled
  std::size_t delivered = 0;
  std::vector<std::uint32_t> missing_seqs;
  std::vector<bool> delivered_flags;  // indexed by position in the input
};

/// Drops each packet independently with probability loss_prob and
/// reassembles the rest in sequence order.
SinkReport deliver(std::span<const Packet> packets, double loss_prob, std::uint64_t seed);

struct PacketEvent {
  double timestamp_s = 0.0;
  std::uint32_t node_id = 0;
  std::uint32_t session_id = 0;
  std::uint32_t seq = 0;
  double energy_j = 0.0;
  bool delivered = true;
};

std::vector<PacketEvent> to_events(const UplinkRecord& rec, std::uint32_t node_id,
                                   std::span<const bool> delivered = {});

/// CSV columns: timestamp_s,node_id,session_id,seq,energy_j,delivered
void write_event_log(const std::filesystem::path& path, std::span<const PacketEvent> events);
std::vector<PacketEvent> read_event_log(const std::filesystem::path& path);

struct SessionSummary {
  std::uint32_t node_id = 0;
  std::uint32_t session_id = 0;
  std::size_t packets = 0;
  std::size_t delivered = 0;
  double energy_j = 0.0;
  double first_s = 0.0;
  double last_s = 0.0;
};

/// Single-writer aggregator; events must arrive in non-decreasing timestamp
/// order.
class Sink {
 public:
  void ingest(const PacketEvent& ev);
  std::vector<SessionSummary> sessions() const;
  std::size_t events() const noexcept { return count_; }

 private:
  std::map<std::pair<std::uint32_t, std::uint32_t>, SessionSummary> sessions_;
  double last_ts_ = -1e300;
  std::size_t count_ = 0;
};

}  // namespace shmtwin::nbiot
