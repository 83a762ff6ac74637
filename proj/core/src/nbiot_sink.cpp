#include <algorithm>
#include <charconv>
#include <fstream>
#include <random>
#include <sstream>

#include "shmtwin/error.hpp"
#include "shmtwin/nbiot.hpp"
#include "shmtwin/series.hpp"

namespace shmtwin::nbiot {

SinkReport deliver(std::span<const Packet> packets, double loss_prob, std::uint64_t seed) {
  if (!(loss_prob >= 0.0 && loss_prob < 1.0))
    throw InvalidArgument("loss probability must lie in [0, 1)");
  std::mt19937_64 rng(derive_seed(seed, 0x51c));
  std::bernoulli_distribution drop(loss_prob);

  SinkReport r;
  r.delivered_flags.resize(packets.size());
  for (std::size_t i = 0; i < packets.size(); ++i) r.delivered_flags[i] = !drop(rng);

  std::vector<std::size_t> order(packets.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::ranges::stable_sort(order, {}, [&](std::size_t i) { return packets[i].seq; });

  for (std::size_t i : order) {
    const auto& p = packets[i];
    const auto payload = p.payload();
    if (r.delivered_flags[i]) {
      r.samples.insert(r.samples.end(), payload.begin(), payload.end());
      ++r.delivered;
    } else {
      r.samples.insert(r.samples.end(), payload.size(), 0);
      r.missing_seqs.push_back(p.seq);
    }
  }
  return r;
}

std::vector<PacketEvent> to_events(const UplinkRecord& rec, std::uint32_t node_id,
                                   std::span<const bool> delivered) {
  std::vector<PacketEvent> out;
  out.reserve(rec.packets.size());
  for (std::size_t i = 0; i < rec.packets.size(); ++i) {
    const auto& p = rec.packets[i];
    const bool ok = delivered.empty() ? p.delivered : delivered[i];
    out.push_back({p.start_s, node_id, p.session_id, p.seq, p.energy_j, ok});
  }
  return out;
}

void write_event_log(const std::filesystem::path& path, std::span<const PacketEvent> events) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "timestamp_s,node_id,session_id,seq,energy_j,delivered\n";
  for (const auto& e : events)
    out << format_double(e.timestamp_s) << ',' << e.node_id << ',' << e.session_id << ','
        << e.seq << ',' << format_double(e.energy_j) << ',' << (e.delivered ? 1 : 0) << '\n';
}

std::vector<PacketEvent> read_event_log(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::string line;
  std::getline(in, line);
  if (line != "timestamp_s,node_id,session_id,seq,energy_j,delivered")
    throw Error("unexpected event log header in " + path.string());
  std::vector<PacketEvent> events;
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::vector<std::string> cells;
    std::istringstream ss(line);
    std::string cell;
    while (std::getline(ss, cell, ',')) cells.push_back(cell);
    if (cells.size() != 6)
      throw Error(path.string() + ":" + std::to_string(lineno) + ": expected 6 fields");
    auto num = [&](const std::string& s, auto& v) {
      auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
      if (ec != std::errc{} || p != s.data() + s.size())
        throw Error(path.string() + ":" + std::to_string(lineno) + ": bad field '" + s + "'");
    };
    PacketEvent e;
    int delivered = 0;
    num(cells[0], e.timestamp_s);
    num(cells[1], e.node_id);
    num(cells[2], e.session_id);
    num(cells[3], e.seq);
    num(cells[4], e.energy_j);
    num(cells[5], delivered);
    e.delivered = delivered != 0;
    events.push_back(e);
  }
  return events;
}

void Sink::ingest(const PacketEvent& ev) {
  if (ev.timestamp_s < last_ts_)
    throw InvalidArgument("sink events must arrive in timestamp order (" +
                          format_double(ev.timestamp_s) + " after " + format_double(last_ts_) + ")");
  last_ts_ = ev.timestamp_s;
  ++count_;
  auto [it, fresh] = sessions_.try_emplace({ev.node_id, ev.session_id});
  auto& s = it->second;
  if (fresh) {
    s.node_id = ev.node_id;
    s.session_id = ev.session_id;
    s.first_s = ev.timestamp_s;
  }
  ++s.packets;
  s.delivered += ev.delivered ? 1 : 0;
  s.energy_j += ev.energy_j;
  s.last_s = ev.timestamp_s;
}

std::vector<SessionSummary> Sink::sessions() const {
  std::vector<SessionSummary> out;
  for (const auto& [key, s] : sessions_) out.push_back(s);
  return out;
}

}  // namespace shmtwin::nbiot
