// Acceptance checks 1-10. One [PASS]/[FAIL] line per criterion; exit status
// is nonzero when any selected criterion fails.
//
//   shmtwin_acceptance               all criteria
//   shmtwin_acceptance --criterion N one criterion

#include <algorithm>
#include <array>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <functional>
#include <map>
#include <numbers>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "shmtwin/dsp.hpp"
#include "shmtwin/energy.hpp"
#include "shmtwin/modal.hpp"
#include "shmtwin/nbiot.hpp"
#include "shmtwin/scenario.hpp"
#include "shmtwin/series.hpp"
#include "shmtwin/synth.hpp"

using namespace shmtwin;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << " FAILED{" << what << "}";
    }
  }
  template <class T>
  void note(const std::string& key, const T& v) {
    detail << ' ' << key << '=' << v;
  }
};

bool within_rel(double got, double ref, double frac) { return std::abs(got - ref) <= frac * std::abs(ref); }

std::string fmt(double v) { return format_double(v); }

Outcome criterion1() {
  Outcome o;
  const nbiot::EnergyParams p;
  const std::array<double, 6> ref{8912, 507.7, 235.1, 99.29, 49.07, 42.48};
  for (std::size_t i = 0; i < ref.size(); ++i) {
    const auto& row = p.payload_energy_table[i];
    const double got = nbiot::epb(row.payload_bytes, row.energy_j);
    o.note("epb_" + std::to_string(row.payload_bytes) + "B", fmt(got));
    o.check(within_rel(got, ref[i], 0.005), "epb " + std::to_string(row.payload_bytes) + " B");
  }
  return o;
}

Outcome criterion2() {
  Outcome o;
  const nbiot::EnergyParams p;
  const energy::SessionPlan plan;
  const auto b = energy::energy_day(plan, p);
  const double years = energy::battery_life_days(plan, energy::battery_preset("vl34570"), p) / 365.0;
  o.note("n_pkt", b.n_pkt);
  o.note("e_tx_j", fmt(b.e_tx_j));
  o.note("e_acq_j", fmt(b.e_acq_j));
  o.note("e_day_j", fmt(b.e_day_j));
  o.note("life_y", fmt(years));
  o.check(b.n_pkt == 10, "N_pkt");
  o.check(within_rel(b.e_tx_j, 5.334, 0.001), "E_TX");
  o.check(within_rel(b.e_acq_j, 3.441, 0.001), "E_acq");
  o.check(within_rel(b.e_day_j, 61.998, 0.01), "E_day");
  o.check(within_rel(years, 3.18, 0.02), "battery life");
  return o;
}

Outcome criterion3() {
  Outcome o;
  const nbiot::EnergyParams p;
  auto s = scenario::preset_scenario("table3");
  s.plan.k_acq = 6.0;
  const double model = energy::window_model_energy(s.plan, p, 1000.0, 1);

  const auto stages = dsp::design_decimator(s.decimator);
  const auto rec = scenario::acquire(s, s.structure, derive_seed(s.seed, 10), stages);
  const auto packets = nbiot::packetize(rec.samples, 0);
  const auto v = energy::validate_window(energy::simulate_window_trace(packets, s.plan, p), s.plan, p);
  o.note("model_j", fmt(model));
  o.note("trace_j", fmt(v.e_measured_j));
  o.note("packets", packets.size());
  o.check(within_rel(model, 8.613, 0.005), "model energy");
  o.check(within_rel(v.e_measured_j, 8.535, 0.015), "trace energy");
  return o;
}

Outcome criterion4() {
  Outcome o;
  const nbiot::EnergyParams p;
  const auto cell = energy::battery_preset("ls336000");
  energy::SessionPlan ten;
  ten.n_sessions_per_day = 1;
  ten.t_acq_s = 420;
  const double years = energy::battery_life_days(ten, cell, p) / 365.0;
  const auto bytes = energy::daily_uplink_bytes(ten);
  energy::SessionPlan heavy;
  heavy.n_sessions_per_day = 6;
  heavy.t_acq_s = 1200;
  const double days = energy::battery_life_days(heavy, cell, p);
  o.note("cell_j", fmt(cell.capacity_j));
  o.note("life_1x420s_y", fmt(years));
  o.note("uplink_bytes", bytes);
  o.note("life_6x1200s_d", fmt(days));
  o.check(years >= 10.0, "lifetime >= 10 y");
  o.check(bytes == 84000, "84 kB/day");
  o.check(within_rel(days, 214.0, 0.20), "214 d within 20%");
  return o;
}

Outcome criterion5() {
  Outcome o;
  const dsp::DecimatorSpec spec;
  const auto stages = dsp::design_decimator(spec);
  const auto rep = dsp::measure_response(stages, spec.f_in_hz, spec.passband_edge_frac * spec.cutoff_hz);
  o.note("stages", stages.size());
  o.note("decim", dsp::total_decimation(stages));
  o.note("taps", rep.total_coeffs);
  o.note("ripple_db", fmt(rep.passband_ripple_db));
  o.note("atten_db", fmt(rep.stopband_atten_db));
  o.check(stages.size() == 6, "6 stages");
  o.check(dsp::total_decimation(stages) == 256, "decimation 256");
  o.check(rep.total_coeffs <= 1000, "<= 1000 taps");
  o.check(rep.passband_ripple_db <= 0.1, "ripple");
  o.check(rep.stopband_atten_db >= 60.0, "attenuation");

  // Full-scale 90 Hz tone through a 16-bit converter so the converter floor
  // sits below the threshold being tested.
  const synth::AdcSpec adc{16, 3.3, spec.f_in_hz};
  const auto sensor = synth::sensor_preset("ideal");
  const auto n = static_cast<std::size_t>(adc.f_os_hz * 20.0);
  Series accel{std::vector<double>(n), adc.f_os_hz, "g"};
  for (std::size_t i = 0; i < n; ++i)
    accel.samples[i] = 0.99 * sensor.full_scale_g *
                       std::sin(2.0 * std::numbers::pi * 90.0 * static_cast<double>(i) / adc.f_os_hz);
  const auto out = dsp::run_chain(synth::quantize(synth::apply_sensor(accel, sensor, 1), adc), stages,
                                  dsp::OutputScale::from(adc, sensor));
  double peak = 0.0;
  for (std::size_t i = 100; i < out.size(); ++i)
    peak = std::max(peak, std::abs(static_cast<double>(out.samples[i])));
  const double dbfs = 20.0 * std::log10(std::max(peak, 0.5) / 32768.0);
  o.note("tone_90hz_dbfs", fmt(dbfs));
  o.check(dbfs <= -60.0, "90 Hz residual");
  return o;
}

Outcome criterion6() {
  Outcome o;
  const auto stages = dsp::design_decimator(dsp::DecimatorSpec{});
  const auto r = dsp::measure_enob(stages, synth::AdcSpec{}, synth::sensor_preset("lis344alh"), 10.0);
  o.note("enob_bits", fmt(r.enob_bits));
  o.note("sinad_db", fmt(r.sinad_db));
  o.note("gap_to_16_bits", fmt(16.0 - r.enob_bits));
  o.check(r.enob_bits >= 15.0, "ENOB >= 15");
  return o;
}

Outcome criterion7() {
  Outcome o;
  const std::array<double, 4> truth{2.807, 8.379, 13.125, 16.052};
  auto s = scenario::preset_scenario("no_damage");
  const auto stages = dsp::design_decimator(s.decimator);
  double worst = 0.0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const auto rec = scenario::acquire(s, "NO_DAMAGE", seed, stages);
    const auto est = modal::detect_peaks(modal::compute_spectrum(rec), 4);
    if (est.peaks.size() != 4) {
      o.check(false, "seed " + std::to_string(seed) + " found " + std::to_string(est.peaks.size()) + " modes");
      continue;
    }
    for (std::size_t k = 0; k < 4; ++k) {
      const double err = std::abs(est.peaks[k].freq_hz - truth[k]) / truth[k];
      worst = std::max(worst, err);
      if (err > 0.001) o.check(false, "seed " + std::to_string(seed) + " mode " + std::to_string(k + 1));
    }
  }
  o.note("seeds", 20);
  o.note("record_s", fmt(s.plan.t_acq_s));
  o.note("worst_err_pct", fmt(100.0 * worst));
  return o;
}

Outcome criterion8() {
  Outcome o;
  struct Case {
    const char* preset;
    double shift;
    double tol;
    modal::Verdict verdict;
  };
  for (const auto& c : {Case{"damage_1", -0.089, 0.01, modal::Verdict::LIGHT},
                        Case{"damage_2", -0.523, 0.02, modal::Verdict::MODERATE}}) {
    const auto r = scenario::run_scenario(scenario::preset_scenario(c.preset), false);
    const double shift = r.damage.per_mode.empty() || r.damage.per_mode[0].missing
                             ? std::nan("")
                             : r.damage.per_mode[0].shift_hz;
    o.note(std::string(c.preset) + "_shift_hz", fmt(shift));
    o.note(std::string(c.preset) + "_verdict", modal::to_string(r.damage.verdict));
    o.check(std::abs(shift - c.shift) <= c.tol, std::string(c.preset) + " shift");
    o.check(r.damage.verdict == c.verdict, std::string(c.preset) + " verdict");
  }
  return o;
}

Outcome criterion9() {
  Outcome o;
  const energy::HarvesterSpec h{72.0, 15.0, 4.0, 0.25};
  const double wh = energy::harvest_day_wh(h);
  const auto n = energy::energy_neutral(energy::SessionPlan{}, h, nbiot::EnergyParams{});
  o.note("harvest_wh", fmt(wh));
  o.note("margin", fmt(n.margin_ratio));
  o.check(std::abs(wh - 3.24) <= 1e-12, "3.24 Wh");
  o.check(n.margin_ratio >= 100.0, "margin >= 100x");
  return o;
}

Outcome criterion10() {
  Outcome o;
  std::mt19937_64 rng(2024);

  // Packetize round trip.
  std::uniform_int_distribution<std::size_t> len(1, 20000);
  std::uniform_int_distribution<int> val(-32768, 32767);
  int rt_fail = 0;
  for (int t = 0; t < 200; ++t) {
    std::vector<std::int16_t> x(len(rng));
    for (auto& v : x) v = static_cast<std::int16_t>(val(rng));
    if (nbiot::unpad_concat(nbiot::packetize(x, 0)) != x) ++rt_fail;
  }
  o.note("roundtrip_fail", rt_fail);
  o.check(rt_fail == 0, "packetize round trip");

  // State machine: 10^4 random events; every state reached must be the target
  // of a legal edge or the unchanged state after an audited illegal event.
  using S = nbiot::RadioState;
  using E = nbiot::RadioEvent;
  const std::map<std::pair<S, E>, S> legal{
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
  nbiot::RadioStateMachine m;
  S expect = S::OFF;
  std::size_t illegal = 0, mismatches = 0;
  std::uniform_int_distribution<std::size_t> pick(0, nbiot::kAllEvents.size() - 1);
  for (int i = 0; i < 10000; ++i) {
    const auto e = nbiot::kAllEvents[pick(rng)];
    const auto it = legal.find({expect, e});
    if (it == legal.end())
      ++illegal;
    else
      expect = it->second;
    if (m.step(e) != expect) ++mismatches;
  }
  o.note("sm_mismatch", mismatches);
  o.check(mismatches == 0 && m.audit().size() == illegal, "state machine closure");

  // Closed-form lifetime vs day-by-day drain over 20 plans.
  const nbiot::EnergyParams p;
  const auto cell = energy::battery_preset("ls336000");
  double worst = 0.0;
  for (int s : {1, 2, 4, 6})
    for (double t : {60.0, 180.0, 420.0, 780.0, 1200.0}) {
      energy::SessionPlan plan;
      plan.n_sessions_per_day = s;
      plan.t_acq_s = t;
      const double n = std::ceil(t * plan.f_s_hz / 650.0 - 1e-9);
      const double session_j = n * (plan.k_acq * 52.596 + 2.1816) * 1e-3 +
                               (659.72 + 616.97 + (n - 1) * 450.83) * 1e-3;
      const double active = s * (plan.k_acq * n + plan.tx_duration_s);
      const double day_j = s * session_j + (86400.0 - active) * 3.3 * 34e-6;
      double left = cell.capacity_j, days = 0.0;
      while (left >= day_j) left -= day_j, days += 1.0;
      days += left / day_j;
      worst = std::max(worst, std::abs(energy::battery_life_days(plan, cell, p) - days) / days);
    }
  o.note("lifetime_worst_rel", fmt(worst));
  o.check(worst <= 0.01, "lifetime oracle");

  // EPB strictly decreasing with payload across the table.
  bool mono = true;
  for (std::size_t i = 1; i < p.payload_energy_table.size(); ++i) {
    const auto& a = p.payload_energy_table[i - 1];
    const auto& b = p.payload_energy_table[i];
    mono = mono && nbiot::epb(b.payload_bytes, b.energy_j) < nbiot::epb(a.payload_bytes, a.energy_j);
  }
  o.check(mono, "EPB monotonicity");
  return o;
}

const std::vector<std::pair<const char*, std::function<Outcome()>>>& criteria() {
  static const std::vector<std::pair<const char*, std::function<Outcome()>>> c{
      {"payload energy per bit", criterion1},
      {"daily budget chain", criterion2},
      {"1000 s validation window", criterion3},
      {"ten-year lifetime", criterion4},
      {"decimation filter compliance", criterion5},
      {"effective number of bits", criterion6},
      {"modal accuracy over 20 seeds", criterion7},
      {"damage detection", criterion8},
      {"solar harvesting margin", criterion9},
      {"property suites", criterion10},
  };
  return c;
}

}  // namespace

int main(int argc, char** argv) {
  int only = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      only = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  if (only < 0 || only > static_cast<int>(criteria().size())) {
    std::fprintf(stderr, "criterion must be 1..%zu\n", criteria().size());
    return 2;
  }

  int failed = 0;
  for (std::size_t i = 0; i < criteria().size(); ++i) {
    if (only != 0 && static_cast<int>(i) + 1 != only) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = criteria()[i].second();
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::printf("[%s] criterion %zu: %s%s runtime_s=%.3f\n", o.pass ? "PASS" : "FAIL", i + 1,
                criteria()[i].first, o.detail.str().c_str(), secs);
    failed += o.pass ? 0 : 1;
  }
  return failed == 0 ? 0 : 1;
}
