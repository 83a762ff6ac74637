#include "shmtwin/repro.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <ostream>
#include <random>

#include "shmtwin/energy.hpp"
#include "shmtwin/error.hpp"
#include "shmtwin/modal.hpp"
#include "shmtwin/nbiot.hpp"
#include "shmtwin/scenario.hpp"

namespace shmtwin::repro {
namespace {

using nbiot::CoverageClass;

Row rel(std::string item, double ref, double got, double pct) {
  const bool ok = std::abs(got - ref) <= pct / 100.0 * std::abs(ref);
  return {std::move(item), ref, got, "rel " + format_double(pct) + "%", ok};
}

Row abs_tol(std::string item, double ref, double got, double tol) {
  return {std::move(item), ref, got, "abs " + format_double(tol), std::abs(got - ref) <= tol};
}

Row at_least(std::string item, double ref, double got) {
  return {std::move(item), ref, got, ">= " + format_double(ref), got >= ref};
}

Row exact(std::string item, double ref, double got) {
  return {std::move(item), ref, got, "exact", got == ref};
}

Result table1() {
  Result r{"table1", {}};
  const nbiot::EnergyParams p;
  const std::array<double, 6> ref_epb{8912, 507.7, 235.1, 99.29, 49.07, 42.48};
  for (std::size_t i = 0; i < p.payload_energy_table.size(); ++i) {
    const auto& row = p.payload_energy_table[i];
    r.rows.push_back(rel("epb_uj_per_bit_" + std::to_string(row.payload_bytes) + "B", ref_epb[i],
                         nbiot::epb(row.payload_bytes, row.energy_j), 0.5));
  }
  const double ratio = nbiot::epb(500, 0.9405) / nbiot::epb(10800, 3.6702);
  r.rows.push_back(rel("epb_ratio_500B_over_10800B", 5.53, ratio, 0.5));
  return r;
}

Result table2_check() {
  Result r{"table2_check", {}};
  const nbiot::EnergyParams p;
  r.rows.push_back(exact("e_acq1s_mj", 52.596, p.e_acq1s_mj));
  r.rows.push_back(exact("e_sd_wr_mj", 2.1816, p.e_sd_wr_mj));
  r.rows.push_back(exact("e_c_1tx_mj", 659.72, p.e_c_1tx_mj));
  r.rows.push_back(exact("e_pkt_tx_mj", 450.83, p.e_pkt_tx_mj));
  r.rows.push_back(exact("e_cdrx_disc_mj", 616.97, p.e_cdrx_disc_mj));
  r.rows.push_back(rel("e_tx_10pkt_j", 5.334, energy::energy_transmission(10, p), 0.1));
  r.rows.push_back(rel("e_acq_10pkt_k6.5_j", 3.441, energy::energy_acquisition(10, p, 6.5), 0.1));
  r.rows.push_back(rel("e_acq_10pkt_k6_j", 3.178, energy::energy_acquisition(10, p, 6.0), 0.1));
  r.rows.push_back(rel("e_tx_1pkt_j", 1.27669, energy::energy_transmission(1, p), 0.01));
  r.rows.push_back(rel("sleep_power_uw", 112.2, p.sleep_power_w() * 1e6, 0.01));
  return r;
}

Result table3() {
  Result r{"table3", {}};
  const nbiot::EnergyParams p;
  const energy::SessionPlan plan;  // 6 x 60 s, k = 6.5
  const auto cell = energy::battery_preset("vl34570");
  const auto b = energy::energy_day(plan, p);
  r.rows.push_back(exact("n_sessions", 6, plan.n_sessions_per_day));
  r.rows.push_back(exact("t_acq_s", 60, plan.t_acq_s));
  r.rows.push_back(exact("t_active_s", 546, b.t_active_s));
  r.rows.push_back(exact("t_sleep_s", 85854, b.t_sleep_s));
  r.rows.push_back(rel("e_tx_j", 5.334, b.e_tx_j, 0.1));
  r.rows.push_back(rel("e_acq_j", 3.441, b.e_acq_j, 0.1));
  r.rows.push_back(rel("e_day_j", 61.998, b.e_day_j, 1.0));
  r.rows.push_back(rel("e_cell_j", 71928, cell.capacity_j, 1e-9));
  r.rows.push_back(rel("battery_life_years", 3.18,
                       energy::battery_life_days(plan, cell, p) / energy::kDaysPerYear, 2.0));
  r.rows.push_back(exact("n_pkt", 10, static_cast<double>(b.n_pkt)));
  r.rows.push_back(rel("e_day_mwh", 17.22, energy::joules_to_wh(b.e_day_j) * 1e3, 1.0));
  return r;
}

Result table5(const std::filesystem::path& dir) {
  Result r{"table5", {}};
  auto s = scenario::preset_scenario("no_damage");
  const auto stages = dsp::design_decimator(s.decimator);
  const auto rec = scenario::acquire(s, "NO_DAMAGE", derive_seed(s.seed, 10), stages);
  const auto spec = modal::compute_spectrum(rec);
  const auto est = modal::detect_peaks(spec, 4);
  if (!dir.empty()) {
    modal::write_spectrum_csv(dir / "table5_spectrum.csv", spec, 25.0);
    modal::write_peaks_csv(dir / "table5_peaks.csv", est);
  }
  const std::array<double, 4> reference_hz{2.807, 8.379, 13.125, 16.052};
  for (std::size_t i = 0; i < reference_hz.size(); ++i) {
    const double got = i < est.peaks.size() ? est.peaks[i].freq_hz : std::nan("");
    r.rows.push_back(rel("mode_" + std::to_string(i + 1) + "_hz", reference_hz[i], got, 0.1));
  }
  return r;
}

Result fig5(const std::filesystem::path& dir) {
  Result r{"fig5", {}};
  const nbiot::EnergyParams p;
  const auto cell = energy::battery_preset("ls336000");
  energy::SessionPlan base;
  const std::array sessions{1, 2, 4, 6};
  const auto curve = energy::lifetime_curve(base, cell, p, sessions);
  if (!dir.empty()) energy::write_lifetime_csv(dir / "fig5_lifetime.csv", curve);

  bool monotone = true;
  for (std::size_t i = 1; i < curve.size(); ++i)
    if (curve[i].n_sessions == curve[i - 1].n_sessions &&
        !(curve[i].lifetime_days < curve[i - 1].lifetime_days))
      monotone = false;
  r.rows.push_back(exact("lifetime_decreases_with_t_acq", 1, monotone ? 1 : 0));

  energy::SessionPlan ten = base;
  ten.n_sessions_per_day = 1;
  ten.t_acq_s = 420;
  r.rows.push_back(at_least("lifetime_years_1x420s", 10.0,
                            energy::battery_life_days(ten, cell, p) / energy::kDaysPerYear));
  r.rows.push_back(exact("daily_uplink_bytes_1x420s", 84000,
                         static_cast<double>(energy::daily_uplink_bytes(ten))));
  r.rows.push_back(exact("n_pkt_420s", 65, static_cast<double>(energy::n_packets(ten))));

  energy::SessionPlan heavy = base;
  heavy.n_sessions_per_day = 6;
  heavy.t_acq_s = 1200;
  r.rows.push_back(rel("lifetime_days_6x1200s", 214, energy::battery_life_days(heavy, cell, p), 20.0));
  return r;
}

Result fig3_classes() {
  Result r{"fig3_classes", {}};
  const nbiot::EnergyParams p;
  const double good_1300 = p.payload_energy_table[3].energy_j;
  r.rows.push_back(rel("bad_mean_energy_j", 4.071, good_1300 * p.multiplier(CoverageClass::BAD), 5.0));
  r.rows.push_back(rel("bad_over_good", 3.8,
                       p.multiplier(CoverageClass::BAD) / p.multiplier(CoverageClass::GOOD), 1e-9));
  r.rows.push_back(rel("bad_over_medium", 2.8,
                       p.multiplier(CoverageClass::BAD) / p.multiplier(CoverageClass::MEDIUM), 1e-9));
  r.rows.push_back(exact("class_at_-95dBm_is_medium", 1,
                         nbiot::classify_coverage(-95.0) == CoverageClass::MEDIUM));
  r.rows.push_back(exact("class_at_-110dBm_is_bad", 1,
                         nbiot::classify_coverage(-110.0) == CoverageClass::BAD));
  r.rows.push_back(exact("class_at_-75dBm_is_good", 1,
                         nbiot::classify_coverage(-75.0) == CoverageClass::GOOD));

  // Dispersion: single-packet sessions in GOOD coverage, p95 relative to mean.
  nbiot::UplinkOptions opts;
  opts.mode = nbiot::UplinkMode::stochastic;
  const std::vector<nbiot::Packet> one(1);
  std::vector<double> e;
  for (std::uint64_t k = 0; k < 20000; ++k)
    e.push_back(nbiot::uplink_session(one, CoverageClass::GOOD, p, opts, k).total_energy_j);
  double mean = 0.0;
  for (double v : e) mean += v;
  mean /= static_cast<double>(e.size());
  std::ranges::sort(e);
  const double p95 = e[static_cast<std::size_t>(0.95 * static_cast<double>(e.size()))];
  r.rows.push_back(rel("stochastic_p95_over_mean", 2.0, p95 / mean, 5.0));
  r.rows.push_back(rel("stochastic_mean_j", nbiot::session_energy_j(1, CoverageClass::GOOD, p), mean, 2.0));
  return r;
}

Result validation_window() {
  Result r{"validation_window", {}};
  const nbiot::EnergyParams p;
  auto s = scenario::preset_scenario("table3");
  s.plan.k_acq = 6.0;

  r.rows.push_back(rel("model_energy_j", 8.613, energy::window_model_energy(s.plan, p, 1000.0, 1), 0.5));

  // End to end: the session's packets come from the acquisition chain.
  const auto stages = dsp::design_decimator(s.decimator);
  const auto rec = scenario::acquire(s, "NO_DAMAGE", derive_seed(s.seed, 10), stages);
  const auto packets = nbiot::packetize(rec.samples, 0);
  const auto trace = energy::simulate_window_trace(packets, s.plan, p);
  const auto v = energy::validate_window(trace, s.plan, p);
  r.rows.push_back(rel("trace_energy_j", 8.535, v.e_measured_j, 1.5));

  energy::TraceOptions sleep_only;
  sleep_only.session_starts_s.clear();
  const auto idle = energy::validate_window(energy::simulate_window_trace({}, s.plan, p, sleep_only),
                                            s.plan, p, 1000.0, 0);
  r.rows.push_back(rel("all_sleep_trace_j", 0.1122, idle.e_measured_j, 0.1));
  r.rows.push_back(abs_tol("all_sleep_error_pct", 0.0, idle.error_pct, 1e-6));
  return r;
}

}  // namespace

bool Result::all_pass() const {
  return std::ranges::all_of(rows, &Row::pass);
}

const std::vector<std::string>& targets() {
  static const std::vector<std::string> t{"table1", "table2_check",  "table3",           "table5",
                                          "fig5",   "fig3_classes", "validation_window"};
  return t;
}

Result run(const std::string& target, const std::filesystem::path& artifacts_dir) {
  if (!artifacts_dir.empty()) std::filesystem::create_directories(artifacts_dir);
  if (target == "table1") return table1();
  if (target == "table2_check") return table2_check();
  if (target == "table3") return table3();
  if (target == "table5") return table5(artifacts_dir);
  if (target == "fig5") return fig5(artifacts_dir);
  if (target == "fig3_classes") return fig3_classes();
  if (target == "validation_window") return validation_window();
  throw InvalidArgument("unknown repro target: " + target);
}

void write_csv(std::ostream& out, const Result& r, bool header) {
  if (header) out << "target,item,reference,computed,tolerance,status\n";
  for (const auto& row : r.rows)
    out << r.target << ',' << row.item << ',' << format_double(row.reference) << ','
        << format_double(row.computed) << ',' << row.tolerance << ','
        << (row.pass ? "PASS" : "FAIL") << '\n';
}

}  // namespace shmtwin::repro
