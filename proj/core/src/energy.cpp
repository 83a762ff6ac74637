#include "shmtwin/energy.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>

#include "shmtwin/error.hpp"
#include "shmtwin/series.hpp"

namespace shmtwin::energy {
namespace {

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

}  // namespace

void SessionPlan::validate() const {
  if (n_sessions_per_day < 0) throw InvalidArgument("sessions per day must be >= 0");
  if (n_sessions_per_day > 0 && !(t_acq_s > 0.0))
    throw InvalidArgument("acquisition time must be > 0 s");
  if (!(f_s_hz > 0.0)) throw InvalidArgument("output rate must be > 0");
  if (payload_samples == 0) throw InvalidArgument("payload must hold at least one sample");
  if (!(k_acq > 0.0)) throw InvalidArgument("k_acq must be > 0");
  if (!(tx_duration_s >= 0.0)) throw InvalidArgument("radio duration must be >= 0");
}

void BatterySpec::validate() const {
  if (!(capacity_j > 0.0)) throw InvalidArgument("battery capacity must be > 0 J");
  if (!(derating > 0.0 && derating <= 1.0)) throw InvalidArgument("derating must lie in (0, 1]");
}

BatterySpec battery_preset(const std::string& name) {
  std::string key = name;
  std::ranges::transform(key, key.begin(), [](unsigned char c) { return std::tolower(c); });
  if (key == "ls336000") return {"LS336000", BatterySpec::joules_from_ah(17.0), false, 1.0};
  if (key == "vl34570") return {"VL34570", BatterySpec::joules_from_ah(5.4), true, 1.0};
  throw InvalidArgument("unknown battery preset: " + name);
}

void HarvesterSpec::validate() const {
  for (double v : {area_cm2, density_mw_cm2, sun_h_per_day, loss_frac})
    if (!(v >= 0.0)) throw InvalidArgument("harvester parameters must be >= 0");
  if (!(loss_frac < 1.0)) throw InvalidArgument("harvester loss must be < 1");
  if (sun_h_per_day > 24.0) throw InvalidArgument("sun hours exceed a day");
}

std::size_t n_packets(const SessionPlan& plan) {
  plan.validate();
  const double samples = std::round(plan.t_acq_s * plan.f_s_hz * 1e9) / 1e9;
  return static_cast<std::size_t>(std::ceil(samples / static_cast<double>(plan.payload_samples)));
}

double energy_acquisition(std::size_t n_pkt, const nbiot::EnergyParams& params, double k_acq) {
  const double n = static_cast<double>(n_pkt);
  return (params.e_acq1s_mj * k_acq * n + n * params.e_sd_wr_mj) * 1e-3;
}

double energy_transmission(std::size_t n_pkt, const nbiot::EnergyParams& params,
                           nbiot::CoverageClass coverage) {
  return nbiot::session_energy_j(n_pkt, coverage, params);
}

double session_active_s(const SessionPlan& plan) {
  const auto n = n_packets(plan);
  return n == 0 ? 0.0 : plan.k_acq * static_cast<double>(n) + plan.tx_duration_s;
}

EnergyBreakdown energy_day(const SessionPlan& plan, const nbiot::EnergyParams& params,
                           nbiot::CoverageClass coverage) {
  plan.validate();
  EnergyBreakdown b;
  if (plan.n_sessions_per_day > 0) {
    b.n_pkt = n_packets(plan);
    b.e_acq_j = energy_acquisition(b.n_pkt, params, plan.k_acq);
    b.e_tx_j = energy_transmission(b.n_pkt, params, coverage);
    b.e_tot_j = b.e_acq_j + b.e_tx_j;
    b.t_active_s = plan.n_sessions_per_day * session_active_s(plan);
  }
  if (b.t_active_s > kSecondsPerDay)
    throw InvalidArgument("plan needs " + format_double(b.t_active_s) +
                          " s of activity per day, more than 86400 s");
  b.t_sleep_s = kSecondsPerDay - b.t_active_s;
  b.e_sleep_j = b.t_sleep_s * params.sleep_power_w();
  b.e_day_j = b.e_tot_j * plan.n_sessions_per_day + b.e_sleep_j;
  return b;
}

double battery_life_days(const SessionPlan& plan, const BatterySpec& battery,
                         const nbiot::EnergyParams& params, nbiot::CoverageClass coverage) {
  battery.validate();
  return battery.usable_j() / energy_day(plan, params, coverage).e_day_j;
}

std::uint64_t daily_uplink_bytes(const SessionPlan& plan) {
  plan.validate();
  const auto samples = static_cast<std::uint64_t>(std::llround(plan.t_acq_s * plan.f_s_hz));
  return static_cast<std::uint64_t>(plan.n_sessions_per_day) * samples * 2u;
}

std::vector<LifetimePoint> lifetime_curve(const SessionPlan& base, const BatterySpec& battery,
                                          const nbiot::EnergyParams& params,
                                          std::span<const int> sessions, double t_min_s,
                                          double t_max_s, double step_s) {
  if (!(step_s > 0.0 && t_max_s >= t_min_s && t_min_s > 0.0))
    throw InvalidArgument("lifetime sweep needs 0 < t_min <= t_max and step > 0");
  std::vector<LifetimePoint> out;
  for (int s : sessions) {
    const auto steps = static_cast<int>(std::floor((t_max_s - t_min_s) / step_s + 1e-9));
    for (int i = 0; i <= steps; ++i) {
      SessionPlan p = base;
      p.n_sessions_per_day = s;
      p.t_acq_s = t_min_s + i * step_s;
      out.push_back({p.t_acq_s, s, battery_life_days(p, battery, params)});
    }
  }
  return out;
}

double harvest_day_wh(const HarvesterSpec& h) {
  h.validate();
  return h.area_cm2 * h.density_mw_cm2 * 1e-3 * h.sun_h_per_day * (1.0 - h.loss_frac);
}

NeutralityReport energy_neutral(const SessionPlan& plan, const HarvesterSpec& h,
                                const nbiot::EnergyParams& params) {
  NeutralityReport r;
  r.harvest_wh = harvest_day_wh(h);
  r.consumption_wh = joules_to_wh(energy_day(plan, params).e_day_j);
  r.margin_ratio = r.harvest_wh / r.consumption_wh;
  r.neutral = r.harvest_wh >= r.consumption_wh;
  return r;
}

void write_breakdown_csv(const std::filesystem::path& path, const SessionPlan& plan,
                         const EnergyBreakdown& b, double lifetime_days) {
  auto out = open_out(path);
  out << "N_sessions,t_acq_s,k_acq,N_pkt,t_active_s,t_sleep_s,E_TX_J,E_acq_J,E_tot_J,E_sleep_J,"
         "E_day_J,lifetime_days,lifetime_years\n";
  out << plan.n_sessions_per_day << ',' << format_double(plan.t_acq_s) << ','
      << format_double(plan.k_acq) << ',' << b.n_pkt << ',' << format_double(b.t_active_s) << ','
      << format_double(b.t_sleep_s) << ',' << format_double(b.e_tx_j) << ','
      << format_double(b.e_acq_j) << ',' << format_double(b.e_tot_j) << ','
      << format_double(b.e_sleep_j) << ',' << format_double(b.e_day_j) << ','
      << format_double(lifetime_days) << ',' << format_double(lifetime_days / kDaysPerYear) << '\n';
}

void write_lifetime_csv(const std::filesystem::path& path, std::span<const LifetimePoint> curve) {
  auto out = open_out(path);
  out << "t_acq_s,n_sessions,lifetime_days\n";
  for (const auto& p : curve)
    out << format_double(p.t_acq_s) << ',' << p.n_sessions << ',' << format_double(p.lifetime_days)
        << '\n';
}

}  // namespace shmtwin::energy
