#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shmtwin/nbiot.hpp"

/// Daily energy budget, battery lifetime and solar harvesting of a node.
namespace shmtwin::energy {

inline constexpr double kSecondsPerDay = 86400.0;
inline constexpr double kDaysPerYear = 365.0;

struct SessionPlan {
  int n_sessions_per_day = 6;
  double t_acq_s = 60.0;
  double f_s_hz = 100.0;
  std::size_t payload_samples = nbiot::kSamplesPerPacket;
  double k_acq = 6.5;          // acquisition-overhead factor, seconds of activity per packet
  double tx_duration_s = 26.0;  // radio-on time per session

  void validate() const;
  bool operator==(const SessionPlan&) const = default;
};

struct BatterySpec {
  std::string name;
  double capacity_j = 0.0;
  bool rechargeable = false;
  double derating = 1.0;  // usable fraction, e.g. 0.5 in deep cold

  void validate() const;
  bool operator==(const BatterySpec&) const = default;
  double usable_j() const noexcept { return capacity_j * derating; }

  static double joules_from_ah(double ah, double nominal_v = 3.7) { return ah * nominal_v * 3600.0; }
};

/// "ls336000" (17 Ah Li-SOCl2 primary) or "vl34570" (5.4 Ah Li-ion).
BatterySpec battery_preset(const std::string& name);

struct HarvesterSpec {
  double area_cm2 = 72.0;
  double density_mw_cm2 = 15.0;
  double sun_h_per_day = 4.0;
  double loss_frac = 0.25;

  void validate() const;
  bool operator==(const HarvesterSpec&) const = default;
};

struct EnergyBreakdown {
  std::size_t n_pkt = 0;
  double e_acq_j = 0.0;
  double e_tx_j = 0.0;
  double e_tot_j = 0.0;  // per session
  double t_active_s = 0.0;  // per day
  double t_sleep_s = 0.0;
  double e_sleep_j = 0.0;
  double e_day_j = 0.0;
};

std::size_t n_packets(const SessionPlan& plan);

double energy_acquisition(std::size_t n_pkt, const nbiot::EnergyParams& params, double k_acq);

/// Zero packets means no connection and no energy.
double energy_transmission(std::size_t n_pkt, const nbiot::EnergyParams& params,
                           nbiot::CoverageClass coverage = nbiot::CoverageClass::GOOD);

double session_active_s(const SessionPlan& plan);

/// Throws InvalidArgument when the sessions do not fit in one day.
EnergyBreakdown energy_day(const SessionPlan& plan, const nbiot::EnergyParams& params,
                           nbiot::CoverageClass coverage = nbiot::CoverageClass::GOOD);

double battery_life_days(const SessionPlan& plan, const BatterySpec& battery,
                         const nbiot::EnergyParams& params,
                         nbiot::CoverageClass coverage = nbiot::CoverageClass::GOOD);

/// Uplink payload volume per day in bytes (16-bit samples).
std::uint64_t daily_uplink_bytes(const SessionPlan& plan);

struct LifetimePoint {
  double t_acq_s = 0.0;
  int n_sessions = 0;
  double lifetime_days = 0.0;
};

/// Lifetime over t_acq in [t_min, t_max] and each session count.
std::vector<LifetimePoint> lifetime_curve(const SessionPlan& base, const BatterySpec& battery,
                                          const nbiot::EnergyParams& params,
                                          std::span<const int> sessions, double t_min_s = 240.0,
                                          double t_max_s = 1200.0, double step_s = 60.0);

double harvest_day_wh(const HarvesterSpec& h);
inline double joules_to_wh(double j) { return j / 3600.0; }

struct NeutralityReport {
  bool neutral = false;
  double harvest_wh = 0.0;
  double consumption_wh = 0.0;
  double margin_ratio = 0.0;
};

NeutralityReport energy_neutral(const SessionPlan& plan, const HarvesterSpec& h,
                                const nbiot::EnergyParams& params);

void write_breakdown_csv(const std::filesystem::path& path, const SessionPlan& plan,
                         const EnergyBreakdown& b, double lifetime_days);
void write_lifetime_csv(const std::filesystem::path& path, std::span<const LifetimePoint> curve);

// ------------------------------------------------------------ validation

/// Power samples; timestamps non-decreasing. A repeated timestamp marks a
/// step (value before and after the edge).
struct PowerTrace {
  std::vector<double> t_s;
  std::vector<double> p_w;
};

struct TraceOptions {
  double window_s = 1000.0;
  std::vector<double> session_starts_s{100.0};
  double sample_period_s = 0.01;
  double noise_frac = 0.0;  // relative Gaussian noise on each sample
  std::uint64_t seed = 0;
};

/// Piecewise-constant power of the node over the window: acquisition at
/// E_acq / (k n) for k n seconds, then the radio phases of a deterministic
/// uplink of the given packets, sleep elsewhere.
PowerTrace simulate_window_trace(std::span<const nbiot::Packet> packets, const SessionPlan& plan,
                                 const nbiot::EnergyParams& params, const TraceOptions& opts = {});

double integrate_trace(const PowerTrace& trace);

struct WindowValidation {
  double e_measured_j = 0.0;
  double e_model_j = 0.0;
  double error_pct = 0.0;  // (model - measured) / measured
};

/// Model energy of a window with sessions_in_window sessions of the plan.
double window_model_energy(const SessionPlan& plan, const nbiot::EnergyParams& params,
                           double window_s, int sessions_in_window);

/// Rejects traces with gaps longer than max_gap_s or that do not span the window.
WindowValidation validate_window(const PowerTrace& trace, const SessionPlan& plan,
                                 const nbiot::EnergyParams& params, double window_s = 1000.0,
                                 int sessions_in_window = 1, double max_gap_s = 1.0);

}  // namespace shmtwin::energy
