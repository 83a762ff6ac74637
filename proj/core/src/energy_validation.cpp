#include <algorithm>
#include <cmath>
#include <random>

#include "shmtwin/energy.hpp"
#include "shmtwin/error.hpp"
#include "shmtwin/series.hpp"

namespace shmtwin::energy {
namespace {

struct Segment {
  double start_s;
  double end_s;
  double power_w;
};

}  // namespace

PowerTrace simulate_window_trace(std::span<const nbiot::Packet> packets, const SessionPlan& plan,
                                 const nbiot::EnergyParams& params, const TraceOptions& opts) {
  plan.validate();
  if (!(opts.window_s > 0.0 && opts.sample_period_s > 0.0))
    throw InvalidArgument("window and sample period must be > 0");
  if (!(opts.noise_frac >= 0.0)) throw InvalidArgument("noise fraction must be >= 0");

  std::vector<Segment> segs;
  const std::size_t n = packets.size();
  for (double s0 : opts.session_starts_s) {
    if (n == 0) break;
    const double t_acq = plan.k_acq * static_cast<double>(n);
    segs.push_back({s0, s0 + t_acq, energy_acquisition(n, params, plan.k_acq) / t_acq});
    nbiot::UplinkOptions uo;
    uo.start_s = s0 + t_acq;
    const auto rec = nbiot::uplink_session(packets, nbiot::CoverageClass::GOOD, params, uo);
    for (const auto& ph : rec.phases)
      if (ph.duration_s > 0.0)
        segs.push_back({ph.start_s, ph.start_s + ph.duration_s, ph.energy_j / ph.duration_s});
  }
  std::ranges::sort(segs, {}, &Segment::start_s);
  for (std::size_t i = 0; i < segs.size(); ++i) {
    if (segs[i].start_s < 0.0 || segs[i].end_s > opts.window_s + 1e-9)
      throw InvalidArgument("session activity falls outside the window");
    if (i > 0 && segs[i].start_s < segs[i - 1].end_s - 1e-9)
      throw InvalidArgument("sessions overlap in the window");
  }

  // Fill the gaps with sleep so the segments tile [0, window].
  std::vector<Segment> tiles;
  double t = 0.0;
  for (const auto& s : segs) {
    if (s.start_s > t) tiles.push_back({t, s.start_s, params.sleep_power_w()});
    tiles.push_back(s);
    t = s.end_s;
  }
  if (t < opts.window_s) tiles.push_back({t, opts.window_s, params.sleep_power_w()});

  std::mt19937_64 rng(derive_seed(opts.seed, 0x7ace));
  std::normal_distribution<double> gauss(0.0, opts.noise_frac);
  auto noisy = [&](double p) { return opts.noise_frac > 0.0 ? p * (1.0 + gauss(rng)) : p; };

  PowerTrace tr;
  for (const auto& s : tiles) {
    const auto steps = static_cast<std::size_t>(std::ceil((s.end_s - s.start_s) / opts.sample_period_s - 1e-9));
    for (std::size_t k = 0; k <= steps; ++k) {
      tr.t_s.push_back(std::min(s.start_s + static_cast<double>(k) * opts.sample_period_s, s.end_s));
      tr.p_w.push_back(noisy(s.power_w));
    }
  }
  return tr;
}

double integrate_trace(const PowerTrace& trace) {
  double e = 0.0;
  for (std::size_t i = 1; i < trace.t_s.size(); ++i)
    e += 0.5 * (trace.p_w[i] + trace.p_w[i - 1]) * (trace.t_s[i] - trace.t_s[i - 1]);
  return e;
}

double window_model_energy(const SessionPlan& plan, const nbiot::EnergyParams& params,
                           double window_s, int sessions_in_window) {
  plan.validate();
  if (sessions_in_window < 0) throw InvalidArgument("sessions in window must be >= 0");
  const auto n = n_packets(plan);
  const double e_tot = energy_acquisition(n, params, plan.k_acq) + energy_transmission(n, params);
  const double t_active = sessions_in_window * session_active_s(plan);
  if (t_active > window_s) throw InvalidArgument("sessions do not fit in the window");
  return sessions_in_window * e_tot + params.sleep_power_w() * (window_s - t_active);
}

WindowValidation validate_window(const PowerTrace& trace, const SessionPlan& plan,
                                 const nbiot::EnergyParams& params, double window_s,
                                 int sessions_in_window, double max_gap_s) {
  const auto& t = trace.t_s;
  if (t.size() != trace.p_w.size()) throw InvalidArgument("trace time and power lengths differ");
  if (t.size() < 2) throw InvalidArgument("trace needs at least two samples");
  for (std::size_t i = 1; i < t.size(); ++i) {
    const double dt = t[i] - t[i - 1];
    if (dt < 0.0) throw InvalidArgument("trace timestamps must be non-decreasing");
    if (dt > max_gap_s)
      throw InvalidArgument("trace gap of " + format_double(dt) + " s at t=" + format_double(t[i - 1]));
  }
  const double span = t.back() - t.front();
  if (std::abs(span - window_s) > 1e-6 * window_s)
    throw InvalidArgument("trace spans " + format_double(span) + " s, expected " +
                          format_double(window_s) + " s");

  WindowValidation v;
  v.e_measured_j = integrate_trace(trace);
  v.e_model_j = window_model_energy(plan, params, window_s, sessions_in_window);
  v.error_pct = 100.0 * (v.e_model_j - v.e_measured_j) / v.e_measured_j;
  return v;
}

}  // namespace shmtwin::energy
