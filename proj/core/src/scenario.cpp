#include "shmtwin/scenario.hpp"

#include <cmath>
#include <fstream>
#include <utility>

#include "shmtwin/error.hpp"

namespace shmtwin::scenario {
namespace {

template <class Fn>
auto stage(const char* name, Fn&& fn) -> decltype(fn()) {
  try {
    return fn();
  } catch (const StageError&) {
    throw;
  } catch (const std::exception& e) {
    throw StageError(name, e.what());
  }
}

modal::ModalEstimate estimate(const Scenario& s, const SampleSeries& x) {
  return modal::detect_peaks(modal::compute_spectrum(x, s.window), s.max_peaks);
}

}  // namespace

SampleSeries acquire(const Scenario& s, const std::string& structure, std::uint64_t seed,
                     std::span<const dsp::FilterStage> stages, std::size_t* saturated) {
  const auto d = static_cast<std::size_t>(dsp::total_decimation(stages));
  const auto drop = static_cast<std::size_t>(std::ceil(dsp::total_group_delay_in(stages) / d)) + 1;
  const auto n_out = static_cast<std::size_t>(std::llround(s.plan.t_acq_s * s.plan.f_s_hz));
  const double duration = static_cast<double>((n_out + drop) * d) / s.adc.f_os_hz;

  const auto model = synth::structure_preset(structure);
  const auto accel = synth::synth_structure_response(model, duration, s.adc.f_os_hz,
                                                     derive_seed(seed, 1));
  const auto codes = synth::quantize(synth::apply_sensor(accel, s.sensor, derive_seed(seed, 2)), s.adc);
  if (saturated) *saturated = codes.saturated;

  auto out = dsp::run_chain(codes, stages, dsp::OutputScale::from(s.adc, s.sensor));
  out.samples.erase(out.samples.begin(), out.samples.begin() + static_cast<std::ptrdiff_t>(drop));
  out.samples.resize(n_out);
  return out;
}

RunResult run_scenario(const Scenario& s, bool write) {
  stage("config", [&] { s.validate(); });
  const nbiot::EnergyParams params;
  const auto coverage = s.effective_coverage();
  RunResult r;

  r.stages = stage("dsp-design", [&] { return dsp::design_decimator(s.decimator); });
  r.filter = dsp::measure_response(r.stages, s.decimator.f_in_hz,
                                   s.decimator.passband_edge_frac * s.decimator.cutoff_hz);

  r.produced = stage("acquisition", [&] {
    return acquire(s, s.structure, derive_seed(s.seed, 10), r.stages, &r.saturated);
  });

  const auto packets = stage("packetize", [&] { return nbiot::packetize(r.produced.samples, 0); });
  r.uplink = stage("uplink", [&] {
    nbiot::UplinkOptions opts;
    opts.mode = s.uplink_mode;
    return nbiot::uplink_session(packets, coverage, params, opts, derive_seed(s.seed, 30));
  });
  r.sink = stage("sink", [&] { return nbiot::deliver(packets, s.loss_prob, derive_seed(s.seed, 40)); });
  for (std::size_t i = 0; i < r.uplink.packets.size(); ++i)
    r.uplink.packets[i].delivered = r.sink.delivered_flags[i];
  r.received = {r.sink.samples, r.produced.rate_hz, r.produced.full_scale_g};

  stage("modal", [&] {
    const auto base = acquire(s, s.baseline, derive_seed(s.seed, 20), r.stages);
    r.baseline = estimate(s, base);
    r.current = estimate(s, r.received);
    r.damage = modal::compare_modes(r.baseline, r.current, s.light_shift_pct, s.moderate_shift_pct);
  });

  stage("energy", [&] {
    r.energy = energy::energy_day(s.plan, params, coverage);
    r.lifetime_days = s.battery.usable_j() / r.energy.e_day_j;
    if (s.harvester) {
      energy::NeutralityReport n;
      n.harvest_wh = energy::harvest_day_wh(*s.harvester);
      n.consumption_wh = energy::joules_to_wh(r.energy.e_day_j);
      n.margin_ratio = n.harvest_wh / n.consumption_wh;
      n.neutral = n.harvest_wh >= n.consumption_wh;
      r.neutrality = n;
    }
  });

  if (!write) return r;
  stage("write", [&] {
    const auto& dir = s.output_dir;
    std::filesystem::create_directories(dir);
    modal::write_spectrum_csv(dir / "spectrum.csv", modal::compute_spectrum(r.received, s.window),
                              s.spectrum_max_hz);
    modal::write_peaks_csv(dir / "peaks.csv", r.current);
    modal::write_damage_csv(dir / "damage.csv", r.damage);
    const auto events = nbiot::to_events(r.uplink, s.node_id);
    nbiot::write_event_log(dir / "uplink.csv", events);
    energy::write_breakdown_csv(dir / "energy.csv", s.plan, r.energy, r.lifetime_days);
    {
      std::ofstream v(dir / "verdict.txt");
      v << r.damage.verdict_line() << '\n';
    }

    std::ofstream out(dir / "summary.csv");
    if (!out) throw Error("cannot write summary.csv in " + dir.string());
    out << "metric,value\n";
    auto row = [&](const std::string& k, const std::string& v) { out << k << ',' << v << '\n'; };
    auto num = [&](const std::string& k, double v) { row(k, format_double(v)); };
    row("scenario", s.name);
    row("seed", std::to_string(s.seed));
    row("structure", s.structure);
    row("baseline", s.baseline);
    row("coverage", nbiot::to_string(coverage));
    row("filter_taps", std::to_string(r.filter.total_coeffs));
    num("filter_passband_ripple_db", r.filter.passband_ripple_db);
    num("filter_stopband_atten_db", r.filter.stopband_atten_db);
    row("adc_saturated", std::to_string(r.saturated));
    row("samples_produced", std::to_string(r.produced.size()));
    row("samples_received", std::to_string(r.received.size()));
    row("packets", std::to_string(r.uplink.packets.size()));
    row("packets_delivered", std::to_string(r.sink.delivered));
    num("uplink_energy_j", r.uplink.total_energy_j);
    for (std::size_t i = 0; i < r.damage.per_mode.size(); ++i) {
      const auto& m = r.damage.per_mode[i];
      const auto k = "mode_" + std::to_string(i + 1);
      num(k + "_baseline_hz", m.baseline_hz);
      num(k + "_current_hz", m.current_hz);
      num(k + "_shift_pct", m.missing ? std::nan("") : m.shift_pct);
    }
    row("verdict", modal::to_string(r.damage.verdict));
    num("n_pkt", static_cast<double>(r.energy.n_pkt));
    num("e_tx_j", r.energy.e_tx_j);
    num("e_acq_j", r.energy.e_acq_j);
    num("e_tot_j", r.energy.e_tot_j);
    num("e_day_j", r.energy.e_day_j);
    num("lifetime_days", r.lifetime_days);
    num("lifetime_years", r.lifetime_days / energy::kDaysPerYear);
    row("daily_uplink_bytes", std::to_string(energy::daily_uplink_bytes(s.plan)));
    if (r.neutrality) {
      num("harvest_wh", r.neutrality->harvest_wh);
      num("harvest_margin_ratio", r.neutrality->margin_ratio);
      row("energy_neutral", r.neutrality->neutral ? "true" : "false");
    }
  });
  return r;
}

}  // namespace shmtwin::scenario
