#include "shmtwin/synth.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <numbers>
#include <random>

#include "shmtwin/error.hpp"

namespace shmtwin::synth {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::string lower(std::string s) {
  std::ranges::transform(s, s.begin(), [](unsigned char c) { return std::tolower(c); });
  return s;
}

// Reference modal frequencies of the undamaged test structure (Hz).
constexpr double kBaselineModes[] = {2.807, 8.379, 13.125, 16.052};

StructureModel scaled_baseline(std::string label, double ratio) {
  StructureModel m;
  m.label = std::move(label);
  m.forced_fraction = 0.8;
  for (double f : kBaselineModes) m.modes.push_back({f * ratio, 0.01, 0.010});
  return m;
}

// Second-order resonator y[n] = x[n] + a1 y[n-1] + a2 y[n-2] with poles at
// the continuous-time mode mapped through exp(s T).
struct Resonator {
  double a1 = 0.0;
  double a2 = 0.0;
  double var = 1.0;   // stationary output variance for unit-variance input
  double lag1 = 0.0;  // stationary lag-1 autocovariance

  Resonator(double freq_hz, double zeta, double fs) {
    const double w = kTwoPi * freq_hz / fs;
    const double r = std::exp(-zeta * w);
    const double theta = w * std::sqrt(1.0 - zeta * zeta);
    a1 = 2.0 * r * std::cos(theta);
    a2 = -r * r;
    var = (1.0 - a2) / ((1.0 + a2) * ((1.0 - a2) * (1.0 - a2) - a1 * a1));
    lag1 = a1 * var / (1.0 - a2);
  }
};

}  // namespace

void StructureModel::validate(double f_os_hz) const {
  if (modes.empty()) throw InvalidArgument("structure '" + label + "' has no modes");
  if (!(forced_fraction >= 0.0 && forced_fraction <= 1.0))
    throw InvalidArgument("forced_fraction must lie in [0, 1]");
  double prev = 0.0;
  for (const auto& m : modes) {
    if (!(m.freq_hz > 0.0) || !(m.freq_hz < f_os_hz / 2.0))
      throw InvalidArgument("mode frequency " + format_double(m.freq_hz) +
                            " Hz outside (0, Nyquist of " + format_double(f_os_hz) + " Hz)");
    if (!(m.damping_ratio > 0.0 && m.damping_ratio < 1.0))
      throw InvalidArgument("damping ratio must lie in (0, 1)");
    if (!(m.rms_amp_g >= 0.0)) throw InvalidArgument("mode rms amplitude must be >= 0");
    if (m.freq_hz < prev) throw InvalidArgument("modes must be sorted by frequency");
    prev = m.freq_hz;
  }
}

void SensorSpec::validate() const {
  if (!(noise_density_ug_sqrthz >= 0.0)) throw InvalidArgument("noise density must be >= 0");
  if (!(sensitivity_v_per_g > 0.0)) throw InvalidArgument("sensitivity must be > 0");
  if (!(supply_v > 0.0)) throw InvalidArgument("supply voltage must be > 0");
  if (full_scale_g != 2.0 && full_scale_g != 6.0)
    throw InvalidArgument("full scale must be 2 or 6 g");
}

void AdcSpec::validate() const {
  if (bits < 8 || bits > 16) throw InvalidArgument("adc bits must lie in [8, 16]");
  if (!(vref_v > 0.0)) throw InvalidArgument("vref must be > 0");
  if (!(f_os_hz > 0.0)) throw InvalidArgument("oversampling rate must be > 0");
}

StructureModel structure_preset(const std::string& name) {
  const auto key = lower(name);
  if (key == "no_damage") return scaled_baseline("NO_DAMAGE", 1.0);
  if (key == "damage_1") return scaled_baseline("DAMAGE_1", 2.718 / 2.807);
  if (key == "damage_2") return scaled_baseline("DAMAGE_2", 2.284 / 2.807);
  throw InvalidArgument("unknown structure preset: " + name);
}

std::vector<std::string> structure_preset_names() {
  return {"NO_DAMAGE", "DAMAGE_1", "DAMAGE_2"};
}

SensorSpec sensor_preset(const std::string& name) {
  const auto key = lower(name);
  if (key == "lis344alh") return SensorSpec{};
  if (key == "iis2iclx") return SensorSpec{15.0, 0.66, 2.0, 3.3};
  if (key == "ideal") return SensorSpec{0.0, 0.66, 2.0, 3.3};
  throw InvalidArgument("unknown sensor preset: " + name);
}

Series synth_structure_response(const StructureModel& model, double duration_s, double f_os_hz,
                                std::uint64_t seed) {
  if (!(duration_s > 0.0)) throw InvalidArgument("duration must be > 0");
  if (!(f_os_hz > 0.0)) throw InvalidArgument("rate must be > 0");
  model.validate(f_os_hz);

  const auto n = static_cast<std::size_t>(std::llround(duration_s * f_os_hz));
  Series out{std::vector<double>(n, 0.0), f_os_hz, "g"};

  for (std::size_t k = 0; k < model.modes.size(); ++k) {
    const auto& mode = model.modes[k];
    if (mode.rms_amp_g == 0.0) continue;
    std::mt19937_64 rng(derive_seed(seed, k));
    std::normal_distribution<double> gauss(0.0, 1.0);

    const double tonal = model.forced_fraction;
    if (tonal > 0.0) {
      const double amp = mode.rms_amp_g * std::sqrt(2.0 * tonal);
      const double phase = std::uniform_real_distribution<double>(0.0, kTwoPi)(rng);
      const double w = kTwoPi * mode.freq_hz / f_os_hz;
      for (std::size_t i = 0; i < n; ++i)
        out.samples[i] += amp * std::sin(w * static_cast<double>(i) + phase);
    }
    if (tonal < 1.0) {
      const Resonator res(mode.freq_hz, mode.damping_ratio, f_os_hz);
      const double gain = mode.rms_amp_g * std::sqrt(1.0 - tonal) / std::sqrt(res.var);
      // Start from the stationary distribution so no burn-in is needed.
      double y1 = std::sqrt(res.var) * gauss(rng);
      const double rho = res.lag1 / res.var;
      double y2 = rho * y1 + std::sqrt(res.var * (1.0 - rho * rho)) * gauss(rng);
      for (std::size_t i = 0; i < n; ++i) {
        const double y = gauss(rng) + res.a1 * y1 + res.a2 * y2;
        y2 = y1;
        y1 = y;
        out.samples[i] += gain * y;
      }
    }
  }
  return out;
}

Series apply_sensor(const Series& accel, const SensorSpec& spec, std::uint64_t seed) {
  spec.validate();
  const double sigma_g = spec.noise_density_ug_sqrthz * 1e-6 * std::sqrt(accel.rate_hz / 2.0);
  const double mid = spec.supply_v / 2.0;
  Series out{std::vector<double>(accel.size()), accel.rate_hz, "V"};
  std::mt19937_64 rng(derive_seed(seed, 0x5e750));
  std::normal_distribution<double> gauss(0.0, 1.0);
  for (std::size_t i = 0; i < accel.size(); ++i) {
    const double noise = sigma_g > 0.0 ? sigma_g * gauss(rng) : 0.0;
    out.samples[i] = mid + spec.sensitivity_v_per_g * (accel.samples[i] + noise);
  }
  return out;
}

CodeSeries quantize(const Series& volts, const AdcSpec& adc) {
  adc.validate();
  CodeSeries out;
  out.rate_hz = volts.rate_hz;
  out.bits = adc.bits;
  out.codes.resize(volts.size());
  const double lsb = adc.lsb_v();
  const auto top = static_cast<double>(adc.max_code());
  for (std::size_t i = 0; i < volts.size(); ++i) {
    double code = std::floor(volts.samples[i] / lsb + 0.5);
    if (code < 0.0 || code > top) {
      ++out.saturated;
      code = std::clamp(code, 0.0, top);
    }
    out.codes[i] = static_cast<std::uint16_t>(code);
  }
  return out;
}

double code_to_volts(std::uint32_t code, const AdcSpec& adc) noexcept {
  return static_cast<double>(code) * adc.lsb_v();
}

Series inject_transient(Series accel, const EventSpec& event) {
  if (!(event.onset_s >= 0.0)) throw InvalidArgument("event onset must be >= 0");
  if (!(event.duration_s >= 0.0)) throw InvalidArgument("event duration must be >= 0");
  if (event.duration_s == 0.0) return accel;
  if (!(event.peak_g > 0.0)) throw InvalidArgument("event peak must be > 0");
  if (event.onset_s + event.duration_s > accel.duration_s() + 1e-12)
    throw InvalidArgument("event [" + format_double(event.onset_s) + ", " +
                          format_double(event.onset_s + event.duration_s) +
                          "] s exceeds series duration " + format_double(accel.duration_s()));
  if (!(event.tone_hz > 0.0 && event.tone_hz < accel.rate_hz / 2.0))
    throw InvalidArgument("event tone must lie in (0, Nyquist)");

  const double fs = accel.rate_hz;
  const auto first = static_cast<std::size_t>(std::ceil(event.onset_s * fs));
  const auto last = std::min(accel.size(), static_cast<std::size_t>(std::floor(
                                               (event.onset_s + event.duration_s) * fs)) + 1);
  const double center = event.onset_s + event.duration_s / 2.0;
  for (std::size_t i = first; i < last; ++i) {
    const double t = static_cast<double>(i) / fs;
    const double env = std::sin(std::numbers::pi * (t - event.onset_s) / event.duration_s);
    // Tone phase is aligned so the carrier crest sits on the envelope crest.
    accel.samples[i] +=
        event.peak_g * std::max(env, 0.0) * std::cos(kTwoPi * event.tone_hz * (t - center));
  }
  return accel;
}

std::optional<std::size_t> first_trigger(const Series& accel, double threshold_g) {
  for (std::size_t i = 0; i < accel.size(); ++i)
    if (std::abs(accel.samples[i]) >= threshold_g) return i;
  return std::nullopt;
}

}  // namespace shmtwin::synth
