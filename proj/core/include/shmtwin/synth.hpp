#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "shmtwin/series.hpp"

/// Ground-truth structural vibration, MEMS sensor transduction and ADC model.
namespace shmtwin::synth {

struct ModeSpec {
  double freq_hz = 0.0;
  double damping_ratio = 0.01;
  double rms_amp_g = 0.0;
};

/// Modes of the simulated structure. Each mode is the sum of a resonator
/// driven by white noise (ambient excitation) and a steady-state forced tone
/// at the modal frequency (shaker). forced_fraction is the tone's share of
/// the mode's power.
struct StructureModel {
  std::vector<ModeSpec> modes;
  std::string label;
  double forced_fraction = 0.0;

  /// Throws InvalidArgument when an invariant is violated for rate f_os_hz.
  void validate(double f_os_hz) const;
};

struct SensorSpec {
  double noise_density_ug_sqrthz = 50.0;
  double sensitivity_v_per_g = 0.66;
  double full_scale_g = 2.0;
  double supply_v = 3.3;

  void validate() const;
  bool operator==(const SensorSpec&) const = default;
};

struct AdcSpec {
  int bits = 12;
  double vref_v = 3.3;
  double f_os_hz = 25600.0;

  void validate() const;
  bool operator==(const AdcSpec&) const = default;
  std::uint32_t max_code() const noexcept { return (1u << bits) - 1u; }
  double lsb_v() const noexcept { return vref_v / static_cast<double>(1u << bits); }
};

struct EventSpec {
  double onset_s = 0.0;
  double peak_g = 0.0;
  double duration_s = 0.0;
  double tone_hz = 0.0;  // usually the first modal frequency
};

// Built-in presets. Names are case-insensitive.
StructureModel structure_preset(const std::string& name);
SensorSpec sensor_preset(const std::string& name);
std::vector<std::string> structure_preset_names();

Series synth_structure_response(const StructureModel& model, double duration_s, double f_os_hz,
                                std::uint64_t seed);

/// v[n] = supply/2 + sensitivity * (a[n] + noise[n]); white noise with the
/// sensor's density over [0, f_os/2].
Series apply_sensor(const Series& accel, const SensorSpec& spec, std::uint64_t seed);

/// Mid-tread uniform quantizer with clipping at both rails.
CodeSeries quantize(const Series& volts, const AdcSpec& adc);

double code_to_volts(std::uint32_t code, const AdcSpec& adc) noexcept;

/// Adds a half-sine-enveloped tone of amplitude peak_g centered in
/// [onset, onset + duration].
Series inject_transient(Series accel, const EventSpec& event);

/// Index of the first sample with |a| >= threshold_g, if any (wake-on-event).
std::optional<std::size_t> first_trigger(const Series& accel, double threshold_g);

}  // namespace shmtwin::synth
