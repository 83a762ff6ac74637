#include <cmath>
#include <numbers>

#include "shmtwin/dsp.hpp"
#include "shmtwin/error.hpp"

namespace shmtwin::dsp {

EnobResult measure_enob(std::span<const FilterStage> stages, const synth::AdcSpec& adc,
                        const synth::SensorSpec& sensor, double test_freq_hz,
                        const EnobOptions& opts) {
  const int decim = total_decimation(stages);
  const double f_out = adc.f_os_hz / decim;
  if (!(test_freq_hz > 0.0 && test_freq_hz < f_out / 2.0))
    throw InvalidArgument("test frequency must lie inside the output band");
  if (!(opts.amplitude_frac > 0.0 && opts.amplitude_frac <= 1.0))
    throw InvalidArgument("amplitude_frac must lie in (0, 1]");

  const auto n = static_cast<std::size_t>(std::llround(opts.duration_s * adc.f_os_hz));
  const double amp_g = opts.amplitude_frac * sensor.full_scale_g;
  Series accel{std::vector<double>(n), adc.f_os_hz, "g"};
  const double w = 2.0 * std::numbers::pi * test_freq_hz / adc.f_os_hz;
  for (std::size_t i = 0; i < n; ++i) accel.samples[i] = amp_g * std::sin(w * static_cast<double>(i));

  const auto volts = synth::apply_sensor(accel, sensor, opts.seed);
  const auto codes = synth::quantize(volts, adc);
  const auto scale = OutputScale::from(adc, sensor);
  const auto out = run_chain(codes, stages, scale);

  std::vector<double> analog(n);
  for (std::size_t i = 0; i < n; ++i)
    analog[i] = volts.samples[i] / adc.lsb_v() - scale.midscale_code;
  const auto ref = filter_decimate(analog, stages);

  const auto skip = static_cast<std::size_t>(
      std::ceil(2.0 * total_group_delay_in(stages) / decim)) + 1;
  if (out.size() < skip + 64) throw InvalidArgument("record too short for ENOB measurement");

  double err2 = 0.0;
  for (std::size_t i = skip; i < out.size(); ++i) {
    const double e = static_cast<double>(out.samples[i]) - ref[i] * scale.counts_per_code;
    err2 += e * e;
  }
  EnobResult r;
  r.error_rms = std::sqrt(err2 / static_cast<double>(out.size() - skip));
  const double gain = composite_magnitude(stages, adc.f_os_hz, test_freq_hz);
  r.signal_rms = amp_g / sensor.full_scale_g * 32768.0 * gain / std::sqrt(2.0);
  r.sinad_db = 20.0 * std::log10(r.signal_rms / r.error_rms);
  r.enob_bits = (r.sinad_db - 1.76) / 6.02;
  return r;
}

}  // namespace shmtwin::dsp
