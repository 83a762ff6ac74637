#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "shmtwin/dsp.hpp"
#include "shmtwin/error.hpp"

namespace shmtwin::dsp {

Decimator::Decimator(std::vector<FilterStage> stages) : stages_(std::move(stages)) {
  if (stages_.empty()) throw InvalidArgument("decimator needs at least one stage");
  for (const auto& s : stages_) {
    if (s.coeffs.empty()) throw InvalidArgument("stage without coefficients");
    if (s.decim < 1) throw InvalidArgument("stage decimation must be >= 1");
  }
  reset();
}

void Decimator::reset() {
  state_.assign(stages_.size(), {});
  for (std::size_t k = 0; k < stages_.size(); ++k)
    state_[k].ring.assign(2 * stages_[k].coeffs.size(), 0.0);
}

void Decimator::process(std::span<const double> in, std::vector<double>& out) {
  std::span<const double> src = in;
  for (std::size_t k = 0; k < stages_.size(); ++k) {
    const auto& h = stages_[k].coeffs;
    const std::size_t taps = h.size();
    const auto decim = static_cast<std::size_t>(stages_[k].decim);
    auto& st = state_[k];
    auto& dst = (k % 2 == 0) ? scratch_a_ : scratch_b_;
    dst.clear();
    dst.reserve(src.size() / decim + 1);
    for (double x : src) {
      st.ring[st.head] = x;
      st.ring[st.head + taps] = x;
      if (st.count == 0) {
        // Window oldest..newest is ring[head+1 .. head+taps]; taps are
        // symmetric, so no reversal is needed.
        const double* w = st.ring.data() + st.head + 1;
        double acc = 0.0;
        for (std::size_t j = 0; j < taps; ++j) acc += h[j] * w[j];
        dst.push_back(acc);
      }
      st.head = (st.head + 1) % taps;
      st.count = (st.count + 1) % decim;
    }
    src = dst;
  }
  out.insert(out.end(), src.begin(), src.end());
}

OutputScale OutputScale::from(const synth::AdcSpec& adc, const synth::SensorSpec& sensor) {
  adc.validate();
  sensor.validate();
  OutputScale s;
  s.midscale_code = (sensor.supply_v / 2.0) / adc.lsb_v();
  s.counts_per_code = adc.lsb_v() / sensor.sensitivity_v_per_g / sensor.full_scale_g * 32768.0;
  s.full_scale_g = sensor.full_scale_g;
  return s;
}

std::vector<double> filter_decimate(std::span<const double> in,
                                    std::span<const FilterStage> stages) {
  Decimator d({stages.begin(), stages.end()});
  std::vector<double> out;
  d.process(in, out);
  return out;
}

std::vector<double> naive_filter_decimate(std::span<const double> in,
                                          std::span<const FilterStage> stages) {
  std::vector<double> x(in.begin(), in.end());
  for (const auto& s : stages) {
    std::vector<double> full(x.size(), 0.0);
    for (std::size_t n = 0; n < x.size(); ++n) {
      double acc = 0.0;
      for (std::size_t k = 0; k < s.coeffs.size() && k <= n; ++k) acc += s.coeffs[k] * x[n - k];
      full[n] = acc;
    }
    std::vector<double> y;
    for (std::size_t n = 0; n < full.size(); n += static_cast<std::size_t>(s.decim))
      y.push_back(full[n]);
    x = std::move(y);
  }
  return x;
}

SampleSeries run_chain(const CodeSeries& codes, std::span<const FilterStage> stages,
                       const OutputScale& scale) {
  const double warmup = total_group_delay_in(stages);
  if (static_cast<double>(codes.size()) < warmup)
    throw InvalidArgument("input of " + std::to_string(codes.size()) +
                          " samples is shorter than the chain warm-up of " +
                          format_double(std::ceil(warmup)) + " samples");
  std::vector<double> centered(codes.size());
  for (std::size_t i = 0; i < codes.size(); ++i)
    centered[i] = static_cast<double>(codes.codes[i]) - scale.midscale_code;

  const auto filtered = filter_decimate(centered, stages);
  SampleSeries out;
  out.rate_hz = codes.rate_hz / total_decimation(stages);
  out.full_scale_g = scale.full_scale_g;
  out.samples.resize(filtered.size());
  constexpr double lo = std::numeric_limits<std::int16_t>::min();
  constexpr double hi = std::numeric_limits<std::int16_t>::max();
  for (std::size_t i = 0; i < filtered.size(); ++i) {
    const double v = std::nearbyint(filtered[i] * scale.counts_per_code);
    out.samples[i] = static_cast<std::int16_t>(std::clamp(v, lo, hi));
  }
  return out;
}

}  // namespace shmtwin::dsp
