#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include "shmtwin/dsp.hpp"
#include "shmtwin/error.hpp"

namespace shmtwin::dsp {
namespace {

constexpr int kMaxTaps = 8191;
constexpr double kStageAttenMarginDb = 2.0;
constexpr double kRippleBudgetUse = 0.8;

double bessel_i0(double x) {
  // Power series; converges quickly for the beta range used here.
  double sum = 1.0, term = 1.0;
  const double q = x * x / 4.0;
  for (int k = 1; k < 200; ++k) {
    term *= q / (static_cast<double>(k) * k);
    sum += term;
    if (term < sum * 1e-17) break;
  }
  return sum;
}

double kaiser_beta(double atten_db) {
  if (atten_db > 50.0) return 0.1102 * (atten_db - 8.7);
  if (atten_db > 21.0)
    return 0.5842 * std::pow(atten_db - 21.0, 0.4) + 0.07886 * (atten_db - 21.0);
  return 0.0;
}

std::vector<double> kaiser_lowpass(int taps, double cutoff_norm, double beta) {
  std::vector<double> h(taps);
  const double mid = 0.5 * (taps - 1);
  const double i0b = bessel_i0(beta);
  for (int n = 0; n < taps; ++n) {
    const double x = n - mid;
    const double arg = std::numbers::pi * 2.0 * cutoff_norm * x;
    const double sinc = x == 0.0 ? 1.0 : std::sin(arg) / arg;
    const double r = mid > 0.0 ? x / mid : 0.0;
    const double w = bessel_i0(beta * std::sqrt(std::max(0.0, 1.0 - r * r))) / i0b;
    h[n] = 2.0 * cutoff_norm * sinc * w;
  }
  const double dc = std::accumulate(h.begin(), h.end(), 0.0);
  for (double& v : h) v /= dc;
  // Enforce exact symmetry against rounding.
  for (int n = 0; n < taps / 2; ++n) {
    const double avg = 0.5 * (h[n] + h[taps - 1 - n]);
    h[n] = h[taps - 1 - n] = avg;
  }
  return h;
}

// Zero-phase amplitude of a symmetric odd-length filter at normalized
// frequency f/fs, by Clenshaw summation of the cosine series.
double amplitude(const std::vector<double>& h, double f_norm) {
  const std::size_t m = (h.size() - 1) / 2;
  const double x = std::cos(2.0 * std::numbers::pi * f_norm);
  double b1 = 0.0, b2 = 0.0;
  for (std::size_t j = m; j >= 1; --j) {
    const double b0 = 2.0 * h[m + j] + 2.0 * x * b1 - b2;
    b2 = b1;
    b1 = b0;
  }
  return h[m] + x * b1 - b2;
}

double db(double mag) { return 20.0 * std::log10(std::max(mag, 1e-300)); }

double grid_step(std::span<const FilterStage> stages, double f_in_hz) {
  double step = f_in_hz / 64.0;
  double fs = f_in_hz;
  for (const auto& s : stages) {
    step = std::min(step, fs / (16.0 * static_cast<double>(s.coeffs.size())));
    fs /= s.decim;
  }
  return step;
}

struct StageCheck {
  double ripple_db;
  double atten_db;
};

StageCheck check_stage(const std::vector<double>& h, double fs, double fp, double fstop) {
  const double step = fs / (16.0 * static_cast<double>(h.size()));
  double lo = 1e300, hi = -1e300;
  for (double f = 0.0;; f += step) {
    const double ff = std::min(f, fp);
    const double a = db(std::abs(amplitude(h, ff / fs)));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    if (ff >= fp) break;
  }
  double worst = -1e300;
  for (double f = fstop;; f += step) {
    const double ff = std::min(f, fs / 2.0);
    worst = std::max(worst, db(std::abs(amplitude(h, ff / fs))));
    if (ff >= fs / 2.0) break;
  }
  return {hi - lo, -worst};
}

bool is_symmetric(const std::vector<double>& h) {
  for (std::size_t i = 0; i < h.size() / 2; ++i)
    if (h[i] != h[h.size() - 1 - i]) return false;
  return true;
}

}  // namespace

std::vector<int> default_stage_factors(int n_stages, int total_decim) {
  if (n_stages < 1 || total_decim < 1) throw InvalidArgument("stage count and decimation must be >= 1");
  std::vector<int> f;
  int rest = total_decim;
  for (int p = 2; p * p <= rest; ++p)
    while (rest % p == 0) {
      f.push_back(p);
      rest /= p;
    }
  if (rest > 1) f.push_back(rest);
  while (static_cast<int>(f.size()) > n_stages) {
    std::ranges::sort(f);
    f[1] *= f[0];
    f.erase(f.begin());
  }
  std::ranges::sort(f);
  while (static_cast<int>(f.size()) < n_stages) f.insert(f.begin(), 1);
  return f;
}

void DecimatorSpec::validate() const {
  if (n_stages < 1) throw InvalidArgument("n_stages must be >= 1");
  if (total_decim < 1) throw InvalidArgument("total_decim must be >= 1");
  if (!(f_in_hz > 0.0 && f_out_hz > 0.0)) throw InvalidArgument("rates must be > 0");
  if (std::abs(f_in_hz / total_decim - f_out_hz) > 1e-9 * f_in_hz)
    throw InvalidArgument("f_in / total_decim must equal f_out");
  if (!(cutoff_hz > 0.0 && cutoff_hz <= f_out_hz / 2.0))
    throw InvalidArgument("cutoff must lie in (0, f_out/2]");
  if (!(passband_edge_frac > 0.0 && passband_edge_frac <= 1.0))
    throw InvalidArgument("passband_edge_frac must lie in (0, 1]");
  if (!(passband_ripple_db > 0.0 && stopband_atten_db >= 0.0))
    throw InvalidArgument("ripple must be > 0 and attenuation >= 0");
  if (!stage_decims.empty()) {
    if (static_cast<int>(stage_decims.size()) != n_stages)
      throw InvalidArgument("stage_decims length must equal n_stages");
    long prod = 1;
    for (int d : stage_decims) {
      if (d < 1) throw InvalidArgument("stage decimation must be >= 1");
      prod *= d;
    }
    if (prod != total_decim) throw InvalidArgument("product of stage_decims must equal total_decim");
  }
}

std::vector<int> DecimatorSpec::resolved_factors() const {
  return stage_decims.empty() ? default_stage_factors(n_stages, total_decim) : stage_decims;
}

std::vector<FilterStage> design_decimator(const DecimatorSpec& spec) {
  spec.validate();
  const auto factors = spec.resolved_factors();
  const double fp = spec.passband_edge_frac * spec.cutoff_hz;

  // Stages that actually need a filter share the ripple budget.
  std::vector<bool> needs_filter(factors.size());
  int active = 0;
  {
    double fs = spec.f_in_hz;
    for (std::size_t k = 0; k < factors.size(); ++k) {
      const double fo = fs / factors[k];
      needs_filter[k] = fo - spec.cutoff_hz < fs / 2.0;
      active += needs_filter[k];
      fs = fo;
    }
  }
  const double stage_ripple = kRippleBudgetUse * spec.passband_ripple_db / std::max(active, 1);
  const double g = std::pow(10.0, stage_ripple / 20.0);
  const double delta_p = (g - 1.0) / (g + 1.0);
  const double stage_atten = spec.stopband_atten_db + kStageAttenMarginDb;
  const double delta_s = std::pow(10.0, -stage_atten / 20.0);
  const double design_atten = -20.0 * std::log10(std::min(delta_p, delta_s));
  const double beta = kaiser_beta(design_atten);

  std::vector<FilterStage> stages;
  double fs = spec.f_in_hz;
  for (std::size_t k = 0; k < factors.size(); ++k) {
    const double fo = fs / factors[k];
    if (!needs_filter[k]) {
      stages.push_back({{1.0}, factors[k]});
      fs = fo;
      continue;
    }
    const double fstop = fo - spec.cutoff_hz;
    if (fstop <= fp)
      throw DesignError("transition_band",
                        "stage " + std::to_string(k) + " stop edge " + format_double(fstop) +
                            " Hz is not above passband edge " + format_double(fp) + " Hz");
    const double width = (fstop - fp) / fs;
    int taps = static_cast<int>(std::ceil((design_atten - 7.95) / (14.36 * width))) + 1;
    taps = std::max(taps, 3);
    if (taps % 2 == 0) ++taps;

    std::vector<double> h;
    for (;; taps += 2) {
      if (taps > kMaxTaps)
        throw DesignError("max_taps", "stage " + std::to_string(k) + " needs more than " +
                                          std::to_string(kMaxTaps) + " taps");
      h = kaiser_lowpass(taps, 0.5 * (fp + fstop) / fs, beta);
      const auto c = check_stage(h, fs, fp, fstop);
      if (c.ripple_db <= stage_ripple && c.atten_db >= stage_atten) break;
    }
    stages.push_back({std::move(h), factors[k]});
    fs = fo;
  }

  std::size_t total = 0;
  for (const auto& s : stages) total += s.coeffs.size();
  if (total > spec.coeff_budget)
    throw DesignError("coeff_budget", "design needs " + std::to_string(total) +
                                          " taps, budget is " + std::to_string(spec.coeff_budget));

  const auto report = measure_response(stages, spec.f_in_hz, fp);
  if (report.passband_ripple_db > spec.passband_ripple_db)
    throw DesignError("passband_ripple", "composite ripple " +
                                             format_double(report.passband_ripple_db) + " dB");
  const bool has_stopband = spec.f_out_hz < spec.f_in_hz;
  if (has_stopband && report.stopband_atten_db < spec.stopband_atten_db)
    throw DesignError("stopband_atten", "composite attenuation " +
                                            format_double(report.stopband_atten_db) + " dB");
  return stages;
}

double composite_magnitude(std::span<const FilterStage> stages, double f_in_hz, double f_hz) {
  double mag = 1.0;
  double fs = f_in_hz;
  for (const auto& s : stages) {
    mag *= std::abs(amplitude(s.coeffs, f_hz / fs));
    fs /= s.decim;
  }
  return mag;
}

FilterReport measure_response(std::span<const FilterStage> stages, double f_in_hz,
                              double passband_edge_hz) {
  FilterReport r;
  int decim = 1;
  for (const auto& s : stages) {
    if (s.coeffs.empty() || s.coeffs.size() % 2 == 0)
      throw InvalidArgument("stages must have an odd, non-zero number of taps");
    if (!is_symmetric(s.coeffs)) throw InvalidArgument("stage coefficients must be symmetric");
    if (s.decim < 1) throw InvalidArgument("stage decimation must be >= 1");
    r.total_coeffs += s.coeffs.size();
    decim *= s.decim;
  }
  const double f_out = f_in_hz / decim;
  const double step = grid_step(stages, f_in_hz);

  double lo = 1e300, hi = -1e300;
  for (double f = 0.0;; f += step) {
    const double ff = std::min(f, passband_edge_hz);
    const double a = db(composite_magnitude(stages, f_in_hz, ff));
    lo = std::min(lo, a);
    hi = std::max(hi, a);
    if (ff >= passband_edge_hz) break;
  }
  r.passband_ripple_db = hi - lo;

  if (f_out < f_in_hz) {
    double worst = -1e300;
    for (double f = f_out / 2.0;; f += step) {
      const double ff = std::min(f, f_in_hz / 2.0);
      worst = std::max(worst, db(composite_magnitude(stages, f_in_hz, ff)));
      if (ff >= f_in_hz / 2.0) break;
    }
    r.stopband_atten_db = -worst;
  } else {
    r.stopband_atten_db = 0.0;
  }
  r.group_delay_samples_out = total_group_delay_in(stages) / decim;
  return r;
}

double total_group_delay_in(std::span<const FilterStage> stages) {
  double delay = 0.0;
  double scale = 1.0;
  for (const auto& s : stages) {
    delay += s.group_delay() * scale;
    scale *= s.decim;
  }
  return delay;
}

int total_decimation(std::span<const FilterStage> stages) {
  int d = 1;
  for (const auto& s : stages) d *= s.decim;
  return d;
}

}  // namespace shmtwin::dsp
