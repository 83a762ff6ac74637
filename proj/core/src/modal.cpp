#include "shmtwin/modal.hpp"

#include <fftw3.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <mutex>
#include <numbers>
#include <numeric>
#include <sstream>

#include "shmtwin/error.hpp"

namespace shmtwin::modal {
namespace {

// FFTW's planner is not re-entrant.
std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

std::size_t next_pow2(std::size_t n) {
  std::size_t p = 1;
  while (p < n) p <<= 1;
  return p;
}

std::ofstream open_out(const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

const char* to_string(Verdict v) noexcept {
  switch (v) {
    case Verdict::NO_DAMAGE: return "NO_DAMAGE";
    case Verdict::LIGHT: return "LIGHT";
    case Verdict::MODERATE: return "MODERATE";
  }
  return "?";
}

Window parse_window(const std::string& name) {
  if (name == "hann") return Window::hann;
  if (name == "rect") return Window::rect;
  throw InvalidArgument("unknown window: " + name);
}

Spectrum compute_spectrum(std::span<const double> samples, double fs_hz, Window window,
                          int zero_pad) {
  if (samples.size() < kMinRecord)
    throw InvalidArgument("record of " + std::to_string(samples.size()) +
                          " samples is shorter than the minimum of " + std::to_string(kMinRecord));
  if (!(fs_hz > 0.0)) throw InvalidArgument("sample rate must be > 0");
  if (zero_pad < 1) throw InvalidArgument("zero_pad must be >= 1");

  const std::size_t n = samples.size();
  const std::size_t nfft = next_pow2(n) * static_cast<std::size_t>(zero_pad);
  const double mean = std::accumulate(samples.begin(), samples.end(), 0.0) / static_cast<double>(n);

  double* in = fftw_alloc_real(nfft);
  fftw_complex* out = fftw_alloc_complex(nfft / 2 + 1);
  fftw_plan plan;
  {
    std::lock_guard lock(planner_mutex());
    plan = fftw_plan_dft_r2c_1d(static_cast<int>(nfft), in, out, FFTW_ESTIMATE);
  }

  double wsum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = window == Window::hann
                         ? 0.5 - 0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) /
                                                static_cast<double>(n - 1))
                         : 1.0;
    wsum += w;
    in[i] = (samples[i] - mean) * w;
  }
  std::fill(in + n, in + nfft, 0.0);
  fftw_execute(plan);

  Spectrum s;
  s.df_hz = fs_hz / static_cast<double>(nfft);
  s.freqs.resize(nfft / 2 + 1);
  s.mags.resize(nfft / 2 + 1);
  for (std::size_t k = 0; k <= nfft / 2; ++k) {
    s.freqs[k] = static_cast<double>(k) * s.df_hz;
    const double mag = std::hypot(out[k][0], out[k][1]);
    s.mags[k] = (k == 0 || k == nfft / 2 ? 1.0 : 2.0) * mag / wsum;
  }

  {
    std::lock_guard lock(planner_mutex());
    fftw_destroy_plan(plan);
  }
  fftw_free(out);
  fftw_free(in);
  return s;
}

Spectrum compute_spectrum(const SampleSeries& s, Window window, int zero_pad) {
  const auto g = s.as_g();
  return compute_spectrum(g, s.rate_hz, window, zero_pad);
}

ModalEstimate detect_peaks(const Spectrum& spec, std::size_t max_peaks, double min_prominence) {
  ModalEstimate est;
  const auto& m = spec.mags;
  if (m.size() < 3 || max_peaks == 0) return est;
  const double floor = median(m);

  for (std::size_t k = 1; k + 1 < m.size(); ++k) {
    if (!(m[k] > m[k - 1] && m[k] >= m[k + 1])) continue;
    const double prom = floor > 0.0 ? m[k] / floor : std::numeric_limits<double>::infinity();
    if (prom < min_prominence) continue;

    constexpr double tiny = 1e-300;
    const double a = std::log(std::max(m[k - 1], tiny));
    const double b = std::log(std::max(m[k], tiny));
    const double c = std::log(std::max(m[k + 1], tiny));
    const double denom = a - 2.0 * b + c;
    const double d = denom < 0.0 ? std::clamp(0.5 * (a - c) / denom, -0.5, 0.5) : 0.0;
    const double mag = std::exp(b - 0.25 * (a - c) * d);
    est.peaks.push_back({(static_cast<double>(k) + d) * spec.df_hz, mag, mag / std::max(floor, tiny)});
    if (floor <= 0.0) est.peaks.back().prominence = prom;
  }

  std::ranges::sort(est.peaks, std::greater{}, &Peak::magnitude);
  if (est.peaks.size() > max_peaks) est.peaks.resize(max_peaks);
  std::ranges::sort(est.peaks, std::less{}, &Peak::freq_hz);
  return est;
}

DamageReport compare_modes(const ModalEstimate& baseline, const ModalEstimate& current,
                           double light_shift_pct, double moderate_shift_pct) {
  if (baseline.peaks.empty()) throw InvalidArgument("baseline estimate is empty");
  if (!(light_shift_pct >= 0.0 && moderate_shift_pct >= light_shift_pct))
    throw InvalidArgument("thresholds must satisfy 0 <= light <= moderate");

  const auto& b = baseline.peaks;
  const auto& c = current.peaks;
  const std::size_t nb = b.size(), nc = c.size();
  auto pct = [&](std::size_t i, std::size_t j) {
    return 100.0 * (c[j].freq_hz - b[i].freq_hz) / b[i].freq_hz;
  };

  // score[i][j]: best (pairs, -cost) over b[i..], c[j..]; ties keep fewer shifts.
  struct Cell {
    int pairs = 0;
    double cost = 0.0;
    int move = 0;  // 0 skip baseline, 1 skip current, 2 pair
  };
  std::vector<std::vector<Cell>> dp(nb + 1, std::vector<Cell>(nc + 1));
  auto better = [](int p1, double c1, int p2, double c2) {
    return p1 != p2 ? p1 > p2 : c1 < c2 - 1e-12;
  };
  for (std::size_t i = nb + 1; i-- > 0;) {
    for (std::size_t j = nc + 1; j-- > 0;) {
      if (i == nb || j == nc) {
        dp[i][j] = {0, 0.0, i == nb ? 1 : 0};
        continue;
      }
      Cell best{dp[i + 1][j].pairs, dp[i + 1][j].cost, 0};
      if (better(dp[i][j + 1].pairs, dp[i][j + 1].cost, best.pairs, best.cost))
        best = {dp[i][j + 1].pairs, dp[i][j + 1].cost, 1};
      const double s = pct(i, j);
      if (std::abs(s) <= 100.0 * kMatchWindowFrac) {
        const int p = dp[i + 1][j + 1].pairs + 1;
        const double cost = dp[i + 1][j + 1].cost + std::abs(s);
        if (better(p, cost, best.pairs, best.cost)) best = {p, cost, 2};
      }
      dp[i][j] = best;
    }
  }

  DamageReport r;
  r.per_mode.resize(nb);
  for (std::size_t i = 0; i < nb; ++i) {
    r.per_mode[i].baseline_hz = b[i].freq_hz;
    r.per_mode[i].missing = true;
    r.per_mode[i].current_hz = std::numeric_limits<double>::quiet_NaN();
  }
  for (std::size_t i = 0, j = 0; i < nb && j < nc;) {
    switch (dp[i][j].move) {
      case 0: ++i; break;
      case 1: ++j; break;
      default: {
        auto& ms = r.per_mode[i];
        ms.current_hz = c[j].freq_hz;
        ms.shift_hz = c[j].freq_hz - b[i].freq_hz;
        ms.shift_pct = pct(i, j);
        ms.missing = false;
        ++i;
        ++j;
      }
    }
  }

  double worst = 0.0;
  for (const auto& ms : r.per_mode)
    if (!ms.missing) worst = std::max(worst, std::abs(ms.shift_pct));
  r.verdict = worst >= moderate_shift_pct ? Verdict::MODERATE
              : worst >= light_shift_pct  ? Verdict::LIGHT
                                          : Verdict::NO_DAMAGE;
  return r;
}

std::size_t DamageReport::missing_modes() const {
  return static_cast<std::size_t>(std::ranges::count_if(per_mode, &ModeShift::missing));
}

std::string DamageReport::verdict_line() const {
  std::ostringstream out;
  out << "verdict=" << to_string(verdict);
  if (!per_mode.empty() && !per_mode.front().missing) {
    out << " first_shift_hz=" << format_double(per_mode.front().shift_hz)
        << " first_shift_pct=" << format_double(per_mode.front().shift_pct);
  } else {
    out << " first_shift_hz=nan first_shift_pct=nan";
  }
  out << " matched=" << per_mode.size() - missing_modes() << " missing=" << missing_modes();
  return out.str();
}

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec,
                        double max_freq_hz) {
  auto out = open_out(path);
  out << "freq_hz,magnitude_g\n";
  for (std::size_t k = 0; k < spec.freqs.size(); ++k) {
    if (max_freq_hz > 0.0 && spec.freqs[k] > max_freq_hz) break;
    out << format_double(spec.freqs[k]) << ',' << format_double(spec.mags[k]) << '\n';
  }
}

void write_peaks_csv(const std::filesystem::path& path, const ModalEstimate& est) {
  auto out = open_out(path);
  out << "freq_hz,magnitude_g,prominence\n";
  for (const auto& p : est.peaks)
    out << format_double(p.freq_hz) << ',' << format_double(p.magnitude) << ','
        << format_double(p.prominence) << '\n';
}

void write_damage_csv(const std::filesystem::path& path, const DamageReport& report) {
  auto out = open_out(path);
  out << "mode,baseline_hz,current_hz,shift_hz,shift_pct,missing\n";
  for (std::size_t i = 0; i < report.per_mode.size(); ++i) {
    const auto& m = report.per_mode[i];
    out << i + 1 << ',' << format_double(m.baseline_hz) << ',';
    if (m.missing) {
      out << ",,,1\n";
    } else {
      out << format_double(m.current_hz) << ',' << format_double(m.shift_hz) << ','
          << format_double(m.shift_pct) << ",0\n";
    }
  }
}

}  // namespace shmtwin::modal
