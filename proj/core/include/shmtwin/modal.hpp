#pragma once

#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "shmtwin/series.hpp"

/// Modal frequency estimation and frequency-shift damage classification.
namespace shmtwin::modal {

enum class Window { rect, hann };

struct Spectrum {
  std::vector<double> freqs;
  std::vector<double> mags;  // single-sided amplitude; a sine of amplitude A peaks near A
  double df_hz = 0.0;
};

struct Peak {
  double freq_hz = 0.0;
  double magnitude = 0.0;
  double prominence = 0.0;  // magnitude / median spectral magnitude
};

struct ModalEstimate {
  std::vector<Peak> peaks;  // ascending frequency
};

enum class Verdict { NO_DAMAGE, LIGHT, MODERATE };

struct ModeShift {
  double baseline_hz = 0.0;
  double current_hz = 0.0;
  double shift_hz = 0.0;
  double shift_pct = 0.0;
  bool missing = false;
};

struct DamageReport {
  std::vector<ModeShift> per_mode;  // one per baseline mode
  Verdict verdict = Verdict::NO_DAMAGE;

  std::size_t missing_modes() const;
  /// Single machine-readable line, e.g.
  /// "verdict=LIGHT first_shift_hz=-0.089 first_shift_pct=-3.17 matched=4 missing=0"
  std::string verdict_line() const;
};

inline constexpr std::size_t kMinRecord = 1024;
inline constexpr int kDefaultZeroPad = 4;
inline constexpr double kDefaultProminence = 10.0;
inline constexpr double kMatchWindowFrac = 0.20;

const char* to_string(Verdict v) noexcept;
Window parse_window(const std::string& name);

/// Magnitude spectrum of the mean-removed, windowed record. FFT length is
/// the next power of two >= N, times zero_pad.
Spectrum compute_spectrum(std::span<const double> samples, double fs_hz, Window window = Window::hann,
                          int zero_pad = kDefaultZeroPad);
Spectrum compute_spectrum(const SampleSeries& s, Window window = Window::hann,
                          int zero_pad = kDefaultZeroPad);

/// Local maxima with magnitude >= min_prominence * median, refined by a
/// parabola through the log magnitudes of the three bins around the max.
/// Keeps the max_peaks largest, returned in ascending frequency.
ModalEstimate detect_peaks(const Spectrum& spec, std::size_t max_peaks,
                           double min_prominence = kDefaultProminence);

/// Order-preserving one-to-one pairing of modes within +/-20% of the
/// baseline frequency, maximizing the number of pairs then minimizing the
/// summed |shift_pct|.
DamageReport compare_modes(const ModalEstimate& baseline, const ModalEstimate& current,
                           double light_shift_pct = 1.0, double moderate_shift_pct = 10.0);

void write_spectrum_csv(const std::filesystem::path& path, const Spectrum& spec,
                        double max_freq_hz = 0.0);
void write_peaks_csv(const std::filesystem::path& path, const ModalEstimate& est);
void write_damage_csv(const std::filesystem::path& path, const DamageReport& report);

}  // namespace shmtwin::modal
