#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <vector>

#include "shmtwin/series.hpp"
#include "shmtwin/synth.hpp"

/// Multistage FIR decimation: design, streaming execution and verification.
namespace shmtwin::dsp {

/// One decimating FIR stage. Coefficients are symmetric (linear phase).
struct FilterStage {
  std::vector<double> coeffs;
  int decim = 1;

  double group_delay() const noexcept { return 0.5 * static_cast<double>(coeffs.size() - 1); }
};

struct DecimatorSpec {
  int n_stages = 6;
  int total_decim = 256;
  double f_in_hz = 25600.0;
  double f_out_hz = 100.0;
  double cutoff_hz = 50.0;
  double passband_ripple_db = 0.1;  // peak-to-peak, composite
  double stopband_atten_db = 60.0;  // minimum, composite
  std::size_t coeff_budget = 1000;
  double passband_edge_frac = 0.9;  // passband is [0, frac * cutoff]
  std::vector<int> stage_decims;    // empty: default_stage_factors()

  void validate() const;
  bool operator==(const DecimatorSpec&) const = default;
  std::vector<int> resolved_factors() const;
};

struct FilterReport {
  double passband_ripple_db = 0.0;
  double stopband_atten_db = 0.0;
  std::size_t total_coeffs = 0;
  double group_delay_samples_out = 0.0;
};

/// Splits total into n factors, merging the smallest primes first
/// (256 over 6 stages -> 2,2,2,2,4,4). Pads with 1 when there are too few.
std::vector<int> default_stage_factors(int n_stages, int total_decim);

/// Kaiser windowed-sinc design per stage, taps grown until the per-stage
/// targets hold. Throws DesignError naming the violated constraint.
std::vector<FilterStage> design_decimator(const DecimatorSpec& spec);

/// Composite magnitude (linear) at input-referred frequency f_hz.
double composite_magnitude(std::span<const FilterStage> stages, double f_in_hz, double f_hz);

/// Ripple over [0, passband_edge_hz]; attenuation over every input frequency
/// at or above f_out/2 (all of which alias into the output band).
FilterReport measure_response(std::span<const FilterStage> stages, double f_in_hz,
                              double passband_edge_hz);

/// Sum over stages of the stage group delay, expressed in input samples.
double total_group_delay_in(std::span<const FilterStage> stages);
int total_decimation(std::span<const FilterStage> stages);

/// Streaming polyphase decimator. Keeps one delay line per stage; one
/// instance per stream. Output sample m corresponds to input index m * D
/// (phase 0), with zero initial state.
class Decimator {
 public:
  explicit Decimator(std::vector<FilterStage> stages);

  /// Pushes input samples and appends any outputs produced.
  void process(std::span<const double> in, std::vector<double>& out);
  void reset();

  const std::vector<FilterStage>& stages() const noexcept { return stages_; }

 private:
  struct StageState {
    std::vector<double> ring;  // history duplicated for contiguous dot products
    std::size_t head = 0;
    std::size_t count = 0;  // inputs seen modulo decim
  };
  std::vector<FilterStage> stages_;
  std::vector<StageState> state_;
  std::vector<double> scratch_a_;
  std::vector<double> scratch_b_;
};

/// Maps centered ADC codes to signed 16-bit counts where +/-32768 is the
/// sensor full scale.
struct OutputScale {
  double midscale_code = 2048.0;
  double counts_per_code = 1.0;
  double full_scale_g = 2.0;

  static OutputScale from(const synth::AdcSpec& adc, const synth::SensorSpec& sensor);
};

/// Runs the chain on raw codes. Midscale is removed before filtering; the
/// result is rounded and saturated to int16.
SampleSeries run_chain(const CodeSeries& codes, std::span<const FilterStage> stages,
                       const OutputScale& scale);

/// Same filtering as run_chain but floating point end to end and without
/// midscale removal or rounding; for analysis and reference paths.
std::vector<double> filter_decimate(std::span<const double> in,
                                    std::span<const FilterStage> stages);

/// Reference path: full-rate convolution followed by downsampling, stage by
/// stage. Quadratic-ish; small inputs only.
std::vector<double> naive_filter_decimate(std::span<const double> in,
                                          std::span<const FilterStage> stages);

struct EnobResult {
  double enob_bits = 0.0;
  double sinad_db = 0.0;
  double signal_rms = 0.0;
  double error_rms = 0.0;
};

struct EnobOptions {
  double amplitude_frac = 0.99;  // sine amplitude relative to sensor full scale
  double duration_s = 20.0;
  std::uint64_t seed = 1;
};

/// ENOB = (SINAD - 1.76) / 6.02 of the digitization path: a sine at
/// test_freq_hz plus the sensor's noise (dither) is quantized and decimated;
/// the error is taken against the same chain run in floating point on the
/// identical analog record.
EnobResult measure_enob(std::span<const FilterStage> stages, const synth::AdcSpec& adc,
                        const synth::SensorSpec& sensor, double test_freq_hz,
                        const EnobOptions& opts = {});

// Text format, one block per stage:
//   stage <index> decim <D> taps <N>
//   <coefficient>   (one per line, shortest round-trip decimal)
//   end
void write_stages(std::ostream& out, std::span<const FilterStage> stages);
std::vector<FilterStage> read_stages(std::istream& in);
void write_stages(const std::filesystem::path& path, std::span<const FilterStage> stages);
std::vector<FilterStage> read_stages(const std::filesystem::path& path);

void write_report_csv(const std::filesystem::path& path, const FilterReport& report);

}  // namespace shmtwin::dsp
