#include <gtest/gtest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <sstream>

#include "shmtwin/dsp.hpp"
#include "shmtwin/error.hpp"

using namespace shmtwin;
using namespace shmtwin::dsp;

namespace {

const std::vector<FilterStage>& default_chain() {
  static const auto stages = design_decimator(DecimatorSpec{});
  return stages;
}

// |H(f)| of one FIR by direct evaluation of sum h[n] exp(-j w n).
double dtft_mag(const std::vector<double>& h, double f, double fs) {
  std::complex<double> acc = 0.0;
  const double w = 2.0 * std::numbers::pi * f / fs;
  for (std::size_t n = 0; n < h.size(); ++n)
    acc += h[n] * std::exp(std::complex<double>(0.0, -w * static_cast<double>(n)));
  return std::abs(acc);
}

std::vector<double> random_signal(std::size_t n, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> g(0.0, 1.0);
  std::vector<double> x(n);
  for (auto& v : x) v = g(rng);
  return x;
}

}  // namespace

TEST(StageFactors, DefaultSplit) {
  EXPECT_EQ(default_stage_factors(6, 256), (std::vector<int>{2, 2, 2, 2, 4, 4}));
  EXPECT_EQ(default_stage_factors(3, 8), (std::vector<int>{2, 2, 2}));
  EXPECT_EQ(default_stage_factors(4, 4), (std::vector<int>{1, 1, 2, 2}));
  EXPECT_EQ(default_stage_factors(2, 12), (std::vector<int>{3, 4}));
}

TEST(Design, MeetsDefaultSpec) {
  const auto& stages = default_chain();
  ASSERT_EQ(stages.size(), 6u);
  EXPECT_EQ(total_decimation(stages), 256);
  const auto rep = measure_response(stages, 25600.0, 45.0);
  EXPECT_LE(rep.passband_ripple_db, 0.1);
  EXPECT_GE(rep.stopband_atten_db, 60.0);
  EXPECT_LE(rep.total_coeffs, 1000u);
  for (const auto& s : stages) {
    ASSERT_EQ(s.coeffs.size() % 2, 1u);
    for (std::size_t i = 0; i < s.coeffs.size(); ++i)
      ASSERT_DOUBLE_EQ(s.coeffs[i], s.coeffs[s.coeffs.size() - 1 - i]);
  }
}

TEST(Design, CompositeMagnitudeMatchesDirectEvaluation) {
  const auto& stages = default_chain();
  for (double f : {0.0, 10.0, 45.0, 60.0, 90.0, 1234.5, 6000.0, 12799.0}) {
    double oracle = 1.0;
    double fs = 25600.0;
    for (const auto& s : stages) {
      oracle *= dtft_mag(s.coeffs, f, fs);
      fs /= s.decim;
    }
    EXPECT_NEAR(composite_magnitude(stages, 25600.0, f), oracle, 1e-9 + 1e-9 * oracle) << f;
  }
}

TEST(Design, UnitDcGain) {
  for (const auto& s : default_chain()) {
    double sum = 0.0;
    for (double c : s.coeffs) sum += c;
    EXPECT_NEAR(sum, 1.0, 1e-3);
  }
}

TEST(Design, ReportsViolatedConstraint) {
  DecimatorSpec tight;
  tight.coeff_budget = 100;
  try {
    design_decimator(tight);
    FAIL() << "expected DesignError";
  } catch (const DesignError& e) {
    EXPECT_EQ(e.constraint(), "coeff_budget");
  }

  DecimatorSpec bad;
  bad.stage_decims = {2, 2, 2, 2, 2, 8};
  EXPECT_NO_THROW(design_decimator(bad));
  bad.stage_decims = {256, 1, 1, 1, 1, 1};
  bad.coeff_budget = 1000;
  EXPECT_THROW(design_decimator(bad), DesignError);

  DecimatorSpec mismatch;
  mismatch.stage_decims = {2, 2, 2};
  EXPECT_THROW(design_decimator(mismatch), InvalidArgument);
}

TEST(Decimator, StreamingMatchesNaiveReference) {
  DecimatorSpec spec;
  spec.n_stages = 3;
  spec.total_decim = 8;
  spec.f_in_hz = 800.0;
  spec.f_out_hz = 100.0;
  const auto stages = design_decimator(spec);
  const auto x = random_signal(4001, 5);
  const auto fast = filter_decimate(x, stages);
  const auto slow = naive_filter_decimate(x, stages);
  ASSERT_EQ(fast.size(), slow.size());
  for (std::size_t i = 0; i < fast.size(); ++i) ASSERT_NEAR(fast[i], slow[i], 1e-12) << i;
}

TEST(Decimator, ChunkingDoesNotChangeOutput) {
  const auto& stages = default_chain();
  const auto x = random_signal(256 * 300 + 17, 6);
  const auto whole = filter_decimate(x, stages);

  Decimator d(stages);
  std::vector<double> chunked;
  std::mt19937 rng(1);
  std::uniform_int_distribution<std::size_t> len(1, 3000);
  for (std::size_t pos = 0; pos < x.size();) {
    const auto n = std::min(len(rng), x.size() - pos);
    d.process(std::span(x).subspan(pos, n), chunked);
    pos += n;
  }
  ASSERT_EQ(chunked.size(), whole.size());
  for (std::size_t i = 0; i < whole.size(); ++i) ASSERT_DOUBLE_EQ(chunked[i], whole[i]);

  d.reset();
  std::vector<double> again;
  d.process(x, again);
  EXPECT_EQ(again, whole);
}

TEST(Decimator, OutputCountAndPhase) {
  const auto& stages = default_chain();
  std::vector<double> x(256 * 10, 0.0);
  x[0] = 1.0;
  const auto y = filter_decimate(x, stages);
  EXPECT_EQ(y.size(), 10u);
}

TEST(Chain, OutOfBandToneIsSuppressed) {
  const auto& stages = default_chain();
  synth::AdcSpec adc{16, 3.3, 25600.0};
  synth::SensorSpec sensor = synth::sensor_preset("ideal");
  const std::size_t n = 25600 * 20;
  Series accel{std::vector<double>(n), adc.f_os_hz, "g"};
  for (std::size_t i = 0; i < n; ++i)
    accel.samples[i] = 0.99 * 2.0 * std::sin(2.0 * std::numbers::pi * 90.0 * i / adc.f_os_hz);
  const auto codes = synth::quantize(synth::apply_sensor(accel, sensor, 1), adc);
  const auto out = run_chain(codes, stages, OutputScale::from(adc, sensor));
  double peak = 0.0;
  for (std::size_t i = 100; i < out.size(); ++i) peak = std::max(peak, std::abs(double(out.samples[i])));
  const double dbfs = 20.0 * std::log10(std::max(peak, 0.5) / 32768.0);
  EXPECT_LE(dbfs, -60.0);
}

TEST(Chain, RejectsInputShorterThanWarmup) {
  CodeSeries c{std::vector<std::uint16_t>(100, 2048), 25600.0, 12, 0};
  EXPECT_THROW(run_chain(c, default_chain(), OutputScale{}), InvalidArgument);
}

TEST(Chain, MidscaleMapsToZero) {
  synth::AdcSpec adc;
  synth::SensorSpec sensor;
  const auto scale = OutputScale::from(adc, sensor);
  CodeSeries c{std::vector<std::uint16_t>(25600, 2048), 25600.0, 12, 0};
  const auto out = run_chain(c, default_chain(), scale);
  EXPECT_NEAR(scale.midscale_code, 2048.0, 1e-9);
  for (auto v : out.samples) ASSERT_EQ(v, 0);
  EXPECT_DOUBLE_EQ(out.rate_hz, 100.0);
}

TEST(Enob, AboveFifteenBitsWithDecimation) {
  const auto r = measure_enob(default_chain(), synth::AdcSpec{}, synth::sensor_preset("lis344alh"), 10.0);
  EXPECT_GE(r.enob_bits, 15.0);
  EXPECT_LE(r.enob_bits, 16.0);
}

TEST(Enob, PlainTwelveBitConverterWithoutDecimation) {
  const std::vector<FilterStage> wire{{{1.0}, 1}};
  EnobOptions o;
  o.duration_s = 2.0;
  const auto r = measure_enob(wire, synth::AdcSpec{}, synth::sensor_preset("lis344alh"), 10.0, o);
  // Ideal 12-bit quantizer; the sine spans 0.99 * 1.32 V of the 1.65 V half range.
  const double ideal = 12.0 + std::log2(0.99 * 0.66 * 2.0 / 1.65);
  EXPECT_NEAR(r.enob_bits, ideal, 0.15);
}

TEST(Enob, DoublingOversamplingGainsAboutHalfABit) {
  auto chain_for = [](double f_in, int decim, int stages) {
    DecimatorSpec s;
    s.f_in_hz = f_in;
    s.total_decim = decim;
    s.n_stages = stages;
    s.f_out_hz = f_in / decim;
    s.cutoff_hz = s.f_out_hz / 2.0;
    return design_decimator(s);
  };
  const auto x16 = chain_for(25600.0, 16, 4);
  const auto x32 = chain_for(51200.0, 32, 5);
  const auto sensor = synth::sensor_preset("lis344alh");
  EnobOptions o;
  o.duration_s = 10.0;
  const auto a = measure_enob(x16, synth::AdcSpec{12, 3.3, 25600.0}, sensor, 10.0, o);
  const auto b = measure_enob(x32, synth::AdcSpec{12, 3.3, 51200.0}, sensor, 10.0, o);
  EXPECT_NEAR(b.enob_bits - a.enob_bits, 0.5, 0.2);
}

TEST(StageIo, TextRoundTripIsExact) {
  std::stringstream ss;
  write_stages(ss, default_chain());
  const auto back = read_stages(ss);
  ASSERT_EQ(back.size(), default_chain().size());
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_EQ(back[i].decim, default_chain()[i].decim);
    EXPECT_EQ(back[i].coeffs, default_chain()[i].coeffs);
  }
}

TEST(StageIo, RejectsTruncatedFile) {
  std::stringstream ss("stage 0 decim 2 taps 3\n0.25\n0.5\n");
  EXPECT_THROW(read_stages(ss), Error);
}
