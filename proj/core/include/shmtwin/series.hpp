#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

namespace shmtwin {

/// Uniformly sampled real-valued signal (acceleration in g, voltage in V, ...).
struct Series {
  std::vector<double> samples;
  double rate_hz = 0.0;
  std::string unit;

  std::size_t size() const noexcept { return samples.size(); }
  double duration_s() const noexcept {
    return rate_hz > 0.0 ? static_cast<double>(samples.size()) / rate_hz : 0.0;
  }
};

/// Raw ADC codes as produced by the quantizer.
struct CodeSeries {
  std::vector<std::uint16_t> codes;
  double rate_hz = 0.0;
  int bits = 12;
  std::size_t saturated = 0;  // samples that hit a rail

  std::size_t size() const noexcept { return codes.size(); }
};

/// Decimated, signed 16-bit acceleration samples (full scale = sensor range).
struct SampleSeries {
  std::vector<std::int16_t> samples;
  double rate_hz = 0.0;
  double full_scale_g = 2.0;

  std::size_t size() const noexcept { return samples.size(); }
  double to_g(std::int16_t s) const noexcept {
    return static_cast<double>(s) * full_scale_g / 32768.0;
  }
  std::vector<double> as_g() const;
};

// Derives an independent 64-bit stream seed; splitmix64 finalizer.
std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept;

// Shortest decimal text that parses back to exactly the same double.
std::string format_double(double v);

namespace io {

struct Column {
  std::string name;
  std::span<const double> values;
};

/// One column per channel, header row, dot decimal.
void write_csv(const std::filesystem::path& path, std::span<const Column> columns);
void write_csv(const std::filesystem::path& path, const Series& s);
void write_csv(const std::filesystem::path& path, const CodeSeries& s);
void write_csv(const std::filesystem::path& path, const SampleSeries& s);

/// Reads a numeric CSV with a header row; returns columns in file order.
std::vector<std::pair<std::string, std::vector<double>>> read_csv(
    const std::filesystem::path& path);

// Raw little-endian binary plus "<path>.meta" one-line sidecar:
//   rate_hz=<r> unit=<u> dtype=<f64le|u16le|i16le> count=<n>
void write_raw(const std::filesystem::path& path, const Series& s);
void write_raw(const std::filesystem::path& path, const CodeSeries& s);
void write_raw(const std::filesystem::path& path, const SampleSeries& s);

Series read_raw_series(const std::filesystem::path& path);
CodeSeries read_raw_codes(const std::filesystem::path& path);
SampleSeries read_raw_samples(const std::filesystem::path& path);

}  // namespace io
}  // namespace shmtwin
