#include "shmtwin/series.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <fstream>
#include <map>
#include <sstream>

#include "shmtwin/error.hpp"

namespace shmtwin {

std::vector<double> SampleSeries::as_g() const {
  std::vector<double> out(samples.size());
  for (std::size_t i = 0; i < samples.size(); ++i) out[i] = to_g(samples[i]);
  return out;
}

std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t stream) noexcept {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ULL * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::string format_double(double v) {
  std::array<char, 64> buf{};
  auto [end, ec] = std::to_chars(buf.data(), buf.data() + buf.size(), v);
  if (ec != std::errc{}) throw Error("format_double: conversion failed");
  return std::string(buf.data(), end);
}

namespace io {
namespace {

std::ofstream open_out(const std::filesystem::path& path, bool binary = false) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path, binary ? std::ios::binary : std::ios::out);
  if (!out) throw Error("cannot open for writing: " + path.string());
  return out;
}

std::filesystem::path sidecar_path(const std::filesystem::path& path) {
  auto p = path;
  p += ".meta";
  return p;
}

template <typename T>
void put_le(std::ostream& out, T value) {
  static_assert(std::endian::native == std::endian::little || std::endian::native == std::endian::big);
  std::array<unsigned char, sizeof(T)> bytes{};
  auto raw = std::bit_cast<std::array<unsigned char, sizeof(T)>>(value);
  if constexpr (std::endian::native == std::endian::little) {
    bytes = raw;
  } else {
    for (std::size_t i = 0; i < sizeof(T); ++i) bytes[i] = raw[sizeof(T) - 1 - i];
  }
  out.write(reinterpret_cast<const char*>(bytes.data()), bytes.size());
}

template <typename T>
std::vector<T> get_all_le(const std::filesystem::path& path, std::size_t count) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::vector<T> out(count);
  std::array<unsigned char, sizeof(T)> bytes{};
  for (std::size_t i = 0; i < count; ++i) {
    if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size()))
      throw Error("truncated raw file: " + path.string());
    if constexpr (std::endian::native == std::endian::big) {
      std::array<unsigned char, sizeof(T)> rev{};
      for (std::size_t k = 0; k < sizeof(T); ++k) rev[k] = bytes[sizeof(T) - 1 - k];
      bytes = rev;
    }
    out[i] = std::bit_cast<T>(bytes);
  }
  return out;
}

void write_sidecar(const std::filesystem::path& path, double rate_hz, const std::string& unit,
                   const std::string& dtype, std::size_t count, const std::string& extra = {}) {
  auto out = open_out(sidecar_path(path));
  out << "rate_hz=" << format_double(rate_hz) << " unit=" << (unit.empty() ? "-" : unit)
      << " dtype=" << dtype << " count=" << count;
  if (!extra.empty()) out << ' ' << extra;
  out << '\n';
}

std::map<std::string, std::string> read_sidecar(const std::filesystem::path& path) {
  std::ifstream in(sidecar_path(path));
  if (!in) throw Error("missing sidecar: " + sidecar_path(path).string());
  std::string line;
  std::getline(in, line);
  std::map<std::string, std::string> kv;
  std::istringstream ss(line);
  std::string tok;
  while (ss >> tok) {
    auto eq = tok.find('=');
    if (eq == std::string::npos) throw Error("bad sidecar token: " + tok);
    kv[tok.substr(0, eq)] = tok.substr(eq + 1);
  }
  for (const char* key : {"rate_hz", "unit", "dtype", "count"})
    if (!kv.contains(key)) throw Error(std::string("sidecar lacks ") + key);
  return kv;
}

void expect_dtype(const std::map<std::string, std::string>& kv, const std::string& dtype) {
  if (kv.at("dtype") != dtype)
    throw Error("raw dtype mismatch: expected " + dtype + ", got " + kv.at("dtype"));
}

}  // namespace

void write_csv(const std::filesystem::path& path, std::span<const Column> columns) {
  auto out = open_out(path);
  std::size_t rows = 0;
  for (std::size_t c = 0; c < columns.size(); ++c) {
    out << (c ? "," : "") << columns[c].name;
    rows = std::max(rows, columns[c].values.size());
  }
  out << '\n';
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < columns.size(); ++c) {
      if (c) out << ',';
      if (r < columns[c].values.size()) out << format_double(columns[c].values[r]);
    }
    out << '\n';
  }
}

void write_csv(const std::filesystem::path& path, const Series& s) {
  std::vector<double> t(s.size());
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = static_cast<double>(i) / s.rate_hz;
  std::array cols{Column{"t_s", t}, Column{s.unit.empty() ? "value" : s.unit, s.samples}};
  write_csv(path, cols);
}

void write_csv(const std::filesystem::path& path, const CodeSeries& s) {
  std::vector<double> t(s.size()), v(s.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i) / s.rate_hz;
    v[i] = s.codes[i];
  }
  std::array cols{Column{"t_s", t}, Column{"code", v}};
  write_csv(path, cols);
}

void write_csv(const std::filesystem::path& path, const SampleSeries& s) {
  std::vector<double> t(s.size()), v(s.size());
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = static_cast<double>(i) / s.rate_hz;
    v[i] = s.samples[i];
  }
  std::array cols{Column{"t_s", t}, Column{"sample", v}};
  write_csv(path, cols);
}

std::vector<std::pair<std::string, std::vector<double>>> read_csv(
    const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path.string());
  std::vector<std::pair<std::string, std::vector<double>>> cols;
  std::string line;
  if (!std::getline(in, line)) throw Error("empty csv: " + path.string());
  {
    std::istringstream ss(line);
    std::string name;
    while (std::getline(ss, name, ',')) cols.push_back({name, {}});
  }
  std::size_t lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    std::istringstream ss(line);
    std::string cell;
    for (std::size_t c = 0; c < cols.size(); ++c) {
      if (!std::getline(ss, cell, ',')) break;
      if (cell.empty()) continue;
      double v = 0.0;
      auto [p, ec] = std::from_chars(cell.data(), cell.data() + cell.size(), v);
      if (ec != std::errc{} || p != cell.data() + cell.size())
        throw Error(path.string() + ":" + std::to_string(lineno) + ": not a number: " + cell);
      cols[c].second.push_back(v);
    }
  }
  return cols;
}

void write_raw(const std::filesystem::path& path, const Series& s) {
  auto out = open_out(path, true);
  for (double v : s.samples) put_le(out, v);
  write_sidecar(path, s.rate_hz, s.unit, "f64le", s.size());
}

void write_raw(const std::filesystem::path& path, const CodeSeries& s) {
  auto out = open_out(path, true);
  for (auto v : s.codes) put_le(out, v);
  write_sidecar(path, s.rate_hz, "code", "u16le", s.size(), "bits=" + std::to_string(s.bits));
}

void write_raw(const std::filesystem::path& path, const SampleSeries& s) {
  auto out = open_out(path, true);
  for (auto v : s.samples) put_le(out, v);
  write_sidecar(path, s.rate_hz, "counts", "i16le", s.size(),
                "full_scale_g=" + format_double(s.full_scale_g));
}

Series read_raw_series(const std::filesystem::path& path) {
  auto kv = read_sidecar(path);
  expect_dtype(kv, "f64le");
  Series s;
  s.rate_hz = std::stod(kv.at("rate_hz"));
  s.unit = kv.at("unit") == "-" ? "" : kv.at("unit");
  s.samples = get_all_le<double>(path, std::stoull(kv.at("count")));
  return s;
}

CodeSeries read_raw_codes(const std::filesystem::path& path) {
  auto kv = read_sidecar(path);
  expect_dtype(kv, "u16le");
  CodeSeries s;
  s.rate_hz = std::stod(kv.at("rate_hz"));
  if (kv.contains("bits")) s.bits = std::stoi(kv.at("bits"));
  s.codes = get_all_le<std::uint16_t>(path, std::stoull(kv.at("count")));
  return s;
}

SampleSeries read_raw_samples(const std::filesystem::path& path) {
  auto kv = read_sidecar(path);
  expect_dtype(kv, "i16le");
  SampleSeries s;
  s.rate_hz = std::stod(kv.at("rate_hz"));
  if (kv.contains("full_scale_g")) s.full_scale_g = std::stod(kv.at("full_scale_g"));
  s.samples = get_all_le<std::int16_t>(path, std::stoull(kv.at("count")));
  return s;
}

}  // namespace io
}  // namespace shmtwin
