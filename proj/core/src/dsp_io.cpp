#include <charconv>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>

#include "shmtwin/dsp.hpp"
#include "shmtwin/error.hpp"

namespace shmtwin::dsp {
namespace {

double parse_double(const std::string& s, std::size_t lineno) {
  double v = 0.0;
  auto [p, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc{} || p != s.data() + s.size())
    throw Error("filter file line " + std::to_string(lineno) + ": bad coefficient '" + s + "'");
  return v;
}

}  // namespace

void write_stages(std::ostream& out, std::span<const FilterStage> stages) {
  out << "# shmtwin decimator, " << stages.size() << " stages\n";
  for (std::size_t k = 0; k < stages.size(); ++k) {
    out << "stage " << k << " decim " << stages[k].decim << " taps " << stages[k].coeffs.size()
        << '\n';
    for (double c : stages[k].coeffs) out << format_double(c) << '\n';
    out << "end\n";
  }
}

std::vector<FilterStage> read_stages(std::istream& in) {
  std::vector<FilterStage> stages;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::istringstream hdr(line);
    std::string kw_stage, kw_decim, kw_taps;
    std::size_t index = 0, taps = 0;
    FilterStage st;
    if (!(hdr >> kw_stage >> index >> kw_decim >> st.decim >> kw_taps >> taps) ||
        kw_stage != "stage" || kw_decim != "decim" || kw_taps != "taps")
      throw Error("filter file line " + std::to_string(lineno) + ": expected stage header");
    if (index != stages.size())
      throw Error("filter file line " + std::to_string(lineno) + ": stage index out of order");
    st.coeffs.reserve(taps);
    for (std::size_t i = 0; i < taps; ++i) {
      if (!std::getline(in, line)) throw Error("filter file truncated in stage " + std::to_string(index));
      ++lineno;
      st.coeffs.push_back(parse_double(line, lineno));
    }
    if (!std::getline(in, line) || line != "end")
      throw Error("filter file line " + std::to_string(lineno + 1) + ": expected 'end'");
    ++lineno;
    stages.push_back(std::move(st));
  }
  return stages;
}

void write_stages(const std::filesystem::path& path, std::span<const FilterStage> stages) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  write_stages(out, stages);
}

std::vector<FilterStage> read_stages(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open for reading: " + path.string());
  return read_stages(in);
}

void write_report_csv(const std::filesystem::path& path, const FilterReport& report) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw Error("cannot open for writing: " + path.string());
  out << "passband_ripple_db,stopband_atten_db,total_coeffs,group_delay_samples_out\n"
      << format_double(report.passband_ripple_db) << ',' << format_double(report.stopband_atten_db)
      << ',' << report.total_coeffs << ',' << format_double(report.group_delay_samples_out) << '\n';
}

}  // namespace shmtwin::dsp
