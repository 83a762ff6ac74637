#include <charconv>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "shmtwin/error.hpp"
#include "shmtwin/scenario.hpp"
#include "shmtwin/series.hpp"

namespace shmtwin::scenario {
namespace {

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return std::string(s.substr(b, e - b + 1));
}

template <class T>
T parse_num(const std::string& v, const std::string& key) {
  T out{};
  auto [p, ec] = std::from_chars(v.data(), v.data() + v.size(), out);
  if (ec != std::errc{} || p != v.data() + v.size() || v.empty())
    throw ConfigError("invalid value '" + v + "' for " + key);
  return out;
}

bool parse_bool(const std::string& v, const std::string& key) {
  if (v == "true" || v == "on" || v == "1" || v == "yes") return true;
  if (v == "false" || v == "off" || v == "0" || v == "no") return false;
  throw ConfigError("invalid boolean '" + v + "' for " + key);
}

std::vector<int> parse_int_list(const std::string& v, const std::string& key) {
  std::vector<int> out;
  if (trim(v).empty()) return out;
  std::istringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_num<int>(trim(item), key));
  return out;
}

std::string join(const std::vector<int>& v) {
  std::string s;
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + std::to_string(v[i]);
  return s;
}

const char* to_string(nbiot::UplinkMode m) {
  return m == nbiot::UplinkMode::stochastic ? "stochastic" : "deterministic";
}

const char* to_string(modal::Window w) { return w == modal::Window::hann ? "hann" : "rect"; }

energy::HarvesterSpec& harvester(Scenario& s) {
  if (!s.harvester) s.harvester.emplace();
  return *s.harvester;
}

using Setter = std::function<void(Scenario&, const std::string&, const std::string&)>;

template <class T>
Setter num(T Scenario::*field) {
  return [field](Scenario& s, const std::string& v, const std::string& k) {
    s.*field = parse_num<T>(v, k);
  };
}

#define SHMTWIN_NUM(expr)                                                      \
  [](Scenario& s, const std::string& v, const std::string& k) {              \
    using T = std::remove_reference_t<decltype(expr)>;                       \
    expr = parse_num<T>(v, k);                                                \
  }

const std::map<std::string, std::map<std::string, Setter>>& setters() {
  static const std::map<std::string, std::map<std::string, Setter>> table{
      {"run",
       {{"name", [](Scenario& s, const std::string& v, const std::string&) { s.name = v; }},
        {"seed", num(&Scenario::seed)},
        {"output_dir",
         [](Scenario& s, const std::string& v, const std::string&) { s.output_dir = v; }}}},
      {"synth",
       {{"structure",
         [](Scenario& s, const std::string& v, const std::string&) { s.structure = v; }},
        {"baseline", [](Scenario& s, const std::string& v, const std::string&) { s.baseline = v; }},
        {"sensor",
         [](Scenario& s, const std::string& v, const std::string&) {
           s.sensor = synth::sensor_preset(v);
         }},
        {"noise_density_ug_sqrthz", SHMTWIN_NUM(s.sensor.noise_density_ug_sqrthz)},
        {"sensitivity_v_per_g", SHMTWIN_NUM(s.sensor.sensitivity_v_per_g)},
        {"full_scale_g", SHMTWIN_NUM(s.sensor.full_scale_g)},
        {"supply_v", SHMTWIN_NUM(s.sensor.supply_v)},
        {"adc_bits", SHMTWIN_NUM(s.adc.bits)},
        {"adc_vref_v", SHMTWIN_NUM(s.adc.vref_v)},
        {"f_os_hz", SHMTWIN_NUM(s.adc.f_os_hz)}}},
      {"dsp",
       {{"n_stages", SHMTWIN_NUM(s.decimator.n_stages)},
        {"total_decim", SHMTWIN_NUM(s.decimator.total_decim)},
        {"cutoff_hz", SHMTWIN_NUM(s.decimator.cutoff_hz)},
        {"passband_ripple_db", SHMTWIN_NUM(s.decimator.passband_ripple_db)},
        {"stopband_atten_db", SHMTWIN_NUM(s.decimator.stopband_atten_db)},
        {"coeff_budget", SHMTWIN_NUM(s.decimator.coeff_budget)},
        {"passband_edge_frac", SHMTWIN_NUM(s.decimator.passband_edge_frac)},
        {"stage_decims",
         [](Scenario& s, const std::string& v, const std::string& k) {
           s.decimator.stage_decims = parse_int_list(v, k);
         }}}},
      {"modal",
       {{"max_peaks", num(&Scenario::max_peaks)},
        {"window",
         [](Scenario& s, const std::string& v, const std::string&) {
           try {
             s.window = modal::parse_window(v);
           } catch (const InvalidArgument& e) {
             throw ConfigError(e.what());
           }
         }},
        {"light_shift_pct", num(&Scenario::light_shift_pct)},
        {"moderate_shift_pct", num(&Scenario::moderate_shift_pct)},
        {"spectrum_max_hz", num(&Scenario::spectrum_max_hz)}}},
      {"nbiot",
       {{"coverage",
         [](Scenario& s, const std::string& v, const std::string&) {
           try {
             s.coverage = nbiot::parse_coverage(v);
           } catch (const InvalidArgument& e) {
             throw ConfigError(e.what());
           }
         }},
        {"rssi_dbm",
         [](Scenario& s, const std::string& v, const std::string& k) {
           s.rssi_dbm = parse_num<double>(v, k);
         }},
        {"loss_prob", num(&Scenario::loss_prob)},
        {"uplink_mode",
         [](Scenario& s, const std::string& v, const std::string&) {
           if (v == "deterministic") s.uplink_mode = nbiot::UplinkMode::deterministic;
           else if (v == "stochastic") s.uplink_mode = nbiot::UplinkMode::stochastic;
           else throw ConfigError("unknown uplink_mode: " + v);
         }},
        {"t3324_s", SHMTWIN_NUM(s.timers.t3324_s)},
        {"t3412_s", SHMTWIN_NUM(s.timers.t3412_s)},
        {"cedrx_cycle_s", SHMTWIN_NUM(s.timers.cedrx_cycle_s)},
        {"iedrx_cycle_s", SHMTWIN_NUM(s.timers.iedrx_cycle_s)},
        {"node_id", num(&Scenario::node_id)}}},
      {"energy",
       {{"sessions_per_day", SHMTWIN_NUM(s.plan.n_sessions_per_day)},
        {"t_acq_s", SHMTWIN_NUM(s.plan.t_acq_s)},
        {"k_acq", SHMTWIN_NUM(s.plan.k_acq)},
        {"tx_duration_s", SHMTWIN_NUM(s.plan.tx_duration_s)},
        {"payload_samples", SHMTWIN_NUM(s.plan.payload_samples)},
        {"battery",
         [](Scenario& s, const std::string& v, const std::string&) {
           try {
             s.battery = energy::battery_preset(v);
           } catch (const InvalidArgument& e) {
             throw ConfigError(e.what());
           }
         }},
        {"battery_name",
         [](Scenario& s, const std::string& v, const std::string&) { s.battery.name = v; }},
        {"battery_capacity_j", SHMTWIN_NUM(s.battery.capacity_j)},
        {"battery_rechargeable",
         [](Scenario& s, const std::string& v, const std::string& k) {
           s.battery.rechargeable = parse_bool(v, k);
         }},
        {"battery_derating", SHMTWIN_NUM(s.battery.derating)},
        {"harvester",
         [](Scenario& s, const std::string& v, const std::string& k) {
           if (parse_bool(v, k)) harvester(s);
           else s.harvester.reset();
         }},
        {"harvester_area_cm2", SHMTWIN_NUM(harvester(s).area_cm2)},
        {"harvester_density_mw_cm2", SHMTWIN_NUM(harvester(s).density_mw_cm2)},
        {"harvester_sun_h", SHMTWIN_NUM(harvester(s).sun_h_per_day)},
        {"harvester_loss_frac", SHMTWIN_NUM(harvester(s).loss_frac)}}},
  };
  return table;
}

#undef SHMTWIN_NUM

// Preset keys are applied before the explicit keys that refine them.
bool is_preset_key(const std::string& section, const std::string& key) {
  return (section == "synth" && key == "sensor") || (section == "energy" && key == "battery") ||
         (section == "energy" && key == "harvester");
}

void resolve_rates(Scenario& s) {
  s.decimator.f_in_hz = s.adc.f_os_hz;
  s.decimator.f_out_hz = s.decimator.total_decim > 0 ? s.adc.f_os_hz / s.decimator.total_decim : 0.0;
  s.plan.f_s_hz = s.decimator.f_out_hz;
}

}  // namespace

nbiot::CoverageClass Scenario::effective_coverage() const {
  return rssi_dbm ? nbiot::classify_coverage(*rssi_dbm) : coverage;
}

void Scenario::validate() const {
  auto check = [](const char* section, auto&& fn) {
    try {
      fn();
    } catch (const InvalidArgument& e) {
      throw ConfigError(std::string("[") + section + "] " + e.what());
    }
  };
  check("synth", [&] {
    synth::structure_preset(structure);
    synth::structure_preset(baseline);
    sensor.validate();
    adc.validate();
  });
  check("dsp", [&] { decimator.validate(); });
  check("modal", [&] {
    if (max_peaks == 0) throw InvalidArgument("max_peaks must be >= 1");
    if (!(light_shift_pct >= 0.0 && moderate_shift_pct >= light_shift_pct))
      throw InvalidArgument("shift thresholds must satisfy 0 <= light <= moderate");
  });
  check("nbiot", [&] {
    timers.validate();
    if (!(loss_prob >= 0.0 && loss_prob < 1.0))
      throw InvalidArgument("loss_prob must lie in [0, 1)");
    if (rssi_dbm) nbiot::classify_coverage(*rssi_dbm);
  });
  check("energy", [&] {
    plan.validate();
    if (plan.n_sessions_per_day < 1) throw InvalidArgument("sessions_per_day must be >= 1");
    battery.validate();
    if (harvester) harvester->validate();
    if (std::abs(plan.f_s_hz - decimator.f_out_hz) > 1e-9)
      throw InvalidArgument("plan rate must equal the decimator output rate");
  });
}

Scenario parse_scenario(const std::string& text) {
  struct Entry {
    std::string section, key, value;
    std::size_t line;
  };
  std::vector<Entry> entries;
  std::set<std::pair<std::string, std::string>> seen;
  std::string section;
  std::istringstream in(text);
  std::string raw;
  std::size_t lineno = 0;
  while (std::getline(in, raw)) {
    ++lineno;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    const std::string where = "line " + std::to_string(lineno) + ": ";
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + "malformed section header");
      section = trim(line.substr(1, line.size() - 2));
      if (!setters().contains(section)) throw ConfigError(where + "unknown section [" + section + "]");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + "expected key = value");
    if (section.empty()) throw ConfigError(where + "key outside of a section");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (!setters().at(section).contains(key))
      throw ConfigError(where + "unknown key '" + key + "' in [" + section + "]");
    if (!seen.insert({section, key}).second)
      throw ConfigError(where + "duplicate key '" + key + "' in [" + section + "]");
    entries.push_back({section, key, value, lineno});
  }
  if (!seen.contains({"run", "seed"})) throw ConfigError("[run] seed is required");

  Scenario s;
  auto apply = [&](const Entry& e) {
    try {
      setters().at(e.section).at(e.key)(s, e.value, e.section + "." + e.key);
    } catch (const ConfigError& err) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
    } catch (const InvalidArgument& err) {
      throw ConfigError("line " + std::to_string(e.line) + ": " + err.what());
    }
  };
  for (const auto& e : entries)
    if (is_preset_key(e.section, e.key)) apply(e);
  for (const auto& e : entries)
    if (!is_preset_key(e.section, e.key)) apply(e);
  resolve_rates(s);
  s.validate();
  return s;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read scenario file: " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_scenario(ss.str());
}

std::string serialize_scenario(const Scenario& s) {
  std::ostringstream o;
  auto kv = [&](const char* k, const std::string& v) { o << k << " = " << v << '\n'; };
  auto d = [](double v) { return format_double(v); };

  o << "[run]\n";
  kv("name", s.name);
  kv("seed", std::to_string(s.seed));
  kv("output_dir", s.output_dir.string());

  o << "\n[synth]\n";
  kv("structure", s.structure);
  kv("baseline", s.baseline);
  kv("noise_density_ug_sqrthz", d(s.sensor.noise_density_ug_sqrthz));
  kv("sensitivity_v_per_g", d(s.sensor.sensitivity_v_per_g));
  kv("full_scale_g", d(s.sensor.full_scale_g));
  kv("supply_v", d(s.sensor.supply_v));
  kv("adc_bits", std::to_string(s.adc.bits));
  kv("adc_vref_v", d(s.adc.vref_v));
  kv("f_os_hz", d(s.adc.f_os_hz));

  o << "\n[dsp]\n";
  kv("n_stages", std::to_string(s.decimator.n_stages));
  kv("total_decim", std::to_string(s.decimator.total_decim));
  kv("cutoff_hz", d(s.decimator.cutoff_hz));
  kv("passband_ripple_db", d(s.decimator.passband_ripple_db));
  kv("stopband_atten_db", d(s.decimator.stopband_atten_db));
  kv("coeff_budget", std::to_string(s.decimator.coeff_budget));
  kv("passband_edge_frac", d(s.decimator.passband_edge_frac));
  kv("stage_decims", join(s.decimator.stage_decims));

  o << "\n[modal]\n";
  kv("max_peaks", std::to_string(s.max_peaks));
  kv("window", to_string(s.window));
  kv("light_shift_pct", d(s.light_shift_pct));
  kv("moderate_shift_pct", d(s.moderate_shift_pct));
  kv("spectrum_max_hz", d(s.spectrum_max_hz));

  o << "\n[nbiot]\n";
  kv("coverage", nbiot::to_string(s.coverage));
  if (s.rssi_dbm) kv("rssi_dbm", d(*s.rssi_dbm));
  kv("loss_prob", d(s.loss_prob));
  kv("uplink_mode", to_string(s.uplink_mode));
  kv("t3324_s", d(s.timers.t3324_s));
  kv("t3412_s", d(s.timers.t3412_s));
  kv("cedrx_cycle_s", d(s.timers.cedrx_cycle_s));
  kv("iedrx_cycle_s", d(s.timers.iedrx_cycle_s));
  kv("node_id", std::to_string(s.node_id));

  o << "\n[energy]\n";
  kv("sessions_per_day", std::to_string(s.plan.n_sessions_per_day));
  kv("t_acq_s", d(s.plan.t_acq_s));
  kv("k_acq", d(s.plan.k_acq));
  kv("tx_duration_s", d(s.plan.tx_duration_s));
  kv("payload_samples", std::to_string(s.plan.payload_samples));
  kv("battery_name", s.battery.name);
  kv("battery_capacity_j", d(s.battery.capacity_j));
  kv("battery_rechargeable", s.battery.rechargeable ? "true" : "false");
  kv("battery_derating", d(s.battery.derating));
  kv("harvester", s.harvester ? "on" : "off");
  if (s.harvester) {
    kv("harvester_area_cm2", d(s.harvester->area_cm2));
    kv("harvester_density_mw_cm2", d(s.harvester->density_mw_cm2));
    kv("harvester_sun_h", d(s.harvester->sun_h_per_day));
    kv("harvester_loss_frac", d(s.harvester->loss_frac));
  }
  return o.str();
}

Scenario preset_scenario(const std::string& name) {
  Scenario s;
  s.name = name;
  s.seed = 1;
  s.output_dir = "out/" + name;
  s.sensor = synth::sensor_preset("lis344alh");
  if (name == "no_damage" || name == "damage_1" || name == "damage_2") {
    s.structure = name == "no_damage" ? "NO_DAMAGE" : name == "damage_1" ? "DAMAGE_1" : "DAMAGE_2";
    s.plan.n_sessions_per_day = 1;
    s.plan.t_acq_s = 180.0;
  } else if (name == "table3") {
    s.battery = energy::battery_preset("vl34570");
    s.harvester.emplace();
  } else {
    throw ConfigError("unknown preset scenario: " + name);
  }
  resolve_rates(s);
  s.validate();
  return s;
}

}  // namespace shmtwin::scenario
