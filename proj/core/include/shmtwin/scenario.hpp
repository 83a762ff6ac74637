#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>

#include "shmtwin/dsp.hpp"
#include "shmtwin/energy.hpp"
#include "shmtwin/modal.hpp"
#include "shmtwin/nbiot.hpp"
#include "shmtwin/synth.hpp"

/// End-to-end scenario: configuration, file format and the staged run.
namespace shmtwin::scenario {

struct Scenario {
  std::string name = "scenario";
  std::uint64_t seed = 0;
  std::filesystem::path output_dir = "out";

  // synth
  std::string structure = "NO_DAMAGE";
  std::string baseline = "NO_DAMAGE";
  synth::SensorSpec sensor{};
  synth::AdcSpec adc{};

  // dsp; f_in follows the ADC rate
  dsp::DecimatorSpec decimator{};

  // modal
  std::size_t max_peaks = 4;
  modal::Window window = modal::Window::hann;
  double light_shift_pct = 1.0;
  double moderate_shift_pct = 10.0;
  double spectrum_max_hz = 50.0;

  // nbiot
  nbiot::CoverageClass coverage = nbiot::CoverageClass::GOOD;
  std::optional<double> rssi_dbm;  // when set, overrides coverage
  double loss_prob = 0.0;
  nbiot::UplinkMode uplink_mode = nbiot::UplinkMode::deterministic;
  nbiot::TimerConfig timers{};
  std::uint32_t node_id = 1;

  // energy; plan.f_s_hz follows the decimator output rate
  energy::SessionPlan plan{};
  energy::BatterySpec battery = energy::battery_preset("ls336000");
  std::optional<energy::HarvesterSpec> harvester;

  bool operator==(const Scenario&) const = default;

  nbiot::CoverageClass effective_coverage() const;
  /// Resolves derived rates and checks every section; throws ConfigError.
  void validate() const;
};

/// INI-style text: [section] headers, key = value, '#' comments. Sections
/// are run, synth, dsp, modal, nbiot, energy. Unknown sections or keys and
/// a missing run.seed are ConfigErrors.
Scenario parse_scenario(const std::string& text);
Scenario load_scenario(const std::filesystem::path& path);
std::string serialize_scenario(const Scenario& s);

/// Built-in scenarios: "no_damage", "damage_1", "damage_2", "table3".
Scenario preset_scenario(const std::string& name);

struct RunResult {
  std::vector<dsp::FilterStage> stages;
  dsp::FilterReport filter;
  std::size_t saturated = 0;
  SampleSeries produced;  // chain output for the acquisition window
  SampleSeries received;  // reassembled at the sink
  nbiot::UplinkRecord uplink;
  nbiot::SinkReport sink;
  modal::ModalEstimate baseline;
  modal::ModalEstimate current;
  modal::DamageReport damage;
  energy::EnergyBreakdown energy;
  double lifetime_days = 0.0;
  std::optional<energy::NeutralityReport> neutrality;
};

/// Runs synth -> dsp -> packetize -> uplink -> sink -> modal plus energy
/// accounting, and writes summary.csv, spectrum.csv, peaks.csv, damage.csv,
/// uplink.csv, energy.csv and verdict.txt into output_dir when write is set.
/// Stage failures throw StageError.
RunResult run_scenario(const Scenario& s, bool write = true);

/// Chain output for a structure preset: exactly t_acq * f_s samples after
/// the filter warm-up has been discarded.
SampleSeries acquire(const Scenario& s, const std::string& structure, std::uint64_t seed,
                     std::span<const dsp::FilterStage> stages, std::size_t* saturated = nullptr);

}  // namespace shmtwin::scenario
