#include <CLI11.hpp>

#include <iostream>
#include <optional>

#include "shmtwin/dsp.hpp"
#include "shmtwin/energy.hpp"
#include "shmtwin/error.hpp"
#include "shmtwin/repro.hpp"
#include "shmtwin/scenario.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kConfigError = 2;
constexpr int kStageFailure = 3;
constexpr int kAcceptanceFailure = 4;

using namespace shmtwin;

int cmd_run(const std::string& file, std::optional<std::uint64_t> seed,
            const std::string& out_dir) {
  auto s = scenario::load_scenario(file);
  if (seed) s.seed = *seed;
  if (!out_dir.empty()) s.output_dir = out_dir;
  const auto r = scenario::run_scenario(s);
  std::cout << "scenario " << s.name << " -> " << s.output_dir.string() << '\n'
            << r.damage.verdict_line() << '\n'
            << "e_day_j=" << format_double(r.energy.e_day_j)
            << " lifetime_years=" << format_double(r.lifetime_days / energy::kDaysPerYear) << '\n';
  return kOk;
}

int cmd_repro(const std::string& target, const std::string& out_dir) {
  std::vector<std::string> list;
  if (target == "all") list = repro::targets();
  else list.push_back(target);

  bool ok = true;
  bool header = true;
  for (const auto& t : list) {
    const auto res = repro::run(t, out_dir);
    repro::write_csv(std::cout, res, header);
    header = false;
    if (!out_dir.empty()) {
      std::ofstream f(std::filesystem::path(out_dir) / (t + ".csv"));
      repro::write_csv(f, res);
    }
    ok = ok && res.all_pass();
  }
  return ok ? kOk : kAcceptanceFailure;
}

int cmd_design(const dsp::DecimatorSpec& spec, const std::string& coeffs_out,
               const std::string& report_out) {
  const auto stages = dsp::design_decimator(spec);
  const auto rep = dsp::measure_response(stages, spec.f_in_hz, spec.passband_edge_frac * spec.cutoff_hz);
  std::cout << "stage,decim,taps\n";
  for (std::size_t i = 0; i < stages.size(); ++i)
    std::cout << i + 1 << ',' << stages[i].decim << ',' << stages[i].coeffs.size() << '\n';
  std::cout << "total_taps=" << rep.total_coeffs
            << " passband_ripple_db=" << format_double(rep.passband_ripple_db)
            << " stopband_atten_db=" << format_double(rep.stopband_atten_db)
            << " group_delay_out=" << format_double(rep.group_delay_samples_out) << '\n';
  if (!coeffs_out.empty()) dsp::write_stages(coeffs_out, stages);
  if (!report_out.empty()) dsp::write_report_csv(report_out, rep);
  return kOk;
}

int cmd_lifetime(double tacq, int sessions, const std::string& battery, double k_acq,
                 const std::string& coverage) {
  energy::SessionPlan plan;
  plan.t_acq_s = tacq;
  plan.n_sessions_per_day = sessions;
  plan.k_acq = k_acq;
  const auto cell = energy::battery_preset(battery);
  const auto cov = nbiot::parse_coverage(coverage);
  const nbiot::EnergyParams params;
  const auto b = energy::energy_day(plan, params, cov);
  const double days = energy::battery_life_days(plan, cell, params, cov);
  std::cout << "t_acq_s,n_sessions,battery,n_pkt,e_tot_j,e_day_j,lifetime_days,lifetime_years,"
               "daily_uplink_bytes\n"
            << format_double(tacq) << ',' << sessions << ',' << cell.name << ',' << b.n_pkt << ','
            << format_double(b.e_tot_j) << ',' << format_double(b.e_day_j) << ','
            << format_double(days) << ',' << format_double(days / energy::kDaysPerYear) << ','
            << energy::daily_uplink_bytes(plan) << '\n';
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"shmtwin: structural monitoring node simulator"};
  app.require_subcommand(1);

  std::optional<std::uint64_t> seed;
  app.add_option("--seed", seed, "Override the scenario seed");

  std::string scenario_file, run_out;
  auto* run = app.add_subcommand("run", "Run a scenario file end to end");
  run->add_option("scenario", scenario_file, "Scenario file")->required();
  run->add_option("--out", run_out, "Output directory (overrides the scenario)");

  std::string target, repro_out;
  auto* rep = app.add_subcommand("repro", "Reproduce a reference table or figure");
  std::vector<std::string> choices = repro::targets();
  choices.push_back("all");
  rep->add_option("target", target, "Target")->required()->check(CLI::IsMember(choices));
  rep->add_option("--out", repro_out, "Directory for CSV and side artifacts");

  dsp::DecimatorSpec spec;
  std::string coeffs_out, report_out;
  auto* design = app.add_subcommand("design-filter", "Design the multistage decimator");
  design->add_option("--stages", spec.n_stages, "Number of stages")->capture_default_str();
  design->add_option("--decim", spec.total_decim, "Total decimation")->capture_default_str();
  design->add_option("--fin", spec.f_in_hz, "Input rate in Hz")->capture_default_str();
  design->add_option("--cutoff", spec.cutoff_hz, "Cutoff in Hz")->capture_default_str();
  design->add_option("--ripple", spec.passband_ripple_db, "Passband ripple in dB")->capture_default_str();
  design->add_option("--atten", spec.stopband_atten_db, "Stopband attenuation in dB")->capture_default_str();
  design->add_option("--budget", spec.coeff_budget, "Coefficient budget")->capture_default_str();
  design->add_option("--factors", spec.stage_decims, "Per-stage decimation factors");
  design->add_option("--coeffs", coeffs_out, "Write coefficients to this file");
  design->add_option("--report", report_out, "Write the response report CSV");

  double tacq = 60.0, k_acq = 6.5;
  int sessions = 6;
  std::string battery = "ls336000", coverage = "GOOD";
  auto* life = app.add_subcommand("lifetime", "Battery lifetime of a session plan");
  life->add_option("--tacq", tacq, "Acquisition seconds per session")->capture_default_str();
  life->add_option("--sessions", sessions, "Sessions per day")->capture_default_str();
  life->add_option("--battery", battery, "ls336000 or vl34570")->capture_default_str();
  life->add_option("--k-acq", k_acq, "Acquisition overhead factor")->capture_default_str();
  life->add_option("--coverage", coverage, "GOOD, MEDIUM or BAD")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kOk : kConfigError;
  }

  try {
    if (*run) return cmd_run(scenario_file, seed, run_out);
    if (*rep) return cmd_repro(target, repro_out);
    if (*design) {
      spec.f_out_hz = spec.f_in_hz / spec.total_decim;
      return cmd_design(spec, coeffs_out, report_out);
    }
    if (*life) return cmd_lifetime(tacq, sessions, battery, k_acq, coverage);
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << '\n';
    return kConfigError;
  } catch (const StageError& e) {
    std::cerr << e.what() << '\n';
    return kStageFailure;
  } catch (const DesignError& e) {
    std::cerr << e.what() << '\n';
    return kStageFailure;
  } catch (const InvalidArgument& e) {
    std::cerr << "invalid argument: " << e.what() << '\n';
    return kConfigError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kStageFailure;
  }
  return kOk;
}
