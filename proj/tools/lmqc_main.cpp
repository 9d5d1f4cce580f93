// SPDX-License-Identifier: Apache-2.0
//
// Scenario-runner CLI for the phonon interference simulation library.
//
//   lmqc run <config> [--out DIR] [--plot] [--seed N]
//   lmqc verify [--filter NAME]
//   lmqc eta <sparams.csv> --f0 3.925
//
// Exit codes: 0 ok, 1 verify failure, 2 unknown scenario, 3 bad parameter, 4 I/O.

#include <CLI11.hpp>
#include <chrono>
#include <filesystem>
#include <iostream>

#include "lmqc/scenario.hpp"
#include "lmqc/verify.hpp"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitVerifyFailure = 1;
constexpr int kExitUnknownScenario = 2;
constexpr int kExitBadParameter = 3;
constexpr int kExitIo = 4;

int run_command(const std::string& config_path, const std::string& out_dir, bool plot,
                long seed_override) {
  auto cfg = lmqc::ParamMap::parse_file(config_path);
  lmqc::ParamMap effective = cfg;
  if (seed_override >= 0) {
    std::ostringstream merged;
    for (const auto& [k, v] : cfg.items())
      if (k != "seed") merged << k << " = " << v << '\n';
    merged << "seed = " << seed_override << '\n';
    std::istringstream ms(merged.str());
    effective = lmqc::ParamMap::parse(ms);
  }

  const auto t0 = std::chrono::steady_clock::now();
  auto table = lmqc::scenario::run(effective);
  const auto elapsed = std::chrono::duration_cast<std::chrono::milliseconds>(
      std::chrono::steady_clock::now() - t0);
  table.set_meta("wall_time_ms", static_cast<double>(elapsed.count()));

  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw lmqc::IoError("cannot create output directory " + out_dir);
  table.write_csv_file(out_dir + "/result.csv");
  table.write_metadata_file(out_dir + "/metadata.txt");
  if (plot) lmqc::write_svg_plot(table, out_dir + "/plot.svg");

  std::cout << "scenario " << table.meta("scenario") << ": " << table.rows.size()
            << " rows -> " << out_dir << "/result.csv\n";
  for (const auto& [k, v] : table.metadata) {
    if (k.rfind("config.", 0) == 0 || k == "scenario" || k == "library_version" ||
        k == "wall_time_ms")
      continue;
    std::cout << "  " << k << " = " << v << '\n';
  }
  return kExitOk;
}

int verify_command(const std::string& filter) {
  auto report = lmqc::verify(filter);
  if (report.checks.empty()) {
    std::cerr << "verify: no checks match filter '" << filter << "'\n";
    return kExitBadParameter;
  }
  report.print(std::cout);
  return report.all_passed() ? kExitOk : kExitVerifyFailure;
}

int eta_command(const std::string& path, double f0) {
  bool reciprocal = false;
  auto records = lmqc::read_sparams_csv(path, &reciprocal);
  auto r = lmqc::eta_from_s_params(records, f0, reciprocal);
  std::cout.precision(9);
  std::cout << "f0_ghz = " << r.frequency_ghz << "\n"
            << "eta = " << r.eta << "\n"
            << "theta1_rad = " << r.theta1 << "\n"
            << "theta2_rad = " << r.theta2 << "\n"
            << "theta_sum_rad = " << r.theta1 + r.theta2 << "\n";
  if (r.reciprocal_approximation)
    std::cout << "note: s22/s12 columns missing, reciprocal approximation applied\n";
  return kExitOk;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Temporal-mode phonon interference simulator"};
  app.require_subcommand(1);

  std::string config_path, out_dir = ".", filter, sparams_path;
  bool plot = false;
  long seed = -1;
  double f0 = 3.925;

  auto* run = app.add_subcommand("run", "execute a scenario configuration");
  run->add_option("config", config_path, "key = value configuration file")->required();
  run->add_option("--out", out_dir, "output directory (default: current)");
  run->add_flag("--plot", plot, "also write plot.svg");
  run->add_option("--seed", seed, "override the sampling seed");

  auto* verify = app.add_subcommand("verify", "run the oracle and invariant checks");
  verify->add_option("--filter", filter, "run only checks whose name contains this");

  auto* eta = app.add_subcommand("eta", "extract reflectivity from S-parameter data");
  eta->add_option("sparams", sparams_path, "CSV file of VNA records")->required();
  eta->add_option("--f0", f0, "evaluation frequency in GHz");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (run->parsed()) return run_command(config_path, out_dir, plot, seed);
    if (verify->parsed()) return verify_command(filter);
    return eta_command(sparams_path, f0);
  } catch (const lmqc::UnknownScenarioError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitUnknownScenario;
  } catch (const lmqc::IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitIo;
  } catch (const lmqc::ParameterError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadParameter;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitBadParameter;
  }
}
