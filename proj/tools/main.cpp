#include <CLI11.hpp>

#include <cstdlib>
#include <iostream>
#include <sstream>

#include "infrasteer/runner.hpp"
#include "infrasteer/scenario.hpp"
#include "infrasteer/sweep.hpp"

namespace fs = std::filesystem;
using namespace infrasteer;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitConfig = 1;
constexpr int kExitCrash = 2;

fs::path default_out_dir() {
  if (const char* env = std::getenv("INFRASTEER_OUT_DIR"); env != nullptr && *env != '\0') {
    return env;
  }
  return "runs";
}

std::vector<double> parse_values(const std::string& text) {
  std::vector<double> values;
  std::stringstream in(text);
  std::string item;
  while (std::getline(in, item, ',')) {
    if (item.empty()) {
      continue;
    }
    // "a:b:step" expands to an inclusive range.
    if (const auto c1 = item.find(':'); c1 != std::string::npos) {
      const auto c2 = item.find(':', c1 + 1);
      if (c2 == std::string::npos) {
        throw ConfigError("values: range needs start:stop:step");
      }
      const double a = std::stod(item.substr(0, c1));
      const double b = std::stod(item.substr(c1 + 1, c2 - c1 - 1));
      const double step = std::stod(item.substr(c2 + 1));
      if (!(step > 0.0)) {
        throw ConfigError("values: step must be positive");
      }
      for (int k = 0; a + k * step <= b + 1e-9 * step; ++k) {
        values.push_back(a + k * step);
      }
    } else {
      values.push_back(std::stod(item));
    }
  }
  return values;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Line-following vehicle simulator with onboard and infrastructure cameras"};
  app.require_subcommand(1);

  std::string scenario_path;
  std::optional<std::uint64_t> seed;
  std::string out_dir;
  std::string transport = "sim";
  double time_scale = 1.0;

  auto* run_cmd = app.add_subcommand("run", "Run one scenario");
  run_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  run_cmd->add_option("--seed", seed, "Override the scenario seed");
  run_cmd->add_option("--out", out_dir, "Output directory (default $INFRASTEER_OUT_DIR/<name>)");
  run_cmd->add_option("--transport", transport, "sim or udp")
      ->check(CLI::IsMember({"sim", "udp"}));
  run_cmd->add_option("--time-scale", time_scale, "UDP mode: simulated seconds per wall second")
      ->check(CLI::PositiveNumber);

  std::string axis;
  std::string values_text;
  int reps = 3;
  auto* sweep_cmd = app.add_subcommand("sweep", "Sweep one parameter");
  sweep_cmd->add_option("scenario", scenario_path, "Scenario file")->required();
  sweep_cmd->add_option("--axis", axis, "kp, ki, kd, outage_duration or outage_threshold")
      ->required();
  sweep_cmd->add_option("--values", values_text, "Comma list; a:b:step expands a range")
      ->required();
  sweep_cmd->add_option("--reps", reps, "Repetitions per value");
  sweep_cmd->add_option("--seed", seed, "Override the scenario seed");
  sweep_cmd->add_option("--out", out_dir, "Output directory");

  std::string run_dir;
  auto* summarize_cmd = app.add_subcommand("summarize", "Print the summary of a run directory");
  summarize_cmd->add_option("run_dir", run_dir, "Directory written by run")->required();

  CLI11_PARSE(app, argc, argv);

  try {
    if (*summarize_cmd) {
      std::cout << summarize_run_dir(run_dir);
      return kExitOk;
    }

    Scenario sc = load_scenario(scenario_path);
    if (seed) {
      sc.seed = *seed;
    }

    if (*run_cmd) {
      RunOptions options;
      options.transport = *parse_transport_kind(transport);
      options.time_scale = time_scale;
      const fs::path dir = out_dir.empty() ? default_out_dir() / sc.name : fs::path(out_dir);
      const RunResult result = run(sc, options);
      write_artifacts(result, dir);
      std::cout << summarize_run_dir(dir) << "artifacts in " << dir.string() << "\n";
      return result.crashed() ? kExitCrash : kExitOk;
    }

    const auto parsed_axis = parse_sweep_axis(axis);
    if (!parsed_axis) {
      throw ConfigError("axis: unknown axis '" + axis + "'");
    }
    SweepSpec spec{*parsed_axis, parse_values(values_text), reps};
    const fs::path dir = out_dir.empty()
                             ? default_out_dir() / (sc.name + "_" + axis + "_sweep")
                             : fs::path(out_dir);
    SweepOptions options;
    options.out_dir = dir;
    const SweepTable table = sweep(sc, spec, options);
    emit_plot_data(table, dir);
    std::cout << format_table(table) << "plot data in " << dir.string() << "\n";
    return kExitOk;
  } catch (const ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::invalid_argument& e) {
    std::cerr << "configuration error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}
