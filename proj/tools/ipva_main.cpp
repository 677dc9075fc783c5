#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "ipva/csv.hpp"
#include "ipva/error.hpp"
#include "ipva/experiments.hpp"
#include "ipva/parallel.hpp"

namespace {

constexpr int kExitConfig = 2;
constexpr int kExitNumerical = 3;

struct CommonArgs {
  std::string config_path;
  std::string out;
  std::vector<std::string> sets;
  std::string seeds;
  std::string preset;
  double duration = 0.0;
  std::size_t workers = 0;
};

void add_common(CLI::App* sub, CommonArgs& a, bool needs_out = true) {
  sub->add_option("-c,--config", a.config_path, "key = value config file")
      ->check(CLI::ExistingFile);
  auto* out = sub->add_option("-o,--out", a.out, "output directory");
  if (needs_out) out->required(false);
  sub->add_option("-s,--set", a.sets, "override a config key (key=value)")
      ->take_all();
  sub->add_option("--seeds", a.seeds, "seed list, e.g. 1:50 or 3,7,9");
  sub->add_option("--preset", a.preset, "parameter preset (table1, pareto3)");
  sub->add_option("--duration", a.duration, "simulated seconds per run");
  sub->add_option("-j,--workers", a.workers, "worker threads (0 = auto)");
}

ipva::KeyValueConfig build_config(const CommonArgs& a,
                                  const std::string& experiment) {
  ipva::KeyValueConfig cfg = a.config_path.empty()
                                 ? ipva::KeyValueConfig()
                                 : ipva::KeyValueConfig::load(a.config_path);
  if (!experiment.empty()) cfg.set("experiment", experiment);
  if (!a.out.empty()) cfg.set("out", a.out);
  if (!a.seeds.empty()) cfg.set("seeds", a.seeds);
  if (!a.preset.empty()) cfg.set("preset", a.preset);
  if (a.duration > 0.0) cfg.set("duration", ipva::format_double(a.duration));
  for (const std::string& kv : a.sets) {
    const auto eq = kv.find('=');
    if (eq == std::string::npos || eq == 0) {
      throw ipva::Error(ipva::ErrorKind::kConfig,
                        "--set expects key=value, got '" + kv + "'");
    }
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t"));
      s.erase(s.find_last_not_of(" \t") + 1);
      return s;
    };
    cfg.set(trim(kv.substr(0, eq)), trim(kv.substr(eq + 1)));
  }
  return cfg;
}

int run(const CommonArgs& a, const std::string& experiment) {
  if (a.workers > 0) ipva::worker_count_override() = a.workers;
  const ipva::KeyValueConfig cfg = build_config(a, experiment);
  const ipva::ExperimentSpec spec = ipva::ExperimentSpec::from_config(cfg);
  const ipva::ExperimentReport rep = ipva::run_experiment(spec);
  std::cout << spec.name << ": " << rep.files.size() << " files in "
            << spec.output_dir << " (config " << rep.hash << ", "
            << std::fixed << std::setprecision(2) << rep.wall_seconds
            << " s)\n";
  for (const std::string& f : rep.files) std::cout << "  " << f << "\n";
  return 0;
}

// Prints the manifest metadata and any summary tables of an artifact
// directory, and checks that the recorded hash matches the stored config.
int report(const std::string& dir) {
  namespace fs = std::filesystem;
  const fs::path manifest = fs::path(dir) / "manifest.txt";
  if (!fs::exists(manifest)) {
    throw ipva::Error(ipva::ErrorKind::kConfig,
                      "no manifest.txt in " + dir);
  }
  std::ifstream in(manifest);
  std::string line;
  std::string recorded;
  while (std::getline(in, line)) {
    if (line.rfind("# ", 0) == 0) {
      std::cout << line.substr(2) << "\n";
      if (line.rfind("# config_hash = ", 0) == 0) recorded = line.substr(16);
    }
  }
  const std::string actual =
      ipva::config_hash(ipva::KeyValueConfig::load(manifest.string()));
  std::cout << "config hash " << (actual == recorded ? "verified" : "MISMATCH")
            << "\n";
  for (const char* name :
       {"summary.csv", "stationarity.csv", "sl_accuracy.csv",
        "observer_summary.csv", "metrics.csv"}) {
    const fs::path p = fs::path(dir) / name;
    if (!fs::exists(p)) continue;
    std::cout << "\n" << name << "\n";
    std::ifstream t(p);
    while (std::getline(t, line)) std::cout << "  " << line << "\n";
  }
  return actual == recorded ? 0 : kExitConfig;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Inerter pendulum vibration absorber experiments"};
  app.require_subcommand(1);

  CommonArgs simulate_args, optimize_args, linearize_args, mpc_args,
      observe_args, psd_args, run_args;
  std::string mpc_objective = "energy";
  std::string simulate_kind = "simulate";
  std::string report_dir;

  auto* sim = app.add_subcommand("simulate", "passive run; trajectory.csv");
  add_common(sim, simulate_args);
  sim->add_flag("--stationarity{stationarity}", simulate_kind,
                "cumulative-mean stationarity over the seed set instead");

  auto* opt = app.add_subcommand("optimize", "design grid and Pareto front");
  add_common(opt, optimize_args);

  auto* lin = app.add_subcommand(
      "linearize", "equivalent and Jacobian linear models with accuracy");
  add_common(lin, linearize_args);

  auto* mpc = app.add_subcommand("mpc", "closed-loop controller comparison");
  add_common(mpc, mpc_args);
  mpc->add_option("--objective", mpc_objective)
      ->check(CLI::IsMember({"energy", "comfort", "mixed", "timing"}));

  auto* obs = app.add_subcommand("observe", "road estimation with the observer");
  add_common(obs, observe_args);

  auto* psd = app.add_subcommand("psd", "power and acceleration spectra");
  add_common(psd, psd_args);

  auto* rep = app.add_subcommand("report", "summarize an artifact directory");
  rep->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);

  auto* runner = app.add_subcommand(
      "run", "any experiment named by the config's `experiment` key");
  add_common(runner, run_args);

  CLI11_PARSE(app, argc, argv);

  try {
    if (sim->parsed()) return run(simulate_args, simulate_kind);
    if (opt->parsed()) return run(optimize_args, "pareto");
    if (lin->parsed()) return run(linearize_args, "sl-accuracy");
    if (mpc->parsed()) {
      return run(mpc_args, mpc_objective == "timing" ? "timing"
                                                     : "mpc-" + mpc_objective);
    }
    if (obs->parsed()) return run(observe_args, "observer");
    if (psd->parsed()) return run(psd_args, "psd");
    if (rep->parsed()) return report(report_dir);
    if (runner->parsed()) return run(run_args, "");
  } catch (const ipva::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.is_config_error() ? kExitConfig : kExitNumerical;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return 0;
}
