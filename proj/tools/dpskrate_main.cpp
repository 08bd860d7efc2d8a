#include <cstdint>
#include <exception>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "dpskrate/config.hpp"
#include "dpskrate/engine.hpp"
#include "dpskrate/sweep.hpp"

namespace {

std::vector<dpsk::SweepConfig> resolve_jobs(const std::string& config_path,
                                            const std::string& preset_name) {
  if (config_path.empty() == preset_name.empty())
    throw dpsk::ConfigError("give exactly one of --config and --preset");
  if (!preset_name.empty()) return dpsk::preset(preset_name);
  return {dpsk::load_config(config_path)};
}

int run_timing(double distance_km, const std::string& medium,
               double period_s) {
  double speed = 0.0;
  if (medium == "fiber") {
    speed = 2.0e8;  // silica group velocity, 2c/3
  } else if (medium == "free-space") {
    speed = 3.0e8;
  } else {
    std::cerr << "unknown medium '" << medium
              << "': accepted values are fiber, free-space\n";
    return 1;
  }
  const dpsk::TimingCheck tc =
      dpsk::timing_feasibility(distance_km * 1000.0, speed,
                               period_s < 0.0 ? 0.0 : period_s);
  std::cout << "distance          = " << distance_km << " km (" << medium
            << ")\n"
            << "minimum period    = " << tc.min_period_s << " s\n";
  if (tc.min_period_s > 0.0)
    std::cout << "max repetition    = " << 1.0 / tc.min_period_s << " Hz\n";
  else
    std::cout << "max repetition    = unbounded (no propagation-delay "
                 "constraint)\n";
  if (period_s >= 0.0)
    std::cout << "period " << period_s << " s is "
              << (tc.feasible ? "feasible" : "too short") << '\n';
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{
      "certified finite-size key rates for phase-encoded QKD over lossy "
      "links"};
  app.require_subcommand(1);

  std::string config_path;
  std::string preset_name;
  std::string out_path;
  int workers = 0;
  bool dry_run = false;
  std::uint64_t seed = 0;

  CLI::App* point = app.add_subcommand("point", "evaluate one parameter point");
  point->add_option("--config", config_path, "key-value config file")
      ->required();
  point->add_flag("--dry-run", dry_run, "print the resolved parameters only");
  point->add_option("--seed", seed, "recorded in the resolved config");

  CLI::App* sweep =
      app.add_subcommand("sweep", "run a parameter grid and write CSV");
  sweep->add_option("--config", config_path, "key-value config file");
  sweep->add_option("--preset", preset_name, "built-in figure sweep");
  sweep->add_option("--out", out_path, "override the output path");
  sweep->add_option("--workers", workers, "override the worker count");
  sweep->add_flag("--dry-run", dry_run, "print the resolved configs only");
  sweep->add_option("--seed", seed, "recorded in the resolved config");

  CLI::App* timing = app.add_subcommand(
      "timing-check", "minimum pulse period for a link length");
  double distance_km = 0.0;
  std::string medium = "fiber";
  double period_s = -1.0;
  timing->add_option("--distance-km", distance_km, "one-way link length")
      ->required();
  timing->add_option("--medium", medium, "fiber or free-space");
  timing->add_option("--period-s", period_s, "pulse period to check");

  CLI::App* presets =
      app.add_subcommand("presets", "list the built-in figure sweeps");
  std::string show_name;
  presets->add_option("--name", show_name, "print one preset's full configs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  }

  try {
    if (point->parsed()) {
      dpsk::SweepConfig cfg = dpsk::load_config(config_path);
      if (point->count("--seed") > 0) cfg.seed = seed;
      if (dry_run) {
        std::cout << dpsk::render_config(cfg);
        return 0;
      }
      const dpsk::KeyRateResult r = dpsk::run_point(cfg, std::cout);
      return r.certified() ? 0 : 2;
    }

    if (sweep->parsed()) {
      std::vector<dpsk::SweepConfig> jobs =
          resolve_jobs(config_path, preset_name);
      if (!out_path.empty()) {
        if (jobs.size() != 1)
          throw dpsk::ConfigError(
              "--out applies to single-file sweeps; this preset emits " +
              std::to_string(jobs.size()) + " files");
        jobs[0].output_path = out_path;
      }
      for (dpsk::SweepConfig& job : jobs) {
        if (workers > 0) job.workers = workers;
        if (sweep->count("--seed") > 0) job.seed = seed;
      }
      if (dry_run) {
        for (const dpsk::SweepConfig& job : jobs)
          std::cout << "# -> " << job.output_path << '\n'
                    << dpsk::render_config(job) << '\n';
        return 0;
      }
      int failed = 0;
      for (const dpsk::SweepConfig& job : jobs) {
        const dpsk::SweepSummary s = dpsk::run_sweep(job);
        failed += s.failed;
        std::cout << job.output_path << ": " << (s.total - s.failed) << "/"
                  << s.total << " points ok\n";
      }
      return failed > 0 ? 2 : 0;
    }

    if (timing->parsed()) return run_timing(distance_km, medium, period_s);

    if (presets->parsed()) {
      if (!show_name.empty()) {
        for (const dpsk::SweepConfig& cfg : dpsk::preset(show_name))
          std::cout << "# -> " << cfg.output_path << '\n'
                    << dpsk::render_config(cfg) << '\n';
        return 0;
      }
      for (const std::string& name : dpsk::preset_names()) {
        std::cout << name << ":";
        for (const dpsk::SweepConfig& cfg : dpsk::preset(name))
          std::cout << ' ' << cfg.output_path;
        std::cout << '\n';
      }
      return 0;
    }
  } catch (const dpsk::ConfigError& e) {
    std::cerr << e.what() << '\n';
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
