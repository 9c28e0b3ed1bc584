// carvesim: command-line front end. Every subcommand reads the shared JSON
// configuration, runs one module and writes its files plus manifest.json into
// the output directory. Exit codes: 0 success, 2 configuration error,
// 3 numeric failure, 1 anything else (I/O).

#include <CLI11.hpp>

#include <filesystem>
#include <iostream>
#include <map>
#include <string>
#include <vector>

#include "carvesim/cli_harness.hpp"

namespace {

using namespace carvesim;
namespace fs = std::filesystem;

constexpr int kExitOk = 0;
constexpr int kExitOther = 1;
constexpr int kExitConfig = 2;
constexpr int kExitNumeric = 3;

struct SubcommandOptions {
  CLI::App* app = nullptr;
  std::string config;
  std::uint64_t seed = 0;
  std::uint64_t samples = 0;
  std::string out;
  unsigned workers = 0;
  std::vector<std::string> overrides;
  double contrast = 0.0;
  std::string records;
  std::string calibration;
  CLI::Option* seed_opt = nullptr;
  CLI::Option* samples_opt = nullptr;
  CLI::Option* contrast_opt = nullptr;
  CLI::Option* records_opt = nullptr;
  CLI::Option* calibration_opt = nullptr;
};

const std::vector<std::pair<std::string, std::string>> kSubcommands{
    {"spectrum", "cavity reflection spectrum and thermally averaged reflectivities"},
    {"carve", "heralded state and parity curve at the configured angle"},
    {"optimize", "fidelity landscape over the preparation angle and its optimum"},
    {"tomography", "state estimate with bootstrap intervals from a record file"},
    {"transport", "light-shift ramp and retained contrast versus pulse number"},
    {"loading", "survival map of the tweezer-to-lattice morph"},
    {"rates", "photon budget and Bell-pair rate"},
    {"experiment", "full in-situ and post-transport pipeline with error budget"}};

void print_written(const fs::path& dir, const RunManifest& m) {
  for (const auto& name : m.outputs) std::cout << (dir / name).string() << '\n';
  std::cout << (dir / kManifestName).string() << '\n';
}

Json effective_config(const std::string& name, const SubcommandOptions& o) {
  Json cfg = config::load(o.config);
  for (const auto& s : o.overrides) config::apply_override(cfg, s);
  if (o.seed_opt->count()) config::set_value(cfg, "run", "seed", o.seed);
  if (o.samples_opt->count()) {
    const auto key = cli::samples_key(name);
    if (key.empty())
      std::cerr << "note: " << name << " is deterministic; --samples has no effect\n";
    else
      config::apply_override(cfg, key + "=" + std::to_string(o.samples));
  }
  if (o.contrast_opt && o.contrast_opt->count()) config::set_value(cfg, "carving", "contrast", o.contrast);
  if (o.records_opt && o.records_opt->count())
    config::set_value(cfg, "tomography", "records", fs::absolute(o.records).string());
  if (o.calibration_opt && o.calibration_opt->count())
    config::set_value(cfg, "tomography", "calibration", fs::absolute(o.calibration).string());
  return cfg;
}

int run(int argc, char** argv) {
  CLI::App app{"carvesim: heralded atom-pair entanglement simulator"};
  app.require_subcommand(0, 1);
  std::string replay_path, replay_out;
  unsigned replay_workers = 0;
  bool print_defaults = false;
  app.add_option("--replay", replay_path, "rerun the manifest written by an earlier run")->check(CLI::ExistingFile);
  app.add_option("--out", replay_out, "output directory for --replay (default: the manifest's directory)");
  app.add_option("--workers", replay_workers, "worker threads for --replay (0: all cores)");
  app.add_flag("--print-defaults", print_defaults, "print the default configuration and exit");

  std::map<std::string, SubcommandOptions> subs;
  for (const auto& [name, description] : kSubcommands) {
    auto& o = subs[name];
    o.app = app.add_subcommand(name, description);
    o.app->add_option("-c,--config", o.config, "shared configuration file (JSON)");
    o.seed_opt = o.app->add_option("--seed", o.seed, "master seed (run.seed)");
    o.samples_opt = o.app->add_option("--samples", o.samples, "Monte Carlo samples or bootstrap resamples");
    o.app->add_option("--out", o.out, "output directory (default: out/<subcommand>)");
    o.app->add_option("--workers", o.workers, "worker threads (0: all cores); outputs do not depend on it");
    o.app->add_option("--set", o.overrides, "override a configuration value, section.key=value");
  }
  subs["optimize"].contrast_opt = subs["optimize"].app->add_option("--contrast", subs["optimize"].contrast,
                                                                   "fringe contrast V (carving.contrast)");
  subs["carve"].contrast_opt =
      subs["carve"].app->add_option("--contrast", subs["carve"].contrast, "fringe contrast V (carving.contrast)");
  subs["tomography"].records_opt =
      subs["tomography"].app->add_option("--records", subs["tomography"].records, "record file");
  subs["tomography"].calibration_opt =
      subs["tomography"].app->add_option("--cal", subs["tomography"].calibration, "push-out calibration file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? kExitOk : kExitConfig;
  }

  if (print_defaults) {
    std::cout << config::defaults().dump(2) << '\n';
    return kExitOk;
  }

  if (!replay_path.empty()) {
    if (!app.get_subcommands().empty()) {
      std::cerr << "error: --replay does not take a subcommand\n" << app.help();
      return kExitConfig;
    }
    set_worker_count(replay_workers);
    const fs::path dir = replay_out.empty() ? fs::path(replay_path).parent_path() : fs::path(replay_out);
    print_written(dir, cli::replay(replay_path, dir));
    return kExitOk;
  }

  if (app.get_subcommands().empty()) {
    std::cerr << "error: a subcommand is required\n" << app.help();
    return kExitConfig;
  }
  const std::string name = app.get_subcommands().front()->get_name();
  const auto& o = subs.at(name);
  if (o.config.empty()) {
    std::cerr << "error: --config FILE is required\n" << o.app->help();
    return kExitConfig;
  }
  if (!fs::exists(o.config)) {
    std::cerr << "error: configuration file '" << o.config << "' does not exist\n" << o.app->help();
    return kExitConfig;
  }
  const Json cfg = effective_config(name, o);
  set_worker_count(o.workers);
  const fs::path dir = o.out.empty() ? fs::path("out") / name : fs::path(o.out);
  print_written(dir, cli::execute(name, cfg, dir));
  return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const carvesim::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const carvesim::InvalidArgument& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const carvesim::NumericError& e) {
    std::cerr << "numeric failure: " << e.what() << '\n';
    return kExitNumeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitOther;
  }
}
