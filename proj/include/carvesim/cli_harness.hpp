#pragma once

// Subcommands of the command-line tool. Each one reads the effective
// configuration, runs its module and writes CSV or key-value files into an
// output directory, followed by a manifest that reproduces the run.

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "carvesim/config.hpp"

namespace carvesim {

namespace cli {

namespace fs = std::filesystem;

/// Collects output files in a directory; every write is atomic.
class OutputSet {
 public:
  explicit OutputSet(fs::path dir) : dir_(std::move(dir)) {}

  void write(const std::string& name, const std::string& content) {
    write_file_atomic(dir_ / name, content);
    names_.push_back(name);
  }

  const fs::path& dir() const { return dir_; }
  const std::vector<std::string>& names() const { return names_; }

 private:
  fs::path dir_;
  std::vector<std::string> names_;
};

namespace detail {
constexpr std::uint64_t kSpectrumStream = 7;
constexpr std::uint64_t kTomographyStream = 8;
constexpr std::uint64_t kTransportStream = 9;
constexpr std::uint64_t kLoadingStream = 10;

inline constexpr const char* kBasisLabels[4] = {"00", "01", "10", "11"};

inline std::uint64_t seed_of(const Json& cfg) { return config::count(cfg, "run", "seed"); }
}  // namespace detail

inline void run_spectrum(const Json& cfg, OutputSet& out) {
  const auto p = config::cavity_params(cfg);
  const double span = config::number(cfg, "cavity", "span_MHz") * 1e6;
  const auto points = config::count(cfg, "cavity", "points");
  require(span > 0.0 && points >= 2, "cavity: span_MHz must be > 0 and points >= 2");
  const auto detunings = linspace(-span, span, points);

  const auto cloud = config::thermal_cloud(cfg);
  const auto mode = calibrate_mode_function(config::number(cfg, "cavity", "peak_cooperativity"),
                                            config::number(cfg, "cavity", "mean_cooperativity"),
                                            config::number(cfg, "cavity", "sd_cooperativity"), cloud);
  const auto dist = sample_thermal_cooperativity(mode, cloud, config::count(cfg, "cavity", "thermal_samples"),
                                                 derive_seed(detail::seed_of(cfg), detail::kSpectrumStream, 0));

  CsvTable spectrum({"detuning_Hz", "reflectivity"});
  CsvTable parts({"detuning_Hz", "reflectivity_empty", "reflectivity_one_atom", "reflectivity_two_atoms",
                  "reflectivity_thermal"});
  const auto thermal = parallel_map<double>(detunings.size(), [&](std::size_t i) {
    return thermal_average_reflectivity(dist, p, constants::two_pi * detunings[i]);
  });
  for (std::size_t i = 0; i < detunings.size(); ++i) {
    const double w = constants::two_pi * detunings[i];
    const auto r = basis_state_reflectivities(p, p, w);
    spectrum.add_row(std::vector<double>{detunings[i], std::norm(r[1])});
    parts.add_row(std::vector<double>{detunings[i], std::norm(r[0]), std::norm(r[1]), std::norm(r[3]), thermal[i]});
  }
  out.write("spectrum.csv", spectrum.str());
  out.write("spectrum_components.csv", parts.str());

  const auto point = reflectivities_of(basis_state_reflectivities(p, p));
  const auto averaged = thermal_basis_reflectivities(dist, dist, p);
  KeyValueDocument d;
  d.set("cooperativity", p.cooperativity());
  d.set("kappa_wg_over_kappa", p.kappa_wg / p.kappa);
  for (std::size_t k = 0; k < 4; ++k) d.set(std::string("R") + detail::kBasisLabels[k] + "_point", point[k]);
  d.set("thermal_samples", static_cast<std::uint64_t>(dist.samples().size()));
  d.set("thermal_cooperativity_mean", dist.mean());
  d.set("thermal_cooperativity_sd", dist.stddev());
  d.set("mode_radial_length_m", mode.radial_length_x);
  d.set("mode_vertical_decay_length_m", mode.vertical_decay_length);
  for (std::size_t k = 0; k < 4; ++k) d.set(std::string("R") + detail::kBasisLabels[k] + "_thermal", averaged[k]);
  out.write("spectrum_summary.txt", d.str());
}

inline void run_carve(const Json& cfg, OutputSet& out) {
  const auto c = config::carving_config(cfg);
  const auto n = config::count(cfg, "carving", "parity_points");
  require(n >= 2, "carving: parity_points must be >= 2");
  const auto phis = linspace(0.0, constants::pi, n);
  const auto cmp = predict_figure3(c, phis);

  CsvTable parity({"phi_rad", "parity_coherent", "parity_mixed"});
  for (std::size_t i = 0; i < phis.size(); ++i)
    parity.add_row(std::vector<double>{phis[i], cmp.coherent.parity[i], cmp.mixed.parity[i]});
  out.write("parity.csv", parity.str());

  KeyValueDocument d;
  d.set("theta_rad", c.theta);
  d.set("uncoupled_probability", c.uncoupled_probability());
  d.set("scattering_decay", c.decay_factor());
  for (const auto* pred : {&cmp.coherent, &cmp.mixed}) {
    const std::string m = pred->model == CarvingModel::coherent ? "coherent" : "mixed";
    auto single = c;
    single.model = pred->model;
    const auto outcome = carve(single);
    d.set(m + "_success_probability", outcome.success_probability);
    d.set(m + "_fidelity_psi_plus_undamped", outcome.fidelity_psi_plus);
    d.set(m + "_fidelity_phi_plus", pred->fidelity);
    for (std::size_t k = 0; k < 4; ++k) d.set(m + "_P" + detail::kBasisLabels[k], pred->populations[k]);
    d.set(m + "_even_population", pred->even_population());
  }
  out.write("carve.txt", d.str());
}

inline void run_optimize(const Json& cfg, OutputSet& out) {
  const auto c = config::carving_config(cfg);
  const double step = config::number(cfg, "carving", "theta_step_pi") * constants::pi;
  const auto best = optimize_angle(c.amplitudes, c.interferometer.contrast, step);

  CsvTable t({"theta_rad", "contrast", "fidelity", "success_prob"});
  for (const auto& p : best.landscape)
    t.add_row(std::vector<double>{p.theta, p.contrast, p.fidelity, p.success_probability});
  out.write("landscape.csv", t.str());

  auto derived = c;
  derived.interferometer.uncoupled_probability.reset();
  KeyValueDocument d;
  d.set("contrast", c.interferometer.contrast);
  d.set("mismatch", c.interferometer.mismatch());
  d.set("theta_star_rad", best.theta);
  d.set("theta_star_pi", best.theta / constants::pi);
  d.set("F_max", best.fidelity);
  d.set("success_probability", best.success_probability);
  d.set("uncoupled_probability_derived", derived.uncoupled_probability());
  out.write("optimum.txt", d.str());
}

inline void run_tomography(const Json& cfg, OutputSet& out) {
  const auto records_path = config::text(cfg, "tomography", "records");
  if (records_path.empty()) throw ConfigError("tomography.records is not set (use --records FILE)");
  std::istringstream rec_in(read_text_file(records_path));
  const auto records = parse_records(rec_in);
  RetentionCalibration cal;
  const auto cal_path = config::text(cfg, "tomography", "calibration");
  if (!cal_path.empty()) {
    std::istringstream cal_in(read_text_file(cal_path));
    cal = parse_calibration(cal_in);
  }
  const auto res = tomography(records, cal, config::count(cfg, "tomography", "resamples"),
                              derive_seed(detail::seed_of(cfg), detail::kTomographyStream, 0),
                              config::number(cfg, "tomography", "confidence"));
  out.write("tomography.txt", to_document(res).str());
}

inline void run_transport(const Json& cfg, OutputSet& out) {
  const auto m = config::transport_model(cfg);
  auto shape = m.mean_ramp_shape();
  shape.samples = config::count(cfg, "transport", "ramp_points");
  const auto ramp = build_ramp(shape);
  CsvTable r({"t_s", "delta0_rad_per_s"});
  for (std::size_t i = 0; i < ramp.samples.size(); ++i)
    r.add_row(std::vector<double>{static_cast<double>(i) * ramp.dt, ramp.samples[i]});
  out.write("ramp.csv", r.str());

  const auto pulses_raw = config::at(cfg, "transport", "pulses").get<std::vector<std::uint64_t>>();
  const std::vector<std::size_t> pulses(pulses_raw.begin(), pulses_raw.end());
  const auto points =
      contrast_vs_pulses(m, pulses, config::count(cfg, "transport", "samples"),
                         derive_seed(detail::seed_of(cfg), detail::kTransportStream, 0),
                         config::number(cfg, "transport", "pulse_duration_us") * 1e-6);
  CsvTable c({"N", "contrast", "mc_error"});
  for (const auto& p : points)
    c.add_row({format_number(static_cast<std::uint64_t>(p.pulses)), format_number(p.contrast), format_number(p.mc_error)});
  out.write("contrast_vs_pulses.csv", c.str());

  const auto anchors = stationary_shifts(m.geometry, m.temperature, m.zeta);
  KeyValueDocument d;
  d.set("T2_star_s", reversible_dephasing_time(m.temperature, m.zeta));
  d.set("cavity_shift_rad_per_s", anchors.cavity);
  d.set("free_space_shift_rad_per_s", anchors.free_space);
  d.set("t2_prime_factor", m.t2_prime_factor());
  d.set("jitter_sd_s", m.noise.jitter_sd);
  d.set("samples", config::count(cfg, "transport", "samples"));
  out.write("transport_summary.txt", d.str());
}

inline void run_loading(const Json& cfg, OutputSet& out) {
  const auto morph = config::loading_morph(cfg);
  std::vector<double> temps, depths;
  for (double t : config::numbers(cfg, "loading", "temperatures_uK")) temps.push_back(t * 1e-6);
  for (double d : config::numbers(cfg, "loading", "depths_mK")) depths.push_back(units::energy_from_mk(d));
  LoadingOptions opt;
  opt.trajectory = config::trajectory_options(cfg);
  opt.seed = derive_seed(detail::seed_of(cfg), detail::kLoadingStream, 0);
  const auto samples = config::count(cfg, "loading", "samples");
  const auto map = survival_map(temps, depths, morph, samples, opt);

  CsvTable s({"temperature_K", "depth_K", "survival", "mc_error"});
  CsvTable detail({"temperature_K", "depth_K", "radial_first_site", "axial_first_site", "axial_higher_site",
                   "radial_lost", "axial_lost"});
  for (const auto& c : map.cells) {
    const double depth_k = units::energy_to_kelvin(c.depth);
    const auto& e = c.estimate;
    s.add_row(std::vector<double>{c.temperature, depth_k, e.joint.value, e.joint.mc_error});
    detail.add_row(std::vector<double>{c.temperature, depth_k, e.radial.first_site.value, e.axial.first_site.value,
                                       e.axial.higher_site.value, e.radial.lost.value, e.axial.lost.value});
  }
  out.write("survival_map.csv", s.str());
  out.write("survival_outcomes.csv", detail.str());

  KeyValueDocument d;
  d.set("morph_duration_s", morph.duration);
  d.set("samples_per_cell", samples);
  d.comment("measured loss on departure from the crystal, not simulated");
  d.set("departure_loss", config::number(cfg, "loading", "departure_loss"));
  out.write("loading_summary.txt", d.str());
}

inline void run_rates(const Json& cfg, OutputSet& out) {
  const auto b = photon_budget(config::number(cfg, "rates", "interferometer_transmission"),
                               config::detection_efficiency(cfg), config::number(cfg, "carving", "photons_sent"));
  const auto m = config::rate_model(cfg);
  KeyValueDocument d;
  d.set("eta_components", config::detection_chain(cfg).efficiency());
  d.set("eta", b.efficiency);
  d.set("N_collected", b.collected);
  d.set("pair_iterations_per_cycle", m.pair_iterations_per_cycle());
  d.set("bell_pair_rate_per_min", bell_pair_rate(m, b.collected));
  out.write("rates.txt", d.str());
}

inline void run_experiment(const Json& cfg, OutputSet& out) {
  const auto ec = config::experiment_config(cfg);
  const auto r = carvesim::run_experiment(ec);
  out.write("records_in_situ.csv", format_records(r.in_situ.records));
  out.write("records_post_transport.csv", format_records(r.post_transport.records));
  CsvTable cal({"h_A", "l_A", "h_B", "l_B"});
  cal.add_row(std::vector<double>{ec.pushout.h_a, ec.pushout.l_a, ec.pushout.h_b, ec.pushout.l_b});
  out.write("calibration_post_transport.csv", cal.str());
  out.write("tomography_in_situ.txt", to_document(r.in_situ.tomography).str());
  out.write("tomography_post_transport.txt", to_document(r.post_transport.tomography).str());

  CsvTable ladder({"stage", "fidelity_in_situ", "fidelity_post_transport"});
  for (const auto& s : fidelity_ladder(ec))
    ladder.add_row({to_string(s.stage), format_number(s.in_situ), format_number(s.post_transport)});
  out.write("error_budget.csv", ladder.str());

  const auto& pin = r.in_situ.tomography.estimate.populations;
  KeyValueDocument d;
  d.set("state_fidelity_in_situ", r.in_situ.state_fidelity);
  d.set("state_fidelity_post_transport", r.post_transport.state_fidelity);
  d.set("transport_contrast_A", r.contrast.atom_a);
  d.set("transport_contrast_B", r.contrast.atom_b);
  d.set("fidelity_in_situ", r.in_situ.tomography.estimate.fidelity);
  d.set("even_population_in_situ", pin[0] + pin[3]);
  d.set("fidelity_post_transport", r.post_transport.tomography.estimate.fidelity);
  d.set("fidelity_post_transport_uncorrected", r.uncorrected_fidelity);
  d.set("entanglement_certified_post_transport", r.post_transport.tomography.entanglement_certified());
  out.write("experiment_summary.txt", d.str());
}

using Runner = std::function<void(const Json&, OutputSet&)>;

inline const std::map<std::string, Runner>& runners() {
  static const std::map<std::string, Runner> r{
      {"spectrum", run_spectrum}, {"carve", run_carve},     {"optimize", run_optimize},
      {"tomography", run_tomography}, {"transport", run_transport}, {"loading", run_loading},
      {"rates", run_rates},       {"experiment", run_experiment}};
  return r;
}

/// Configuration key that `--samples` sets for each subcommand; empty when
/// the subcommand is deterministic.
inline std::string samples_key(const std::string& subcommand) {
  static const std::map<std::string, std::string> k{{"spectrum", "cavity.thermal_samples"},
                                                    {"tomography", "tomography.resamples"},
                                                    {"transport", "transport.samples"},
                                                    {"loading", "loading.samples"},
                                                    {"experiment", "experiment.bootstrap_resamples"}};
  const auto it = k.find(subcommand);
  return it == k.end() ? std::string{} : it->second;
}

/// Runs `subcommand` with the complete configuration `cfg`, writes its files
/// into `out_dir` and the manifest last.
inline RunManifest execute(const std::string& subcommand, const Json& cfg, const fs::path& out_dir) {
  const auto it = runners().find(subcommand);
  if (it == runners().end()) throw ConfigError("unknown subcommand '" + subcommand + "'");
  OutputSet out(out_dir);
  it->second(cfg, out);
  RunManifest m;
  m.subcommand = subcommand;
  m.config = cfg;
  m.seed = detail::seed_of(cfg);
  m.outputs = out.names();
  write_file_atomic(out_dir / kManifestName, m.str());
  return m;
}

/// Reruns a manifest into `out_dir`.
inline RunManifest replay(const fs::path& manifest_path, const fs::path& out_dir) {
  const auto m = RunManifest::load(manifest_path);
  return execute(m.subcommand, m.config, out_dir);
}

}  // namespace cli

}  // namespace carvesim
