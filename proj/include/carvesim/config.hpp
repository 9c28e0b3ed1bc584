#pragma once

// Shared configuration file and run manifest. The file is a JSON object with
// one section per module; every key has a default, units are part of the key
// name, and unknown sections or keys are rejected with the list of valid ones.

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "carvesim/carving_protocol.hpp"
#include "carvesim/cavity_model.hpp"
#include "carvesim/common.hpp"
#include "carvesim/io.hpp"
#include "carvesim/loading_dynamics.hpp"
#include "carvesim/pipeline.hpp"
#include "carvesim/readout_inference.hpp"
#include "carvesim/transport_coherence.hpp"

#ifndef CARVESIM_VERSION
#define CARVESIM_VERSION "0.0.0"
#endif

namespace carvesim {

using Json = nlohmann::ordered_json;

inline constexpr std::string_view kVersion = CARVESIM_VERSION;

namespace config {

/// Every section and key with its default value.
inline const Json& defaults() {
  static const Json d = [] {
    Json j;
    j["run"] = {{"seed", 1}};
    j["cavity"] = {{"two_g_MHz", 786.0},
                   {"gamma_MHz", 6.0},
                   {"kappa_MHz", 3800.0},
                   {"kappa_wg_over_kappa", 0.184},
                   {"atom_detuning_MHz", 0.0},
                   {"cavity_detuning_MHz", 0.0},
                   {"span_MHz", 2000.0},
                   {"points", 801},
                   {"peak_cooperativity", 47.0},
                   {"mean_cooperativity", 27.0},
                   {"sd_cooperativity", 25.0},
                   {"temperature_uK", 70.0},
                   {"radial_trap_kHz", 115.0},
                   {"axial_trap_kHz", 550.0},
                   {"thermal_samples", 1000}};
    j["carving"] = {{"theta_pi", 0.3},
                    {"photons_sent", 0.35},
                    {"model", "mixed"},
                    {"contrast", 0.96},
                    {"uncoupled_probability", 0.087},
                    {"reflectivities", {0.40, 0.94, 0.94, 0.97}},
                    {"cooperativity", 27.0},
                    {"kappa_wg_over_kappa", 0.184},
                    {"theta_step_pi", 0.005},
                    {"parity_points", 65}};
    j["readout"] = {{"photon_flux_per_s", 3.5e6},
                    {"integration_time_us", 25.0},
                    {"efficiency", 0.288},
                    {"threshold_counts", 16},
                    {"coupled_at_or_above", true},
                    {"reflectivities", {0.40, 0.94, 0.94, 0.97}},
                    {"h_A", 0.8},
                    {"l_A", 0.05},
                    {"h_B", 0.8},
                    {"l_B", 0.05}};
    j["tomography"] = {{"records", ""}, {"calibration", ""}, {"resamples", 1000}, {"confidence", 0.99}};
    j["transport"] = {{"depth_MHz", 32.0},
                      {"standing_wave_contrast", 1.2},
                      {"radial_standing_kHz", 115.0},
                      {"axial_standing_kHz", 550.0},
                      {"temperature_uK", 70.0},
                      {"zeta", 5.4e-4},
                      {"duration_us", 650.0},
                      {"steepness", 20.0},
                      {"t2_prime_cavity_ms", 4.9},
                      {"t2_prime_free_ms", 17.0},
                      {"cavity_fraction", 0.5},
                      {"energy_spread", 1.0},
                      {"jitter_us", 15.1},
                      {"pulses", {0, 1, 2, 3, 4, 5, 6}},
                      {"pulse_duration_us", 0.0},
                      {"samples", 4000},
                      {"ramp_points", 2001}};
    j["loading"] = {{"temperatures_uK", {1.0, 2.0, 4.0, 6.0, 8.0, 10.0, 15.0, 20.0, 30.0, 40.0}},
                    {"depths_mK", {1.0, 1.2, 1.4, 1.6, 1.8, 2.0, 2.1, 2.4, 2.7, 3.0}},
                    {"morph_duration_us", 65.0},
                    {"samples", 1000},
                    {"radial_window_waists", 5.0},
                    {"axial_window_rayleigh", 10.0},
                    {"departure_loss", 0.15}};
    j["rates"] = {{"interferometer_transmission", 0.1},
                  {"detection_efficiency", 0.28},
                  {"counter_efficiency", 0.6},
                  {"taper_coupling", 0.6},
                  {"path_throughput", 0.8},
                  {"loading_probability", 0.8},
                  {"cycle_rate_per_s", 0.25},
                  {"iterations_per_cycle", 6.25},
                  {"trigger_efficiency", 0.85}};
    j["experiment"] = {{"preparation_fidelity", 0.98},
                       {"cavity_shots", 500},
                       {"pushout_shots", 600},
                       {"parity_phases_pi", {0.0, 0.125, 0.25, 0.375, 0.5, 0.625, 0.75, 0.875}},
                       {"transport_enabled", true},
                       {"transport_pulses", 4},
                       {"transport_samples", 4000},
                       {"jitter_A_us", 15.1},
                       {"jitter_B_us", 15.1},
                       {"bootstrap_resamples", 1000},
                       {"confidence", 0.99}};
    return j;
  }();
  return d;
}

namespace detail {
inline std::string key_list(const Json& obj) {
  std::string out;
  for (const auto& [k, v] : obj.items()) out += (out.empty() ? "" : ", ") + k;
  return out;
}

inline bool is_count(const Json& v) {
  if (v.is_number_unsigned()) return true;
  if (v.is_number_integer()) return v.get<std::int64_t>() >= 0;
  if (v.is_number_float()) {
    const double x = v.get<double>();
    return x >= 0.0 && x <= 9.0e15 && std::floor(x) == x;
  }
  return false;
}

inline std::uint64_t as_count(const Json& v) {
  if (v.is_number_unsigned()) return v.get<std::uint64_t>();
  if (v.is_number_integer()) return static_cast<std::uint64_t>(v.get<std::int64_t>());
  return static_cast<std::uint64_t>(v.get<double>());
}

/// Type check of `v` against the default `def`; counts stay integral.
inline void check_value(const std::string& where, const Json& def, Json& v) {
  auto fail = [&](const std::string& want) { throw ConfigError(where + ": expected " + want + ", got " + v.dump()); };
  if (def.is_number_integer() || def.is_number_unsigned()) {
    if (!is_count(v)) fail("a non-negative integer");
    v = as_count(v);
  } else if (def.is_number()) {
    if (!v.is_number()) fail("a number");
    if (!std::isfinite(v.get<double>())) fail("a finite number");
  } else if (def.is_boolean()) {
    if (!v.is_boolean()) fail("true or false");
  } else if (def.is_string()) {
    if (!v.is_string()) fail("a string");
  } else if (def.is_array()) {
    if (!v.is_array() || v.empty()) fail("a non-empty list of numbers");
    const bool counts = def.front().is_number_integer() || def.front().is_number_unsigned();
    for (auto& e : v) {
      if (counts ? !is_count(e) : !e.is_number()) fail(counts ? "a list of non-negative integers" : "a list of numbers");
      if (counts) e = as_count(e);
    }
  }
}

inline const Json& section_schema(const std::string& section) {
  const auto& d = defaults();
  if (!d.contains(section))
    throw ConfigError("unknown section '" + section + "'; valid sections: " + key_list(d));
  return d.at(section);
}

inline const Json& key_schema(const std::string& section, const std::string& key) {
  const auto& s = section_schema(section);
  if (!s.contains(key))
    throw ConfigError("unknown key '" + section + "." + key + "'; valid keys in [" + section + "]: " + key_list(s));
  return s.at(key);
}
}  // namespace detail

/// Keys that accept null: carving.uncoupled_probability (null derives p_u
/// from the interferometer) and rates.detection_efficiency (null takes the
/// product of the detection components).
inline bool nullable(const std::string& section, const std::string& key) {
  return (section == "carving" && key == "uncoupled_probability") ||
         (section == "rates" && key == "detection_efficiency");
}

inline void set_value(Json& cfg, const std::string& section, const std::string& key, Json value) {
  const Json& def = detail::key_schema(section, key);
  const std::string where = section + "." + key;
  if (value.is_null()) {
    if (!nullable(section, key)) throw ConfigError(where + ": null is not allowed");
  } else {
    detail::check_value(where, def, value);
  }
  cfg[section][key] = std::move(value);
}

/// Defaults overlaid with `doc`; every section and key of `doc` is checked.
inline Json merge(const Json& doc) {
  if (!doc.is_object()) throw ConfigError("configuration must be a JSON object of sections");
  Json cfg = defaults();
  for (const auto& [section, body] : doc.items()) {
    detail::section_schema(section);
    if (!body.is_object()) throw ConfigError("section '" + section + "' must be an object");
    for (const auto& [key, value] : body.items()) set_value(cfg, section, key, value);
  }
  return cfg;
}

inline Json parse(const std::string& text, const std::string& origin) {
  try {
    return merge(Json::parse(text, nullptr, true, true));
  } catch (const Json::exception& e) {
    throw ConfigError(origin + ": " + e.what());
  }
}

inline Json load(const std::filesystem::path& path) { return parse(read_text_file(path), path.string()); }

/// `section.key=value`; the value is read as JSON, or taken verbatim as a
/// string when it is not valid JSON or the key holds an unquoted string.
inline void apply_override(Json& cfg, std::string_view assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string_view::npos || dot == std::string_view::npos || dot > eq)
    throw ConfigError("override '" + std::string(assignment) + "' must look like section.key=value");
  const std::string section(assignment.substr(0, dot));
  const std::string key(assignment.substr(dot + 1, eq - dot - 1));
  const std::string text(assignment.substr(eq + 1));
  const Json& def = detail::key_schema(section, key);
  Json value;
  if (def.is_string() && !(text.size() >= 2 && text.front() == '"' && text.back() == '"')) {
    value = text;
  } else {
    try {
      value = Json::parse(text);
    } catch (const Json::exception&) {
      value = text;
    }
  }
  set_value(cfg, section, key, std::move(value));
}

// ---------------------------------------------------------------------------
// Typed access

inline const Json& at(const Json& cfg, const std::string& section, const std::string& key) {
  detail::key_schema(section, key);
  return cfg.at(section).at(key);
}

inline double number(const Json& cfg, const std::string& section, const std::string& key) {
  return at(cfg, section, key).get<double>();
}

inline std::uint64_t count(const Json& cfg, const std::string& section, const std::string& key) {
  return at(cfg, section, key).get<std::uint64_t>();
}

inline bool flag(const Json& cfg, const std::string& section, const std::string& key) {
  return at(cfg, section, key).get<bool>();
}

inline std::string text(const Json& cfg, const std::string& section, const std::string& key) {
  return at(cfg, section, key).get<std::string>();
}

inline std::vector<double> numbers(const Json& cfg, const std::string& section, const std::string& key) {
  return at(cfg, section, key).get<std::vector<double>>();
}

inline std::array<double, 4> four(const Json& cfg, const std::string& section, const std::string& key) {
  const auto v = numbers(cfg, section, key);
  if (v.size() != 4) throw ConfigError(section + "." + key + ": expected 4 values (00, 01, 10, 11)");
  return {v[0], v[1], v[2], v[3]};
}

// ---------------------------------------------------------------------------
// Module structs

inline CavityParams cavity_params(const Json& cfg) {
  CavityParams p;
  p.g = units::mhz_to_rad(number(cfg, "cavity", "two_g_MHz")) / 2.0;
  p.gamma = units::mhz_to_rad(number(cfg, "cavity", "gamma_MHz"));
  p.kappa = units::mhz_to_rad(number(cfg, "cavity", "kappa_MHz"));
  p.kappa_wg = number(cfg, "cavity", "kappa_wg_over_kappa") * p.kappa;
  p.atom_detuning = units::mhz_to_rad(number(cfg, "cavity", "atom_detuning_MHz"));
  p.cavity_detuning = units::mhz_to_rad(number(cfg, "cavity", "cavity_detuning_MHz"));
  p.validate();
  return p;
}

inline ThermalCloud thermal_cloud(const Json& cfg) {
  ThermalCloud c;
  c.temperature = number(cfg, "cavity", "temperature_uK") * 1e-6;
  c.radial_frequency = units::khz_to_rad(number(cfg, "cavity", "radial_trap_kHz"));
  c.axial_frequency = units::khz_to_rad(number(cfg, "cavity", "axial_trap_kHz"));
  require(c.temperature > 0.0 && c.radial_frequency > 0.0 && c.axial_frequency > 0.0,
          "cavity: temperature and trap frequencies must be > 0");
  return c;
}

inline CarvingModel carving_model(const std::string& name) {
  if (name == "mixed") return CarvingModel::mixed;
  if (name == "coherent") return CarvingModel::coherent;
  throw ConfigError("carving.model: expected \"mixed\" or \"coherent\", got \"" + name + "\"");
}

inline CarvingConfig carving_config(const Json& cfg) {
  CarvingConfig c;
  c.theta = number(cfg, "carving", "theta_pi") * constants::pi;
  c.photons_sent = number(cfg, "carving", "photons_sent");
  c.model = carving_model(text(cfg, "carving", "model"));
  c.interferometer.contrast = number(cfg, "carving", "contrast");
  const auto& pu = at(cfg, "carving", "uncoupled_probability");
  c.interferometer.uncoupled_probability =
      pu.is_null() ? std::optional<double>{} : std::optional<double>{pu.get<double>()};
  c.amplitudes = amplitudes_from_reflectivities(four(cfg, "carving", "reflectivities"));
  c.cooperativity = number(cfg, "carving", "cooperativity");
  c.kappa_wg_over_kappa = number(cfg, "carving", "kappa_wg_over_kappa");
  c.validate();
  return c;
}

inline ReadoutModel readout_model(const Json& cfg) {
  ReadoutModel m;
  m.photon_flux = number(cfg, "readout", "photon_flux_per_s");
  m.integration_time = number(cfg, "readout", "integration_time_us") * 1e-6;
  m.efficiency = number(cfg, "readout", "efficiency");
  m.threshold = count(cfg, "readout", "threshold_counts");
  m.coupled_at_or_above = flag(cfg, "readout", "coupled_at_or_above");
  m.validate();
  return m;
}

inline RetentionCalibration pushout_calibration(const Json& cfg) {
  RetentionCalibration c{number(cfg, "readout", "h_A"), number(cfg, "readout", "l_A"), number(cfg, "readout", "h_B"),
                         number(cfg, "readout", "l_B")};
  c.validate();
  return c;
}

inline TrapGeometry trap_geometry(const Json& cfg) {
  return TrapGeometry::calibrated(units::energy_from_mhz(number(cfg, "transport", "depth_MHz")),
                                  number(cfg, "transport", "standing_wave_contrast"),
                                  units::khz_to_rad(number(cfg, "transport", "radial_standing_kHz")),
                                  units::khz_to_rad(number(cfg, "transport", "axial_standing_kHz")));
}

inline TransportModel transport_model(const Json& cfg) {
  TransportModel m;
  m.geometry = trap_geometry(cfg);
  m.temperature = number(cfg, "transport", "temperature_uK") * 1e-6;
  m.zeta = number(cfg, "transport", "zeta");
  m.duration = number(cfg, "transport", "duration_us") * 1e-6;
  m.steepness = number(cfg, "transport", "steepness");
  m.t2_prime_cavity = number(cfg, "transport", "t2_prime_cavity_ms") * 1e-3;
  m.t2_prime_free = number(cfg, "transport", "t2_prime_free_ms") * 1e-3;
  m.cavity_fraction = number(cfg, "transport", "cavity_fraction");
  m.noise.energy_spread = number(cfg, "transport", "energy_spread");
  m.noise.jitter_sd = number(cfg, "transport", "jitter_us") * 1e-6;
  m.validate();
  return m;
}

inline PotentialMorph loading_morph(const Json& cfg) {
  PotentialMorph m;
  m.geometry = trap_geometry(cfg);
  m.duration = number(cfg, "loading", "morph_duration_us") * 1e-6;
  m.validate();
  return m;
}

inline TrajectoryOptions trajectory_options(const Json& cfg) {
  TrajectoryOptions o;
  o.radial_window = number(cfg, "loading", "radial_window_waists");
  o.axial_window = number(cfg, "loading", "axial_window_rayleigh");
  require(o.radial_window > 0.0 && o.axial_window > 0.0, "loading: escape windows must be > 0");
  return o;
}

inline DetectionChain detection_chain(const Json& cfg) {
  return {number(cfg, "rates", "counter_efficiency"), number(cfg, "rates", "taper_coupling"),
          number(cfg, "rates", "path_throughput")};
}

/// Quoted total efficiency, or the component product when unset.
inline double detection_efficiency(const Json& cfg) {
  const auto& v = at(cfg, "rates", "detection_efficiency");
  return v.is_null() ? detection_chain(cfg).efficiency() : v.get<double>();
}

inline RateModel rate_model(const Json& cfg) {
  RateModel m{number(cfg, "rates", "loading_probability"), number(cfg, "rates", "cycle_rate_per_s"),
              number(cfg, "rates", "iterations_per_cycle"), number(cfg, "rates", "trigger_efficiency")};
  m.validate();
  return m;
}

inline ExperimentConfig experiment_config(const Json& cfg) {
  ExperimentConfig c;
  c.preparation_fidelity = number(cfg, "experiment", "preparation_fidelity");
  c.carving = carving_config(cfg);
  c.cavity_readout = readout_model(cfg);
  c.readout_reflectivities = four(cfg, "readout", "reflectivities");
  c.pushout = pushout_calibration(cfg);
  c.transport.enabled = flag(cfg, "experiment", "transport_enabled");
  c.transport.model = transport_model(cfg);
  c.transport.pulses = count(cfg, "experiment", "transport_pulses");
  c.transport.samples = count(cfg, "experiment", "transport_samples");
  c.transport.jitter_a = number(cfg, "experiment", "jitter_A_us") * 1e-6;
  c.transport.jitter_b = number(cfg, "experiment", "jitter_B_us") * 1e-6;
  c.cavity_shots = count(cfg, "experiment", "cavity_shots");
  c.pushout_shots = count(cfg, "experiment", "pushout_shots");
  c.parity_phases.clear();
  for (double p : numbers(cfg, "experiment", "parity_phases_pi")) c.parity_phases.push_back(p * constants::pi);
  c.bootstrap_resamples = count(cfg, "experiment", "bootstrap_resamples");
  c.confidence = number(cfg, "experiment", "confidence");
  c.seed = count(cfg, "run", "seed");
  c.validate();
  return c;
}

}  // namespace config

// ---------------------------------------------------------------------------
// Run manifest

/// Everything needed to rerun a subcommand: the complete effective
/// configuration (defaults included), the seed, the tool version and the
/// output files, relative to the manifest's directory.
struct RunManifest {
  std::string subcommand;
  Json config;
  std::uint64_t seed = 0;
  std::string version{kVersion};
  std::vector<std::string> outputs;

  Json to_json() const {
    Json j;
    j["tool"] = "carvesim";
    j["version"] = version;
    j["subcommand"] = subcommand;
    j["seed"] = seed;
    j["outputs"] = outputs;
    j["config"] = config;
    return j;
  }

  std::string str() const { return to_json().dump(2) + "\n"; }

  static RunManifest from_json(const Json& j) {
    try {
      RunManifest m;
      if (j.at("tool").get<std::string>() != "carvesim") throw ConfigError("manifest was not written by carvesim");
      m.version = j.at("version").get<std::string>();
      m.subcommand = j.at("subcommand").get<std::string>();
      m.seed = j.at("seed").get<std::uint64_t>();
      m.outputs = j.at("outputs").get<std::vector<std::string>>();
      m.config = config::merge(j.at("config"));
      if (config::count(m.config, "run", "seed") != m.seed) throw ConfigError("manifest seed and config seed differ");
      return m;
    } catch (const Json::exception& e) {
      throw ConfigError(std::string("malformed manifest: ") + e.what());
    }
  }

  static RunManifest load(const std::filesystem::path& path) {
    try {
      return from_json(Json::parse(read_text_file(path)));
    } catch (const Json::exception& e) {
      throw ConfigError(path.string() + ": " + e.what());
    }
  }
};

inline constexpr std::string_view kManifestName = "manifest.json";

}  // namespace carvesim
