// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--expect-fail N]...
//
// Exit status is 0 when the failing criteria are exactly the ones listed with
// --expect-fail, so a known failure stays visible without masking new ones,
// and a criterion that starts passing has to be removed from the list.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "carvesim/cli_harness.hpp"

using namespace carvesim;

namespace {

namespace fs = std::filesystem;
constexpr double pi = constants::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string title;
  std::function<Outcome()> run;
};

std::string num(double x, int digits = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", digits, x);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

// 1 -------------------------------------------------------------------------
Outcome cooperativity_value() {
  const auto p = CavityParams::reference();
  const auto t0 = std::chrono::steady_clock::now();
  const double c = cooperativity(p.g, p.kappa, p.gamma);
  const double dt = seconds_since(t0);
  const bool ok = std::abs(c - 27.1) <= 0.2 && dt < 1e-3;
  return {ok, "C = " + num(c, 6) + " (27.1 +- 0.2), " + num(dt * 1e6, 3) + " us"};
}

// 2 -------------------------------------------------------------------------
Outcome reflection_identity() {
  std::mt19937_64 gen(2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 10000; ++k) {
    CavityParams p;
    p.kappa = units::mhz_to_rad(10.0 + 5000.0 * u(gen));
    p.gamma = units::mhz_to_rad(0.5 + 50.0 * u(gen));
    p.kappa_wg = u(gen) * p.kappa;
    p.g = units::mhz_to_rad(2000.0 * u(gen));
    const Complex r = reflection_amplitude(p);
    const double exact = on_resonance_amplitude(p.cooperativity(), p.kappa_wg / p.kappa);
    worst = std::max(worst, std::abs(r - exact));
  }
  return {worst < 1e-14, "max |r - ((2k_wg/k)/(1+C) - 1)| = " + num(worst, 3) + " over 1e4 draws (< 1e-14)"};
}

// 3 -------------------------------------------------------------------------
Outcome perfect_interferometer_form() {
  auto quoted = [](double theta) {
    const double t = std::tan(theta / 2.0);
    return 1.0 / ((1.0 + t) * (1.0 + t));
  };
  // Equal coupled amplitudes are the family with a closed form at V = 1.
  const ReflectionAmplitudes equal{-0.6, -0.9, -0.9, -0.9};
  double vs_quoted = 0.0, vs_model = 0.0, worst_theta = 0.0;
  for (const auto& p : optimize_angle(equal, 1.0).landscape) {
    const double d = std::abs(p.fidelity - quoted(p.theta));
    if (d > vs_quoted) {
      vs_quoted = d;
      worst_theta = p.theta;
    }
    vs_model = std::max(vs_model, std::abs(p.fidelity - perfect_interferometer_fidelity(p.theta)));
  }
  double measured_vs_quoted = 0.0;
  for (const auto& p : optimize_angle(amplitudes_from_reflectivities(kMeasuredReflectivities), 1.0).landscape)
    measured_vs_quoted = std::max(measured_vs_quoted, std::abs(p.fidelity - quoted(p.theta)));
  return {vs_quoted < 1e-10,
          "max |F - 1/(1+tan(theta/2))^2| = " + num(vs_quoted, 3) + " at theta = " + num(worst_theta / pi, 3) +
              "pi (measured reflectivities: " + num(measured_vs_quoted, 3) +
              "). The carving model gives F = 2/(2+tan^2(theta/2)) at V = 1 (max deviation " + num(vs_model, 3) +
              "); the quoted form is already off at first order, 1 - theta vs 1 - theta^2/8, so no amplitude "
              "choice reproduces it"};
}

// 4 -------------------------------------------------------------------------
Outcome protocol_optimum() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto amps = amplitudes_from_reflectivities(kMeasuredReflectivities);
  const auto best = optimize_angle(amps, 0.96);
  CarvingConfig c;
  c.interferometer = {0.96, std::nullopt};
  const double p_u = c.uncoupled_probability();
  auto low = kMeasuredReflectivities;
  low[0] = 0.1;
  const auto improved = optimize_angle(amplitudes_from_reflectivities(low), 0.96);
  const double dt = seconds_since(t0);
  const bool ok = std::abs(best.fidelity - 0.76) <= 0.03 && std::abs(best.theta / pi - 0.30) <= 0.05 &&
                  p_u >= 0.07 && p_u <= 0.11 && std::abs(improved.fidelity - 0.90) <= 0.03 && dt < 1.0;
  return {ok, "F_max = " + num(best.fidelity) + " at " + num(best.theta / pi, 3) + "pi, p_u = " + num(p_u, 3) +
                  ", R00 = 0.1 -> F_max = " + num(improved.fidelity) + ", " + num(dt * 1e3, 3) + " ms"};
}

// 5 -------------------------------------------------------------------------
Outcome model_equivalence() {
  // Random draws from the family where the two models coincide: r10 = r01,
  // |r11| = |r01| with its own phase, p_u = |r00|^2 / (|r00|^2 + |r01|^2).
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const double theta = 0.01 + (pi - 0.02) * u(gen);
    const double m = 0.05 + 0.95 * u(gen);
    const Complex r00 = std::polar(u(gen), constants::two_pi * u(gen));
    const Complex r01 = std::polar(m, constants::two_pi * u(gen));
    const Complex r11 = std::polar(m, constants::two_pi * u(gen));
    const auto psi = prepare_theta_state(theta);
    const auto coh = carve_coherent(psi, {r00, r01, r01, r11});
    const auto mix = carve_mixed(TwoQubitDensityMatrix(psi), p_u_from_reflectivities(std::norm(r00), std::norm(r01)));
    worst = std::max(worst, std::abs(coh.fidelity_phi_plus - mix.fidelity_phi_plus));
  }
  return {worst < 1e-10, "max |F_coherent - F_mixed| = " + num(worst, 3) + " over 1e3 draws (< 1e-10)"};
}

// 6 -------------------------------------------------------------------------
Outcome scattering_factor() {
  const double f = scattering_decay(0.35, 27.0, 0.184);
  return {std::abs(f - 0.9912) <= 1e-4, "exp(-lambda N_sent) = " + num(f, 6) + " (0.9912 +- 1e-4)"};
}

// 7 -------------------------------------------------------------------------
TwoQubitDensityMatrix in_situ_state() {
  // P00 + P11 = 0.78, rho_11,00 = 0.33, F = 0.72.
  Matrix4c m = Matrix4c::Zero();
  m(0, 0) = m(3, 3) = 0.39;
  m(1, 1) = m(2, 2) = 0.11;
  m(3, 0) = m(0, 3) = 0.33;
  return TwoQubitDensityMatrix(m);
}

Outcome tomography_regression() {
  ExperimentConfig cfg;
  cfg.pushout_shots = 500;
  const auto rho = in_situ_state();
  std::vector<MeasurementRecord> records{
      simulate_pushout_record(RecordKind::pushout_zz, 0.0, rho, cfg, 71),
      simulate_pushout_record(RecordKind::pushout_xx, 0.0, global_rotation(rho, parity_analysis_pulse(0.0)), cfg, 72),
      simulate_pushout_record(RecordKind::pushout_yy, 0.0, global_rotation(rho, parity_analysis_pulse(pi / 2.0)), cfg,
                              73)};
  const auto est = estimate_state(records, cfg.pushout);
  const auto names = tomography_quantities();
  const auto boot = bootstrap(
      records, [&](std::span<const MeasurementRecord> r) { return tomography_vector(estimate_state(r, cfg.pushout)); },
      names, 2000, 74);
  const auto ci = boot.interval(boot.index_of("fidelity"), 0.95);
  const bool recovered = ci.lo <= 0.72 && 0.72 <= ci.hi;

  // Correction round trip over random calibrations and populations.
  std::mt19937_64 gen(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double round_trip = 0.0;
  for (int k = 0; k < 1000; ++k) {
    const RetentionCalibration cal{0.6 + 0.4 * u(gen), 0.3 * u(gen), 0.6 + 0.4 * u(gen), 0.3 * u(gen)};
    std::array<double, 4> p{u(gen), u(gen), u(gen), u(gen)};
    const double s = p[0] + p[1] + p[2] + p[3];
    for (auto& v : p) v /= s;
    const Vector4d r = retention_probabilities(p, cal);
    const auto back = infer_populations({r(0), r(1), r(2), r(3)}, cal).raw;
    for (std::size_t i = 0; i < 4; ++i) round_trip = std::max(round_trip, std::abs(back[i] - p[i]));
  }

  // Uncorrected vs corrected after transport, over seeds at experiment-scale statistics.
  std::vector<double> gaps, corrected, uncorrected;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    ExperimentConfig e;
    e.seed = seed;
    e.bootstrap_resamples = 100;
    const auto r = run_experiment(e);
    corrected.push_back(r.post_transport.tomography.estimate.fidelity);
    uncorrected.push_back(r.uncorrected_fidelity);
    gaps.push_back(corrected.back() - uncorrected.back());
  }
  auto mean = [](const std::vector<double>& v) {
    double s = 0.0;
    for (double x : v) s += x;
    return s / static_cast<double>(v.size());
  };
  auto sd = [&](const std::vector<double>& v) {
    const double m = mean(v);
    double s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / static_cast<double>(v.size() - 1));
  };
  const bool direction = std::all_of(gaps.begin(), gaps.end(), [](double g) { return g > 0.0; });
  // The measured gap comes from one record, so its uncertainty is the
  // single-run scatter; the mean over seeds adds its own standard error.
  const double gap = mean(gaps), gap_sd = sd(gaps);
  const double sigma = gap_sd * std::sqrt(1.0 + 1.0 / static_cast<double>(gaps.size()));
  const double z = (gap - 0.13) / sigma;
  const bool magnitude = std::abs(z) <= 2.0 && std::abs(mean(uncorrected) - 0.52) <= 0.05 &&
                         std::abs(mean(corrected) - 0.65) <= 0.06;
  return {recovered && round_trip < 1e-12 && direction && magnitude,
          "F = " + num(est.fidelity) + ", 95% CI [" + num(ci.lo) + ", " + num(ci.hi) + "] contains 0.72: " +
              (recovered ? "yes" : "no") + "; round trip " + num(round_trip, 3) + "; post-transport " +
              num(mean(uncorrected), 3) + " -> " + num(mean(corrected), 3) + " (0.52(5) -> 0.65(6)), gap " + num(gap, 3) +
              " +- " + num(sigma, 2) + " vs 0.13 (z = " + num(z, 3) + ", positive in " + std::to_string(std::count_if(gaps.begin(), gaps.end(), [](double g) { return g > 0.0; })) +
              "/20 seeds)"};
}

// 8 -------------------------------------------------------------------------
Outcome concurrence_certification() {
  const double bound = concurrence_lower_bound_equal_split(0.33, 0.22);
  const auto r = run_experiment(ExperimentConfig{});
  const auto& t = r.post_transport.tomography;
  const bool ok = std::abs(bound - 0.44) < 1e-12 && t.entanglement_certified() && t.concurrence_lower > 0.0 &&
                  t.fidelity_lower > 0.5;
  return {ok, "bound(0.33, 0.22) = " + num(bound, 6) + "; post-transport F = " + num(t.estimate.fidelity) +
                  ", 99% lower bounds F > " + num(t.fidelity_lower) + ", C > " + num(t.concurrence_lower) +
                  " (600 shots per basis)"};
}

// 9 -------------------------------------------------------------------------
Outcome dephasing_time() {
  const double t2 = reversible_dephasing_time(70e-6, 5.4e-4);
  const std::vector<double> temps{10e-6, 35e-6, 70e-6, 140e-6, 300e-6};
  double worst = 0.0;
  for (std::size_t i = 2; i < temps.size(); ++i) {
    const double r0 = 1.0 / reversible_dephasing_time(temps[0], 5.4e-4);
    const double r1 = 1.0 / reversible_dephasing_time(temps[1], 5.4e-4);
    const double ri = 1.0 / reversible_dephasing_time(temps[i], 5.4e-4);
    const double cross = (temps[1] - temps[0]) * (ri - r0) - (temps[i] - temps[0]) * (r1 - r0);
    worst = std::max(worst, std::abs(cross) / ((temps[i] - temps[0]) * (ri - r0)));
  }
  const bool ok = std::abs(t2 - 0.40e-3) <= 0.01e-3 && std::abs(t2 - 0.35e-3) <= 2.0 * 0.04e-3 && worst < 1e-12;
  return {ok, "T2* = " + num(t2 * 1e3) + " ms (0.40 +- 0.01; measured 0.35(4): " +
                  num(std::abs(t2 - 0.35e-3) / 0.04e-3, 3) + " SD); collinearity " + num(worst, 3)};
}

// 10 ------------------------------------------------------------------------
Outcome phase_cancellation() {
  std::mt19937_64 gen(10);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const double t = 650e-6;
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    const double offset = 2e5 * u(gen);
    const double amp = 5e4 * u(gen);
    const double rate = std::pow(10.0, 3.0 + 2.0 * (u(gen) + 1.0));
    const TanhProfile p{offset, amp, t / 2.0, rate};
    for (std::size_t n : {2, 4, 6, 8, 10}) worst = std::max(worst, std::abs(accumulated_phase(p, carr_purcell_sequence(n, t))));
  }
  const TransportModel m;
  const auto ramp = build_ramp(m.mean_ramp_shape());
  for (std::size_t n : {2, 4, 6}) worst = std::max(worst, std::abs(accumulated_phase(ramp, carr_purcell_sequence(n, m.duration))));
  const double odd = std::abs(accumulated_phase(ramp, carr_purcell_sequence(1, m.duration)));

  TransportModel quiet = m;
  quiet.noise = {0.0, 0.0};
  const double contrast = simulate_retained_coherence(quiet, carr_purcell_sequence(4, m.duration), 1000, 1).contrast;
  const bool ok = worst < 1e-10 && odd > 0.0 && std::abs(contrast - 0.92) <= 0.01;
  return {ok, "max even-N |phase| = " + num(worst, 3) + " rad; N = 1 |phase| = " + num(odd) +
                  " rad; T2'-only contrast = " + num(contrast) + " (0.92 +- 0.01)"};
}

// 11 ------------------------------------------------------------------------
Outcome loading_monte_carlo() {
  const PotentialMorph morph;
  const auto& g = morph.geometry;
  const auto star = survival_probability(2e-6, units::energy_from_mk(2.1), morph, 10000);

  const auto cfg = config::defaults();
  std::vector<double> temps, depths;
  for (double x : config::numbers(cfg, "loading", "temperatures_uK")) temps.push_back(x * 1e-6);
  for (double x : config::numbers(cfg, "loading", "depths_mK")) depths.push_back(units::energy_from_mk(x));
  const auto t0 = std::chrono::steady_clock::now();
  const auto map = survival_map(temps, depths, morph, 1000);
  const double map_time = seconds_since(t0);
  int violations = 0;
  for (std::size_t i = 0; i < temps.size(); ++i)
    for (std::size_t j = 0; j < depths.size(); ++j) {
      const double v = map.at(i, j).estimate.joint.value;
      if (i + 1 < temps.size() && map.at(i + 1, j).estimate.joint.value > v) ++violations;
      if (j + 1 < depths.size() && map.at(i, j + 1).estimate.joint.value < v) ++violations;
    }

  // Energy drift in the static lattice over 1e3 periods.
  double drift = 0.0;
  for (Axis axis : {Axis::radial, Axis::axial}) {
    const double period = constants::two_pi / harmonic_frequency(axis, 1.0, g);
    const auto frozen = PotentialMorph::frozen(g, 1.0, 1000.0 * period);
    TrajectoryOptions opt;
    opt.dt = period / 4000.0;
    opt.record_stride = 997;
    const double x0 = axis == Axis::radial ? 0.1 * g.waist : 0.05 * g.wavelength;
    const auto r = integrate_trajectory(axis, {x0, 0.0, 1.0}, frozen, opt);
    const double floor = potential_1d(axis, 0.0, 1.0, g);
    const double e0 = r.trajectory.front().energy - floor;
    for (const auto& p : r.trajectory) drift = std::max(drift, std::abs(p.energy - floor - e0) / e0);
  }

  // Adiabatic E/omega over a slow morph (axial from s = 0.1, where the
  // ramp is adiabatic).
  double adiabatic = 0.0;
  struct Slow {
    Axis axis;
    double duration;
    double s0;
  };
  for (const Slow& k : {Slow{Axis::radial, 3e-3, 0.0}, Slow{Axis::axial, 2e-3, 0.1}}) {
    const PotentialMorph slow{g, k.duration, k.s0, 1.0};
    const double ratio = harmonic_frequency(k.axis, 1.0, g) / harmonic_frequency(k.axis, k.s0, g);
    double e_in = 0.0, e_out = 0.0;
    for (std::size_t i = 0; i < 200; ++i) {
      Rng rng = make_rng(11, i);
      const auto s = sample_boltzmann(k.axis, 1e-6, slow, rng);
      const double e0 = s.momentum * s.momentum / (2.0 * g.mass) + potential_1d(k.axis, s.position, k.s0, g) -
                        potential_1d(k.axis, 0.0, k.s0, g);
      const auto r = integrate_trajectory(k.axis, s, slow);
      e_in += s.weight * e0;
      e_out += s.weight * (r.final_energy - potential_1d(k.axis, 0.0, 1.0, g));
    }
    adiabatic = std::max(adiabatic, std::abs((e_out / e_in) / ratio - 1.0));
  }

  const bool ok = star.joint.value >= 0.90 && violations == 0 && drift < 1e-6 && adiabatic < 0.02 && map_time < 60.0;
  return {ok, "survival(2 uK, 2.1 mK) = " + num(star.joint.value) + " +- " + num(star.joint.mc_error, 2) +
                  " (n = 1e4, >= 0.90); 10x10 map in " + num(map_time, 3) + " s with " + std::to_string(violations) +
                  " monotonicity violations; drift " + num(drift, 3) + "; E/omega off by " + num(adiabatic * 100, 3) +
                  "%"};
}

// 12 ------------------------------------------------------------------------
Outcome rate_budget() {
  const double eta = DetectionChain{}.efficiency();
  const auto quoted = photon_budget(0.1, 0.28, 0.35);
  const RateModel m;
  const bool linear = photon_budget(0.1, 0.28, 0.7).collected == 2.0 * quoted.collected &&
                      bell_pair_rate(m, 2.0 * quoted.collected) == 2.0 * bell_pair_rate(m, quoted.collected) &&
                      photon_budget(0.1, DetectionChain{0.0, 0.6, 0.8}, 0.35).collected == 0.0;

  // The same numbers through the rates subcommand with default settings.
  const fs::path dir = fs::temp_directory_path() / "carvesim-acceptance" / "rates";
  fs::remove_all(dir);
  cli::execute("rates", config::defaults(), dir);
  std::istringstream in(read_text_file(dir / "rates.txt"));
  double cli_collected = -1.0;
  for (std::string line; std::getline(in, line);)
    if (line.rfind("N_collected = ", 0) == 0) cli_collected = parse_number(line.substr(14), "rates.txt");

  const bool ok = std::abs(eta - 0.288) < 1e-15 && std::abs(quoted.collected - 9.8e-3) < 1e-15 &&
                  std::abs(cli_collected - 9.8e-3) < 1e-15 && linear;
  return {ok, "eta = " + num(eta, 6) + " (0.6 x 0.6 x 0.8); N_collected = " + num(quoted.collected, 6) +
                  " with the quoted eta = 0.28 (CLI defaults: " + num(cli_collected, 6) +
                  "); linearity exact: " + (linear ? "yes" : "no") + "; rate " +
                  num(bell_pair_rate(m, quoted.collected), 3) + " /min"};
}

// 13 ------------------------------------------------------------------------
bool same_outputs(const fs::path& a, const fs::path& b, const RunManifest& m) {
  std::vector<std::string> files = m.outputs;
  files.emplace_back(kManifestName);
  for (const auto& f : files)
    if (read_text_file(a / f) != read_text_file(b / f)) return false;
  return true;
}

Outcome determinism() {
  const fs::path root = fs::temp_directory_path() / "carvesim-acceptance" / "determinism";
  fs::remove_all(root);
  Json cfg = config::defaults();
  config::apply_override(cfg, "run.seed=13");
  config::apply_override(cfg, "loading.temperatures_uK=[2, 10, 30]");
  config::apply_override(cfg, "loading.depths_mK=[1.2, 2.1]");
  config::apply_override(cfg, "loading.samples=300");
  config::apply_override(cfg, "cavity.thermal_samples=300");
  config::apply_override(cfg, "transport.samples=1000");
  config::apply_override(cfg, "experiment.bootstrap_resamples=200");

  std::vector<std::string> checked;
  bool ok = true;
  for (const std::string sub : {"spectrum", "transport", "loading", "experiment", "tomography"}) {
    Json c = cfg;
    if (sub == "tomography") {
      config::set_value(c, "tomography", "records", (root / "experiment" / "records_post_transport.csv").string());
      config::set_value(c, "tomography", "calibration",
                        (root / "experiment" / "calibration_post_transport.csv").string());
    }
    set_worker_count(1);
    const auto first = cli::execute(sub, c, root / sub);
    set_worker_count(4);
    cli::replay(root / sub / kManifestName, root / (sub + "-replay-4"));
    set_worker_count(3);
    cli::replay(root / (sub + "-replay-4") / kManifestName, root / (sub + "-replay-3"));
    set_worker_count(0);
    const bool same = same_outputs(root / sub, root / (sub + "-replay-4"), first) &&
                      same_outputs(root / sub, root / (sub + "-replay-3"), first);
    ok = ok && same;
    checked.push_back(sub + (same ? "" : " (DIFFERS)"));
  }
  std::string list;
  for (const auto& s : checked) list += (list.empty() ? "" : ", ") + s;
  return {ok, "manifest replays at 1, 4 and 3 workers are byte-identical: " + list};
}

}  // namespace

int main(int argc, char** argv) {
  std::set<int> expected_failures;
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--expect-fail" && i + 1 < argc) {
      expected_failures.insert(std::stoi(argv[++i]));
    } else {
      std::cerr << "usage: acceptance [--expect-fail N]...\n";
      return 2;
    }
  }

  const std::vector<Criterion> criteria{
      {1, "cooperativity", cooperativity_value},
      {2, "exact reflection identity", reflection_identity},
      {3, "perfect-interferometer closed form", perfect_interferometer_form},
      {4, "protocol optimum", protocol_optimum},
      {5, "model equivalence", model_equivalence},
      {6, "scattering factor", scattering_factor},
      {7, "tomography regression", tomography_regression},
      {8, "concurrence and certification", concurrence_certification},
      {9, "dephasing time", dephasing_time},
      {10, "phase cancellation", phase_cancellation},
      {11, "loading Monte Carlo", loading_monte_carlo},
      {12, "rates", rate_budget},
      {13, "determinism", determinism},
  };

  std::set<int> failed;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const double dt = seconds_since(t0);
    if (!o.pass) failed.insert(c.id);
    const bool known = !o.pass && expected_failures.count(c.id);
    std::cout << (o.pass ? "PASS" : "FAIL") << "  criterion " << c.id << " " << c.title << " [" << num(dt, 3)
              << " s]" << (known ? " (known failure)" : "") << "\n      " << o.detail << "\n"
              << std::flush;
  }

  std::cout << "\n" << criteria.size() - failed.size() << "/" << criteria.size() << " criteria pass";
  if (!failed.empty()) {
    std::cout << "; failing:";
    for (int id : failed) std::cout << " " << id;
  }
  std::cout << "\n";
  if (failed != expected_failures) {
    std::cout << "failing criteria differ from the expected list:";
    for (int id : expected_failures) std::cout << " " << id;
    std::cout << "\n";
    return 1;
  }
  return 0;
}
