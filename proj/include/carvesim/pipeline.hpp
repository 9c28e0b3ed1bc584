#pragma once

// The full experiment: preparation, carving, scattering, analysis pulse, then
// either in-situ cavity readout or transport and push-out readout, followed by
// tomography of the simulated counts. Also the photon and rate budget.

#include <array>
#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "carvesim/carving_protocol.hpp"
#include "carvesim/cavity_model.hpp"
#include "carvesim/common.hpp"
#include "carvesim/quantum_core.hpp"
#include "carvesim/readout_inference.hpp"
#include "carvesim/transport_coherence.hpp"

namespace carvesim {

// ---------------------------------------------------------------------------
// Photon and rate budget

struct DetectionChain {
  double counter_efficiency = 0.6;
  double taper_coupling = 0.6;
  double path_throughput = 0.8;

  double efficiency() const {
    for (double v : {counter_efficiency, taper_coupling, path_throughput})
      require(v >= 0.0 && v <= 1.0, "detection components must lie in [0, 1]");
    return counter_efficiency * taper_coupling * path_throughput;
  }
};

struct PhotonBudget {
  double efficiency;       // eta
  double collected;        // heralding photons per attempt
};

/// N_collected = T_int eta N_sent.
inline PhotonBudget photon_budget(double interferometer_transmission, double efficiency, double photons_sent) {
  require(interferometer_transmission >= 0.0 && interferometer_transmission <= 1.0,
          "interferometer transmission must lie in [0, 1]");
  require(efficiency >= 0.0 && efficiency <= 1.0, "detection efficiency must lie in [0, 1]");
  require(photons_sent >= 0.0, "photons_sent must be >= 0");
  return {efficiency, interferometer_transmission * efficiency * photons_sent};
}

/// eta = product of the components.
inline PhotonBudget photon_budget(double interferometer_transmission, const DetectionChain& chain,
                                  double photons_sent) {
  return photon_budget(interferometer_transmission, chain.efficiency(), photons_sent);
}

/// Repetition structure: `cycle_rate` loading cycles per second, each with
/// `iterations_per_cycle` carving iterations; both atoms are present with
/// probability loading^2 and a fraction `trigger_efficiency` of iterations
/// fires the carving pulse.
struct RateModel {
  double loading_probability = 0.8;
  double cycle_rate = 0.25;             // 1/s
  double iterations_per_cycle = 6.25;   // 4 iterations with two atoms at loading 0.8
  double trigger_efficiency = 0.85;

  void validate() const {
    require(loading_probability >= 0.0 && loading_probability <= 1.0, "loading probability must lie in [0, 1]");
    require(trigger_efficiency >= 0.0 && trigger_efficiency <= 1.0, "trigger efficiency must lie in [0, 1]");
    require(cycle_rate >= 0.0 && iterations_per_cycle >= 0.0, "rates must be >= 0");
  }

  double pair_iterations_per_cycle() const { return iterations_per_cycle * loading_probability * loading_probability; }
};

/// Heralded Bell pairs per minute.
inline double bell_pair_rate(const RateModel& m, double collected) {
  m.validate();
  require(collected >= 0.0, "N_collected must be >= 0");
  return 60.0 * m.cycle_rate * m.pair_iterations_per_cycle() * m.trigger_efficiency * collected;
}

// ---------------------------------------------------------------------------
// Experiment

struct TransportSettings {
  bool enabled = true;
  TransportModel model;
  std::size_t pulses = 4;
  std::size_t samples = 4000;
  double jitter_a = 15.1e-6;  // s
  double jitter_b = 15.1e-6;  // s
};

struct ExperimentConfig {
  double preparation_fidelity = 0.98;
  CarvingConfig carving = default_carving();
  ReadoutModel cavity_readout;
  std::array<double, 4> readout_reflectivities = kMeasuredReflectivities;
  RetentionCalibration pushout = RetentionCalibration::symmetric(0.8, 0.05);
  TransportSettings transport;
  std::size_t cavity_shots = 500;            // per setting, split evenly with and without pi
  std::vector<double> parity_phases = linspace(0.0, constants::pi * 7.0 / 8.0, 8);
  std::size_t pushout_shots = 600;           // per basis
  std::size_t bootstrap_resamples = 1000;
  double confidence = 0.99;
  std::uint64_t seed = 1;

  static CarvingConfig default_carving() {
    CarvingConfig c;
    c.interferometer.uncoupled_probability = 0.087;
    return c;
  }

  void validate() const {
    require(preparation_fidelity >= 0.0 && preparation_fidelity <= 1.0, "preparation fidelity must lie in [0, 1]");
    carving.validate();
    cavity_readout.validate();
    for (double r : readout_reflectivities) require(r >= 0.0 && r <= 1.0, "reflectivities must lie in [0, 1]");
    pushout.validate();
    transport.model.validate();
    require(transport.jitter_a >= 0.0 && transport.jitter_b >= 0.0, "jitter must be >= 0");
    require(transport.samples >= 1, "transport needs at least one sample");
    require(cavity_shots >= 2 && pushout_shots >= 1, "shot numbers too small");
    require(parity_phases.size() >= 3, "in-situ parity needs at least three phases");
    require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  }

  /// Every imperfection off: perfect preparation, perfect interferometer, no
  /// scattering, small theta, noiseless readout and transport.
  static ExperimentConfig ideal() {
    ExperimentConfig c;
    c.preparation_fidelity = 1.0;
    c.carving.theta = 0.005 * constants::pi;
    c.carving.interferometer = {1.0, 0.0};
    c.carving.photons_sent = 0.0;
    // |00> stays dark; coupled states give ~50 counts, so one count decides.
    c.readout_reflectivities = {0.0, 1.0, 1.0, 1.0};
    c.cavity_readout.photon_flux = 50.0 / (c.cavity_readout.integration_time * c.cavity_readout.efficiency);
    c.cavity_readout.threshold = 1;
    c.pushout = RetentionCalibration::symmetric(1.0, 0.0);
    c.transport.enabled = false;
    return c;
  }
};

/// Imperfections in the order they are switched on for the error budget.
enum class ImperfectionStage { ideal, theta, interferometer, scattering, preparation, readout, transport, count };

inline std::string to_string(ImperfectionStage s) {
  switch (s) {
    case ImperfectionStage::ideal: return "ideal";
    case ImperfectionStage::theta: return "theta";
    case ImperfectionStage::interferometer: return "interferometer";
    case ImperfectionStage::scattering: return "scattering";
    case ImperfectionStage::preparation: return "preparation";
    case ImperfectionStage::readout: return "readout";
    case ImperfectionStage::transport: return "transport";
    case ImperfectionStage::count: break;
  }
  return "?";
}

/// `full` with every imperfection after `last` switched off.
inline ExperimentConfig with_imperfections_up_to(const ExperimentConfig& full, ImperfectionStage last) {
  const auto ideal = ExperimentConfig::ideal();
  ExperimentConfig c = full;
  const auto on = [&](ImperfectionStage s) { return static_cast<int>(s) <= static_cast<int>(last); };
  if (!on(ImperfectionStage::theta)) c.carving.theta = ideal.carving.theta;
  if (!on(ImperfectionStage::interferometer)) c.carving.interferometer = ideal.carving.interferometer;
  if (!on(ImperfectionStage::scattering)) c.carving.photons_sent = 0.0;
  if (!on(ImperfectionStage::preparation)) c.preparation_fidelity = 1.0;
  if (!on(ImperfectionStage::readout)) {
    c.cavity_readout = ideal.cavity_readout;
    c.readout_reflectivities = ideal.readout_reflectivities;
    c.pushout = ideal.pushout;
  }
  if (!on(ImperfectionStage::transport)) {
    c.transport.model.noise = {0.0, 0.0};
    c.transport.jitter_a = c.transport.jitter_b = 0.0;
    c.transport.model.t2_prime_cavity = c.transport.model.t2_prime_free = 1e300;
  }
  return c;
}

/// State after preparation, carving, scattering damping and the analysis
/// pulse; the target is |Phi+>.
inline TwoQubitDensityMatrix heralded_state(const ExperimentConfig& cfg) {
  cfg.validate();
  const auto ground = TwoQubitDensityMatrix(TwoQubitState());
  const auto prepared = depolarize_each(ground, 1.0 - cfg.preparation_fidelity);
  const auto rotated = global_rotation(prepared, RotationPulse(0.0, cfg.carving.theta));
  ProtocolOutcome outcome;
  if (cfg.carving.model == CarvingModel::mixed) {
    outcome = carve_mixed(rotated, cfg.carving.uncoupled_probability());
  } else {
    // Amplitude filter r_s applied to the mixed input: rho -> R rho R^dagger.
    const auto r = cfg.carving.effective();
    Matrix4c m = rotated.matrix();
    for (int a = 0; a < 4; ++a)
      for (int b = 0; b < 4; ++b) m(a, b) *= r[static_cast<std::size_t>(a)] * std::conj(r[static_cast<std::size_t>(b)]);
    if (!(m.trace().real() > 0.0)) throw NumericError("carve: herald probability is zero");
    outcome.state = TwoQubitDensityMatrix::from_unnormalized(m);
  }
  const auto damped = damp_coherences(outcome.state, cfg.carving.decay_factor());
  return global_rotation(damped, analysis_rotation());
}

struct TransportContrast {
  double atom_a = 1.0;
  double atom_b = 1.0;
};

inline TransportContrast transport_contrast(const ExperimentConfig& cfg) {
  if (!cfg.transport.enabled) return {};
  const auto seq = carr_purcell_sequence(cfg.transport.pulses, cfg.transport.model.duration);
  TransportModel ma = cfg.transport.model, mb = cfg.transport.model;
  ma.noise.jitter_sd = cfg.transport.jitter_a;
  mb.noise.jitter_sd = cfg.transport.jitter_b;
  return {simulate_retained_coherence(ma, seq, cfg.transport.samples, derive_seed(cfg.seed, 3, 0)).contrast,
          simulate_retained_coherence(mb, seq, cfg.transport.samples, derive_seed(cfg.seed, 3, 1)).contrast};
}

/// (uncoupled, coupled, uncoupled after pi, coupled after pi) from shot-level
/// Poisson photon counts.
inline MeasurementRecord simulate_cavity_record(RecordKind kind, double phi, const TwoQubitDensityMatrix& rho,
                                                const ExperimentConfig& cfg, std::uint64_t seed) {
  const auto flipped = global_rotation(rho, RotationPulse(0.0, constants::pi));
  const std::array<std::array<double, 4>, 2> pops{rho.populations(), flipped.populations()};
  MeasurementRecord rec{kind, phi, {}};
  Rng rng(seed);
  for (std::size_t shot = 0; shot < cfg.cavity_shots; ++shot) {
    const std::size_t half = shot % 2;
    const auto state = static_cast<Basis>(categorical(rng, pops[half]));
    const auto r = simulate_cavity_readout(state, cfg.cavity_readout, cfg.readout_reflectivities, rng);
    ++rec.counts[2 * half + (r.classification == ReadoutClass::uncoupled ? 0 : 1)];
  }
  return rec;
}

/// Retention counts (both, A only, B only, none).
inline MeasurementRecord simulate_pushout_record(RecordKind kind, double phi, const TwoQubitDensityMatrix& rho,
                                                 const ExperimentConfig& cfg, std::uint64_t seed) {
  const Vector4d p = retention_probabilities(rho.populations(), cfg.pushout);
  const std::array<double, 4> w{std::max(0.0, p(0)), std::max(0.0, p(1)), std::max(0.0, p(2)), std::max(0.0, p(3))};
  MeasurementRecord rec{kind, phi, {}};
  Rng rng(seed);
  for (std::size_t shot = 0; shot < cfg.pushout_shots; ++shot) ++rec.counts[categorical(rng, w)];
  return rec;
}

struct BranchResult {
  TwoQubitDensityMatrix state;  // true state before readout
  double state_fidelity = 0.0;  // exact Phi+ fidelity of that state
  std::vector<MeasurementRecord> records;
  TomographyResult tomography;
};

struct ExperimentResult {
  BranchResult in_situ;
  BranchResult post_transport;
  TransportContrast contrast;
  double uncorrected_fidelity = 0.0;  // post-transport records read with h = 1, l = 0
};

namespace detail {
constexpr std::uint64_t kInSituStream = 1;
constexpr std::uint64_t kTransportRecordStream = 2;
constexpr std::uint64_t kBootstrapStream = 4;
}  // namespace detail

inline BranchResult run_in_situ(const ExperimentConfig& cfg, const TwoQubitDensityMatrix& rho) {
  BranchResult b{rho, fidelity_phi_plus(rho), {}, {}};
  b.records.push_back(simulate_cavity_record(RecordKind::cavity_zz, 0.0, rho, cfg,
                                             derive_seed(cfg.seed, detail::kInSituStream, 0)));
  for (std::size_t k = 0; k < cfg.parity_phases.size(); ++k) {
    const double phi = cfg.parity_phases[k];
    b.records.push_back(simulate_cavity_record(RecordKind::cavity_parity, phi,
                                               global_rotation(rho, parity_analysis_pulse(phi)), cfg,
                                               derive_seed(cfg.seed, detail::kInSituStream, k + 1)));
  }
  b.tomography = tomography(b.records, RetentionCalibration{}, cfg.bootstrap_resamples,
                            derive_seed(cfg.seed, detail::kBootstrapStream, 0), cfg.confidence);
  return b;
}

inline BranchResult run_post_transport(const ExperimentConfig& cfg, const TwoQubitDensityMatrix& rho) {
  BranchResult b{rho, fidelity_phi_plus(rho), {}, {}};
  const auto seed = [&](std::uint64_t k) { return derive_seed(cfg.seed, detail::kTransportRecordStream, k); };
  b.records.push_back(simulate_pushout_record(RecordKind::pushout_zz, 0.0, rho, cfg, seed(0)));
  b.records.push_back(simulate_pushout_record(RecordKind::pushout_xx, 0.0,
                                              global_rotation(rho, parity_analysis_pulse(0.0)), cfg, seed(1)));
  b.records.push_back(simulate_pushout_record(RecordKind::pushout_yy, 0.0,
                                              global_rotation(rho, parity_analysis_pulse(constants::pi / 2.0)), cfg,
                                              seed(2)));
  b.tomography = tomography(b.records, cfg.pushout, cfg.bootstrap_resamples,
                            derive_seed(cfg.seed, detail::kBootstrapStream, 1), cfg.confidence);
  return b;
}

inline ExperimentResult run_experiment(const ExperimentConfig& cfg) {
  const auto rho = heralded_state(cfg);
  ExperimentResult out;
  out.in_situ = run_in_situ(cfg, rho);
  out.contrast = transport_contrast(cfg);
  out.post_transport = run_post_transport(cfg, dephase_each(rho, out.contrast.atom_a, out.contrast.atom_b));
  out.uncorrected_fidelity = estimate_state(out.post_transport.records, RetentionCalibration{}).fidelity;
  return out;
}

struct LadderStep {
  ImperfectionStage stage;
  double in_situ;         // exact Phi+ fidelity of the heralded state
  double post_transport;  // same after transport dephasing
};

/// Exact fidelities with the imperfections of `cfg` switched on one at a
/// time; consecutive differences are the error budget.
inline std::vector<LadderStep> fidelity_ladder(const ExperimentConfig& cfg) {
  std::vector<LadderStep> out;
  for (int s = 0; s < static_cast<int>(ImperfectionStage::count); ++s) {
    const auto stage = static_cast<ImperfectionStage>(s);
    const auto c = with_imperfections_up_to(cfg, stage);
    const auto rho = heralded_state(c);
    const auto k = transport_contrast(c);
    out.push_back({stage, fidelity_phi_plus(rho), fidelity_phi_plus(dephase_each(rho, k.atom_a, k.atom_b))});
  }
  return out;
}

}  // namespace carvesim
