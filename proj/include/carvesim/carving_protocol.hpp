#pragma once

// Heralded entanglement by photon reflection ("carving"): theta-rotation,
// coherent and which-path-mixed post-selection, interferometric suppression of
// the uncoupled reflection, scattering loss of coherence, and the scan over
// the initial angle.

#include <array>
#include <cmath>
#include <optional>
#include <span>
#include <vector>

#include "carvesim/cavity_model.hpp"
#include "carvesim/common.hpp"
#include "carvesim/quantum_core.hpp"

namespace carvesim {

/// R_{0,theta} (x) R_{0,theta} |00>:
/// cos^2(theta/2)|00> - i sc (|01> + |10>) - sin^2(theta/2)|11>.
inline TwoQubitState prepare_theta_state(double theta) {
  require(std::isfinite(theta) && theta >= 0.0 && theta <= constants::pi, "theta must lie in [0, pi]");
  const double c = std::cos(theta / 2.0);
  const double s = std::sin(theta / 2.0);
  const Complex i{0.0, 1.0};
  return TwoQubitState::normalized(Ket4(c * c, -i * s * c, -i * s * c, -s * s));
}

/// Reference-arm subtraction of the uncoupled amplitude. The residual
/// uncoupled amplitude is `mismatch * r00`, where the mismatch follows from the
/// fringe visibility V through R_min/R_max = (1-V)/(1+V).
struct InterferometerModel {
  double contrast = 1.0;
  std::optional<double> uncoupled_probability;  // p_u override for the mixed model

  /// delta = 2 sqrt((1-V)/(1+V)); 0 for a perfect interferometer.
  double mismatch() const {
    validate();
    return 2.0 * std::sqrt((1.0 - contrast) / (1.0 + contrast));
  }

  void validate() const {
    require(std::isfinite(contrast) && contrast >= 0.0 && contrast <= 1.0, "fringe contrast must lie in [0, 1]");
    if (uncoupled_probability)
      require(*uncoupled_probability >= 0.0 && *uncoupled_probability <= 1.0, "p_u must lie in [0, 1]");
  }

  /// Interferometer removed: amplitudes pass through unchanged (delta = 1).
  static InterferometerModel disengaged() { return InterferometerModel{0.6, std::nullopt}; }
};

/// r_s - (1 - delta) r00 for every basis state s.
inline ReflectionAmplitudes effective_amplitudes(const ReflectionAmplitudes& raw, double mismatch) {
  require(std::isfinite(mismatch) && mismatch >= 0.0 && mismatch <= 2.0, "mismatch must lie in [0, 2]");
  const Complex ref = (1.0 - mismatch) * raw[0];
  return {raw[0] - ref, raw[1] - ref, raw[2] - ref, raw[3] - ref};
}

inline ReflectionAmplitudes effective_amplitudes(const ReflectionAmplitudes& raw, const InterferometerModel& ifm) {
  return effective_amplitudes(raw, ifm.mismatch());
}

/// R00 / (R00 + R01).
inline double p_u_from_reflectivities(double r00, double r01) {
  require(r00 >= 0.0 && r01 >= 0.0, "reflectivities must be >= 0");
  if (r00 + r01 == 0.0) throw InvalidArgument("p_u undefined when both reflectivities vanish");
  return r00 / (r00 + r01);
}

/// exp(-lambda N_sent) with lambda = 4 (kappa_wg/kappa) C / (C+1)^2.
inline double scattering_rate(double c, double kappa_wg_over_kappa) {
  require(c >= 0.0 && kappa_wg_over_kappa >= 0.0, "scattering: inputs must be >= 0");
  if (std::isinf(c)) return 0.0;
  return 4.0 * kappa_wg_over_kappa * c / ((c + 1.0) * (c + 1.0));
}

inline double scattering_decay(double photons_sent, double c, double kappa_wg_over_kappa) {
  require(photons_sent >= 0.0, "scattering: photon number must be >= 0");
  return std::exp(-scattering_rate(c, kappa_wg_over_kappa) * photons_sent);
}

enum class CarvingModel { coherent, mixed };

struct ProtocolOutcome {
  TwoQubitDensityMatrix state;       // conditional state right after the herald
  double success_probability = 0.0;  // coherent: sum |r a|^2; mixed: herald weight
  double fidelity_psi_plus = 0.0;
  double fidelity_phi_plus = 0.0;    // after the global R_{0,pi/2}
  // Amplitude labels of the pure conditional state (coherent model only):
  // psi = eps0 |00> - eps1 |11> - i f |Psi+>.
  Complex eps0{};
  Complex eps1{};
  Complex f{};
};

inline RotationPulse analysis_rotation() { return RotationPulse(0.0, constants::pi / 2.0); }

/// a_s -> r_s a_s, renormalized.
inline ProtocolOutcome carve_coherent(const TwoQubitState& psi, const ReflectionAmplitudes& r) {
  Ket4 v;
  for (int k = 0; k < 4; ++k) v(k) = r[static_cast<std::size_t>(k)] * psi.amplitudes()(k);
  const double weight = v.squaredNorm();
  if (!(weight > 0.0)) throw NumericError("carve: herald probability is zero");
  const TwoQubitState cond = TwoQubitState::normalized(v);
  const TwoQubitDensityMatrix rho(cond);
  const Ket4& a = cond.amplitudes();
  ProtocolOutcome out{rho, weight, fidelity_psi_plus(rho),
                      fidelity_phi_plus(global_rotation(rho, analysis_rotation()))};
  out.eps0 = a(0);
  out.eps1 = -a(3);
  out.f = Complex(0.0, 1.0) * (a(1) + a(2)) / std::sqrt(2.0);
  return out;
}

/// rho -> p_u M_u rho M_u + (1 - p_u) M_c rho M_c with M_u = |00><00|,
/// renormalized.
inline ProtocolOutcome carve_mixed(const TwoQubitDensityMatrix& rho, double p_u) {
  require(p_u >= 0.0 && p_u <= 1.0, "p_u must lie in [0, 1]");
  Matrix4c m = rho.matrix();
  for (int k = 1; k < 4; ++k) {
    m(0, k) = 0.0;
    m(k, 0) = 0.0;
  }
  m(0, 0) *= p_u;
  m.bottomRightCorner<3, 3>() *= (1.0 - p_u);
  const double weight = m.trace().real();
  if (!(weight > 0.0)) throw NumericError("carve: herald probability is zero");
  const auto cond = TwoQubitDensityMatrix::from_unnormalized(m);
  return ProtocolOutcome{cond, weight, fidelity_psi_plus(cond),
                         fidelity_phi_plus(global_rotation(cond, analysis_rotation()))};
}

struct CarvingConfig {
  double theta = 0.3 * constants::pi;
  double photons_sent = 0.35;
  CarvingModel model = CarvingModel::mixed;
  InterferometerModel interferometer{0.96, std::nullopt};
  ReflectionAmplitudes amplitudes = amplitudes_from_reflectivities(kMeasuredReflectivities);
  // Scattering decay inputs.
  double cooperativity = 27.0;
  double kappa_wg_over_kappa = 0.184;

  void validate() const {
    require(std::isfinite(theta) && theta > 0.0 && theta < constants::pi, "theta must lie in (0, pi)");
    require(photons_sent >= 0.0, "photons_sent must be >= 0");
    interferometer.validate();
  }

  ReflectionAmplitudes effective() const { return effective_amplitudes(amplitudes, interferometer); }

  /// Override if set, otherwise R00/(R00+R01) of the effective amplitudes.
  double uncoupled_probability() const {
    if (interferometer.uncoupled_probability) return *interferometer.uncoupled_probability;
    const auto eff = effective();
    return p_u_from_reflectivities(std::norm(eff[0]), std::norm(eff[1]));
  }

  double decay_factor() const { return scattering_decay(photons_sent, cooperativity, kappa_wg_over_kappa); }
};

/// Herald with the configured model on the theta state.
inline ProtocolOutcome carve(const CarvingConfig& cfg) {
  cfg.validate();
  const auto psi = prepare_theta_state(cfg.theta);
  if (cfg.model == CarvingModel::coherent) return carve_coherent(psi, cfg.effective());
  return carve_mixed(TwoQubitDensityMatrix(psi), cfg.uncoupled_probability());
}

struct LandscapePoint {
  double theta;
  double contrast;
  double fidelity;
  double success_probability;
};

struct AngleOptimum {
  double theta = 0.0;
  double fidelity = 0.0;
  double success_probability = 0.0;
  std::vector<LandscapePoint> landscape;
};

/// theta_k = k * step for k = 1 .. floor((pi/2)/step).
inline std::vector<double> theta_grid(double step = 0.005 * constants::pi) {
  require(step > 0.0 && step <= constants::pi / 2.0, "theta step must lie in (0, pi/2]");
  const auto n = static_cast<std::size_t>(std::floor(constants::pi / 2.0 / step + 1e-9));
  std::vector<double> g(n);
  for (std::size_t k = 0; k < n; ++k) g[k] = static_cast<double>(k + 1) * step;
  return g;
}

/// Coherent-model fidelity over theta; argmax with ties going to the smaller
/// angle.
inline AngleOptimum optimize_angle(const ReflectionAmplitudes& raw, double contrast,
                                   double step = 0.005 * constants::pi) {
  const InterferometerModel ifm{contrast, std::nullopt};
  const auto eff = effective_amplitudes(raw, ifm);
  const auto grid = theta_grid(step);
  AngleOptimum best;
  best.landscape = parallel_map<LandscapePoint>(grid.size(), [&](std::size_t k) {
    const auto out = carve_coherent(prepare_theta_state(grid[k]), eff);
    return LandscapePoint{grid[k], contrast, out.fidelity_phi_plus, out.success_probability};
  });
  best.fidelity = -1.0;
  for (const auto& p : best.landscape)
    if (p.fidelity > best.fidelity) {
      best.theta = p.theta;
      best.fidelity = p.fidelity;
      best.success_probability = p.success_probability;
    }
  return best;
}

/// Fidelity of the perfect-interferometer coherent model with equal coupled
/// amplitudes: 2 / (2 + tan^2(theta/2)).
inline double perfect_interferometer_fidelity(double theta) {
  const double t = std::tan(theta / 2.0);
  return 2.0 / (2.0 + t * t);
}

struct Figure3Prediction {
  CarvingModel model;
  std::array<double, 4> populations;  // after R_{0,pi/2}
  double fidelity;
  TwoQubitDensityMatrix analysed_state;
  std::vector<double> phis;
  std::vector<double> parity;

  double even_population() const { return populations[0] + populations[3]; }
  double odd_population() const { return populations[1] + populations[2]; }
};

struct Figure3Comparison {
  Figure3Prediction coherent;
  Figure3Prediction mixed;
};

/// prepare -> carve -> uniform coherence damping -> R_{0,pi/2}, then the ZZ
/// populations and the parity oscillation of the analysed state.
inline Figure3Prediction predict_figure3(CarvingConfig cfg, CarvingModel model, std::span<const double> phis) {
  cfg.model = model;
  const auto outcome = carve(cfg);
  const auto damped = damp_coherences(outcome.state, cfg.decay_factor());
  const auto analysed = global_rotation(damped, analysis_rotation());
  return Figure3Prediction{model,
                           analysed.populations(),
                           fidelity_phi_plus(analysed),
                           analysed,
                           std::vector<double>(phis.begin(), phis.end()),
                           parity_curve(analysed, phis)};
}

inline Figure3Comparison predict_figure3(const CarvingConfig& cfg, std::span<const double> phis) {
  return {predict_figure3(cfg, CarvingModel::coherent, phis), predict_figure3(cfg, CarvingModel::mixed, phis)};
}

}  // namespace carvesim
