#pragma once

// Atom-cavity reflection (input-output, single excitation), cooperativity,
// thermal averaging over the cooperativities sampled by a moving atom, and
// a photon-counting readout model.
//
// All rates and detunings are angular frequencies (rad/s).

#include <array>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "carvesim/common.hpp"
#include "carvesim/quantum_core.hpp"

namespace carvesim {

/// C = 4 g^2 / (kappa gamma).
inline double cooperativity(double g, double kappa, double gamma) {
  require(kappa > 0.0 && gamma > 0.0, "cooperativity: kappa and gamma must be > 0");
  require(g >= 0.0, "cooperativity: g must be >= 0");
  return 4.0 * g * g / (kappa * gamma);
}

struct CavityParams {
  double g = 0.0;
  double kappa = 0.0;
  double kappa_wg = 0.0;
  double gamma = 0.0;
  double atom_detuning = 0.0;    // Delta_a = omega - omega_a at the reference probe
  double cavity_detuning = 0.0;  // Delta_c = omega - omega_c at the reference probe

  double kappa_sc() const { return kappa - kappa_wg; }
  double cooperativity() const { return carvesim::cooperativity(g, kappa, gamma); }

  void validate() const {
    require(std::isfinite(g) && std::isfinite(kappa) && std::isfinite(kappa_wg) && std::isfinite(gamma) &&
                std::isfinite(atom_detuning) && std::isfinite(cavity_detuning),
            "CavityParams: non-finite value");
    require(g >= 0.0, "CavityParams: g must be >= 0");
    require(kappa >= 0.0 && gamma >= 0.0 && kappa_wg >= 0.0, "CavityParams: rates must be >= 0");
    require(kappa_wg <= kappa, "CavityParams: kappa_wg must not exceed kappa");
  }

  /// Same cavity, coupling chosen to give cooperativity C.
  CavityParams with_cooperativity(double c) const {
    require(c >= 0.0, "cooperativity must be >= 0");
    CavityParams p = *this;
    p.g = std::sqrt(c * kappa * gamma / 4.0);
    return p;
  }

  CavityParams with_coupling(double new_g) const {
    CavityParams p = *this;
    p.g = new_g;
    return p;
  }

  /// (2g, gamma, kappa) = 2pi x (786, 6, 3800) MHz with 2 kappa_wg / kappa = 0.368,
  /// everything on resonance.
  static CavityParams reference() {
    CavityParams p;
    p.g = units::mhz_to_rad(786.0) / 2.0;
    p.gamma = units::mhz_to_rad(6.0);
    p.kappa = units::mhz_to_rad(3800.0);
    p.kappa_wg = 0.184 * p.kappa;
    return p;
  }
};

/// r = kappa_wg (kappa/2 - i Delta_c + g^2/(gamma/2 - i Delta_a))^-1 - 1 with
/// both detunings shifted by probe_detuning (rad/s) from the stored values.
inline Complex reflection_amplitude(const CavityParams& p, double probe_detuning = 0.0) {
  p.validate();
  const Complex i{0.0, 1.0};
  const double da = p.atom_detuning + probe_detuning;
  const double dc = p.cavity_detuning + probe_detuning;
  Complex denom = Complex(p.kappa / 2.0, 0.0) - i * dc;
  if (p.g != 0.0) {
    const Complex atom = Complex(p.gamma / 2.0, 0.0) - i * da;
    if (std::abs(atom) == 0.0) throw NumericError("reflection_amplitude: atomic response has a pole");
    denom += p.g * p.g / atom;
  }
  if (std::abs(denom) == 0.0) throw NumericError("reflection_amplitude: cavity response has a pole");
  return p.kappa_wg / denom - 1.0;
}

inline double reflectivity(const CavityParams& p, double probe_detuning = 0.0) {
  return std::norm(reflection_amplitude(p, probe_detuning));
}

/// Exact on-resonance amplitude (2 kappa_wg/kappa)/(1 + C) - 1.
inline double on_resonance_amplitude(double c, double kappa_wg_over_kappa) {
  require(c >= 0.0, "cooperativity must be >= 0");
  return 2.0 * kappa_wg_over_kappa / (1.0 + c) - 1.0;
}

/// Large-C form |1 - (2 kappa_wg/kappa)/C|^2. Overestimates the exact value's
/// correction by a factor (1+C)/C; kept only for comparison.
inline double reflectivity_large_c_approx(double c, double kappa_wg_over_kappa) {
  require(c > 0.0, "large-C approximation needs C > 0");
  const double r = 1.0 - 2.0 * kappa_wg_over_kappa / c;
  return r * r;
}

using ReflectionAmplitudes = std::array<Complex, 4>;

/// Amplitudes for |00>, |01>, |10>, |11> (first label = atom A). Cavity rates
/// and detunings are taken from atom A's parameters; |01> uses g_B, |10> uses
/// g_A and |11> the collective coupling sqrt(g_A^2 + g_B^2).
inline ReflectionAmplitudes basis_state_reflectivities(const CavityParams& a, const CavityParams& b,
                                                       double probe_detuning = 0.0) {
  const double g_eff = std::sqrt(a.g * a.g + b.g * b.g);
  return {reflection_amplitude(a.with_coupling(0.0), probe_detuning),
          reflection_amplitude(a.with_coupling(b.g), probe_detuning),
          reflection_amplitude(a.with_coupling(a.g), probe_detuning),
          reflection_amplitude(a.with_coupling(g_eff), probe_detuning)};
}

/// Amplitudes with the given reflectivities and a common sign; -1 is the
/// undercoupled on-resonance case where every amplitude is negative.
inline ReflectionAmplitudes amplitudes_from_reflectivities(const std::array<double, 4>& r, double sign = -1.0) {
  ReflectionAmplitudes out;
  for (std::size_t k = 0; k < 4; ++k) {
    require(r[k] >= 0.0 && r[k] <= 1.0 + 1e-12, "reflectivities must lie in [0, 1]");
    out[k] = sign * std::sqrt(r[k]);
  }
  return out;
}

inline std::array<double, 4> reflectivities_of(const ReflectionAmplitudes& r) {
  return {std::norm(r[0]), std::norm(r[1]), std::norm(r[2]), std::norm(r[3])};
}

/// Reflectivities quoted for the thermally averaged two-atom system.
inline constexpr std::array<double, 4> kMeasuredReflectivities{0.40, 0.94, 0.94, 0.97};

struct SpectrumPoint {
  double detuning_hz;
  double reflectivity;
};

/// |r|^2 over probe detunings given in Hz.
inline std::vector<SpectrumPoint> reflection_spectrum(const CavityParams& p, std::span<const double> detunings_hz) {
  std::vector<SpectrumPoint> out;
  out.reserve(detunings_hz.size());
  for (double f : detunings_hz) out.push_back({f, reflectivity(p, constants::two_pi * f)});
  return out;
}

// ---------------------------------------------------------------------------
// Thermal averaging

/// Weighted cooperativity samples; weights are normalized on construction.
class CooperativityDistribution {
 public:
  struct Sample {
    double cooperativity;
    double weight;
  };

  explicit CooperativityDistribution(std::vector<Sample> samples) : samples_(std::move(samples)) {
    if (samples_.empty()) throw InvalidArgument("CooperativityDistribution: no samples");
    double total = 0.0;
    for (const auto& s : samples_) {
      require(s.cooperativity >= 0.0 && std::isfinite(s.cooperativity), "cooperativity samples must be >= 0");
      require(s.weight >= 0.0 && std::isfinite(s.weight), "weights must be >= 0");
      total += s.weight;
    }
    if (!(total > 0.0)) throw InvalidArgument("CooperativityDistribution: weights sum to zero");
    for (auto& s : samples_) s.weight /= total;
  }

  static CooperativityDistribution delta(double c) { return CooperativityDistribution({{c, 1.0}}); }

  static CooperativityDistribution equally_weighted(std::span<const double> values) {
    std::vector<Sample> s;
    s.reserve(values.size());
    for (double v : values) s.push_back({v, 1.0});
    return CooperativityDistribution(std::move(s));
  }

  const std::vector<Sample>& samples() const { return samples_; }
  double mean() const {
    double m = 0.0;
    for (const auto& s : samples_) m += s.weight * s.cooperativity;
    return m;
  }
  double stddev() const {
    const double m = mean();
    double v = 0.0;
    for (const auto& s : samples_) v += s.weight * (s.cooperativity - m) * (s.cooperativity - m);
    return std::sqrt(v);
  }

 private:
  std::vector<Sample> samples_;
};

/// Thermal cloud in a harmonic trap.
struct ThermalCloud {
  double radial_frequency = units::khz_to_rad(115.0);  // rad/s
  double axial_frequency = units::khz_to_rad(550.0);   // rad/s
  double temperature = 70e-6;                          // K
  double mass = constants::rb87_mass;

  double radial_sigma() const { return std::sqrt(constants::k_B * temperature / mass) / radial_frequency; }
  double axial_sigma() const { return std::sqrt(constants::k_B * temperature / mass) / axial_frequency; }
};

/// Cooperativity seen at displacement (x, y, z) from the trap centre:
/// C0 exp(-x^2/(2 Lx^2) - y^2/(2 Ly^2) - z / Lz). z points away from the
/// cavity, so the evanescent coupling decays exponentially along it.
struct ModeFunction {
  double peak_cooperativity = 47.0;
  double radial_length_x = 111e-9;
  double radial_length_y = 111e-9;
  double vertical_decay_length = 42e-9;

  double operator()(double x, double y, double z) const {
    return peak_cooperativity *
           std::exp(-x * x / (2.0 * radial_length_x * radial_length_x) -
                    y * y / (2.0 * radial_length_y * radial_length_y) - z / vertical_decay_length);
  }
};

/// Chooses the in-plane and vertical mode lengths so that atoms drawn from
/// `cloud` see cooperativities with the requested mean and standard deviation.
/// Uses the Gaussian moments
///   E[C]/C0   = exp(s^2/2) / A,      E[C^2]/C0^2 = exp(2 s^2) / (2A - 1),
/// with A = 1 + sigma_r^2 / L^2 and s = sigma_z / Lz.
inline ModeFunction calibrate_mode_function(double peak, double target_mean, double target_sd,
                                            const ThermalCloud& cloud) {
  require(peak > 0.0 && target_mean > 0.0 && target_sd > 0.0, "mode calibration needs positive moments");
  const double mu = target_mean / peak;
  const double m2 = mu * mu + (target_sd / peak) * (target_sd / peak);
  auto residual = [&](double a) { return std::pow(mu * a, 4) - m2 * (2.0 * a - 1.0); };
  double lo = std::max(1.0, 1.0 / mu);
  if (residual(lo) >= 0.0)
    throw InvalidArgument("mode calibration: requested spread is too small for this mode family");
  double hi = lo * 2.0;
  while (residual(hi) < 0.0) hi *= 2.0;
  for (int it = 0; it < 200; ++it) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) < 0.0 ? lo : hi) = mid;
  }
  const double a = 0.5 * (lo + hi);
  const double s2 = 2.0 * std::log(mu * a);
  ModeFunction m;
  m.peak_cooperativity = peak;
  const double l = cloud.radial_sigma() / std::sqrt(a - 1.0);
  m.radial_length_x = l;
  m.radial_length_y = l;
  m.vertical_decay_length = s2 > 0.0 ? cloud.axial_sigma() / std::sqrt(s2) : 1e300;
  return m;
}

/// Draws atom positions from the Boltzmann distribution of the harmonic trap
/// and maps them through the mode function.
inline CooperativityDistribution sample_thermal_cooperativity(const ModeFunction& mode, const ThermalCloud& cloud,
                                                              std::size_t n, std::uint64_t seed) {
  require(n > 0, "need at least one sample");
  const double sr = cloud.radial_sigma();
  const double sz = cloud.axial_sigma();
  auto values = parallel_map<double>(n, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    const double x = sr * standard_normal(rng);
    const double y = sr * standard_normal(rng);
    const double z = sz * standard_normal(rng);
    return mode(x, y, z);
  });
  return CooperativityDistribution::equally_weighted(values);
}

/// Sum_i w_i |r(C_i)|^2 at the given probe detuning.
inline double thermal_average_reflectivity(const CooperativityDistribution& dist, const CavityParams& p,
                                           double probe_detuning = 0.0) {
  double acc = 0.0;
  for (const auto& s : dist.samples()) acc += s.weight * reflectivity(p.with_cooperativity(s.cooperativity), probe_detuning);
  return acc;
}

/// Thermally averaged (R00, R01, R10, R11) for two independently moving atoms.
/// The two-atom state sees C_A + C_B (collective coupling). The product
/// distribution is summed exactly, so keep the sample counts moderate.
inline std::array<double, 4> thermal_basis_reflectivities(const CooperativityDistribution& a,
                                                          const CooperativityDistribution& b, const CavityParams& p,
                                                          double probe_detuning = 0.0) {
  const double r00 = reflectivity(p.with_coupling(0.0), probe_detuning);
  const double r01 = thermal_average_reflectivity(b, p, probe_detuning);
  const double r10 = thermal_average_reflectivity(a, p, probe_detuning);
  double r11 = 0.0;
  for (const auto& sa : a.samples())
    for (const auto& sb : b.samples())
      r11 += sa.weight * sb.weight *
             reflectivity(p.with_cooperativity(sa.cooperativity + sb.cooperativity), probe_detuning);
  return {r00, r01, r10, r11};
}

// ---------------------------------------------------------------------------
// Photon-counting readout

enum class ReadoutClass { uncoupled, coupled };

struct ReadoutModel {
  double photon_flux = 3.5e6;      // photons/s incident on the cavity
  double integration_time = 25e-6; // s
  double efficiency = 0.288;       // total detection efficiency
  std::uint64_t threshold = 16;    // counts
  /// true: coupled iff count >= threshold (|00> reflects least).
  bool coupled_at_or_above = true;

  void validate() const {
    require(photon_flux >= 0.0 && integration_time >= 0.0, "readout flux and time must be >= 0");
    require(efficiency >= 0.0 && efficiency <= 1.0, "detection efficiency must lie in [0, 1]");
    require(std::isfinite(photon_flux * integration_time), "flux x time must be finite");
  }

  double mean_counts(double reflectivity) const {
    validate();
    return photon_flux * integration_time * efficiency * reflectivity;
  }

  ReadoutClass classify(std::uint64_t count) const {
    const bool above = count >= threshold;
    return above == coupled_at_or_above ? ReadoutClass::coupled : ReadoutClass::uncoupled;
  }
};

struct ReadoutShot {
  std::uint64_t count;
  ReadoutClass classification;
};

/// Correct classification for a true basis state: |00> is the uncoupled one.
inline ReadoutClass expected_class(Basis b) {
  return b == Basis::s00 ? ReadoutClass::uncoupled : ReadoutClass::coupled;
}

/// One shot with a caller-provided uniform (lets callers couple shots).
inline ReadoutShot simulate_cavity_readout(Basis state, const ReadoutModel& model,
                                           const std::array<double, 4>& reflectivities, double uniform) {
  const double mean = model.mean_counts(reflectivities[static_cast<std::size_t>(index(state))]);
  const std::uint64_t n = poisson_from_uniform(mean, uniform);
  return {n, model.classify(n)};
}

inline ReadoutShot simulate_cavity_readout(Basis state, const ReadoutModel& model,
                                           const std::array<double, 4>& reflectivities, Rng& rng) {
  return simulate_cavity_readout(state, model, reflectivities, uniform01(rng));
}

/// Exact probability that a shot from `state` is classified correctly.
inline double readout_fidelity_exact(Basis state, const ReadoutModel& model,
                                     const std::array<double, 4>& reflectivities) {
  const double mean = model.mean_counts(reflectivities[static_cast<std::size_t>(index(state))]);
  // P(N < threshold)
  double below = 0.0;
  double log_p = -mean;
  for (std::uint64_t k = 0; k < model.threshold; ++k) {
    if (k > 0) log_p += std::log(mean) - std::log(static_cast<double>(k));
    below += mean == 0.0 ? (k == 0 ? 1.0 : 0.0) : std::exp(log_p);
  }
  below = std::min(below, 1.0);
  const bool coupled_if_below = !model.coupled_at_or_above;
  const double p_coupled = coupled_if_below ? below : 1.0 - below;
  return expected_class(state) == ReadoutClass::coupled ? p_coupled : 1.0 - p_coupled;
}

}  // namespace carvesim
