#pragma once

// Qubit frequency of an atom carried away from the cavity, phase accumulated
// under Carr-Purcell decoupling, and the Monte Carlo of the coherence left
// after the move.
//
// Sign convention: the trap light shift lowers the qubit frequency, so the
// depth term of delta0 is negative and the motional term positive.

#include <algorithm>
#include <cmath>
#include <concepts>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "carvesim/common.hpp"

namespace carvesim {

enum class TrapConfiguration { gaussian, standing_wave };

struct TrapFrequencies {
  double radial;  // rad/s
  double axial;   // rad/s
};

/// Focused tweezer, optionally retro-reflected into a standing wave.
struct TrapGeometry {
  double depth = units::energy_from_mhz(32.0);  // U0, J
  double waist = 1.163e-6;                      // w0, m
  double wavelength = 1.08e-6;                  // m
  double contrast = 1.2;                        // alpha
  double mass = constants::rb87_mass;

  void validate() const {
    require(depth > 0.0 && waist > 0.0 && wavelength > 0.0 && contrast > 0.0 && mass > 0.0,
            "trap geometry values must be > 0");
  }

  double rayleigh_range() const { return constants::pi * waist * waist / wavelength; }
  double lattice_length() const { return wavelength / constants::two_pi; }  // z_lambda = 1/k
  double wavenumber() const { return constants::two_pi / wavelength; }

  /// Waist and wavelength that give the requested standing-wave frequencies
  /// at this depth and contrast.
  static TrapGeometry calibrated(double depth, double contrast, double radial_standing, double axial_standing,
                                 double mass = constants::rb87_mass) {
    require(depth > 0.0 && contrast > 0.0 && radial_standing > 0.0 && axial_standing > 0.0,
            "trap calibration inputs must be > 0");
    TrapGeometry g;
    g.depth = depth;
    g.contrast = contrast;
    g.mass = mass;
    g.waist = std::sqrt(4.0 * contrast * depth / mass) / radial_standing;
    g.wavelength = constants::two_pi * std::sqrt(2.0 * contrast * depth / mass) / axial_standing;
    return g;
  }

  /// 32 MHz deep, alpha = 1.2, standing-wave frequencies 2pi x (115, 550) kHz.
  static TrapGeometry reference() {
    return calibrated(units::energy_from_mhz(32.0), 1.2, units::khz_to_rad(115.0), units::khz_to_rad(550.0));
  }
};

/// Harmonic frequencies at the trap centre.
inline TrapFrequencies trap_frequencies(const TrapGeometry& g, TrapConfiguration config) {
  g.validate();
  const double depth = config == TrapConfiguration::standing_wave ? g.contrast * g.depth : g.depth;
  const double axial_length = config == TrapConfiguration::standing_wave ? g.lattice_length() : g.rayleigh_range();
  return {std::sqrt(4.0 * depth / (g.mass * g.waist * g.waist)),
          std::sqrt(2.0 * depth / (g.mass * axial_length * axial_length))};
}

/// Mean thermal occupation 1/(exp(hbar w / k_B T) - 1).
inline double bose_occupation(double omega, double temperature) {
  require(omega > 0.0 && temperature >= 0.0, "bose_occupation: omega > 0 and T >= 0 required");
  if (temperature == 0.0) return 0.0;
  return 1.0 / std::expm1(constants::hbar * omega / (constants::k_B * temperature));
}

/// hbar w (1/2 + n) for one axis.
inline double mean_axis_energy(double omega, double occupation) {
  return constants::hbar * omega * (0.5 + occupation);
}

struct Occupations {
  double radial;
  double axial;
};

/// delta0 = -zeta U0/hbar + (zeta/2)(2 w_r (1/2 + n_r) + w_z (1/2 + n_z)), rad/s.
inline double differential_light_shift(double depth, const TrapFrequencies& f, const Occupations& n, double zeta) {
  require(zeta >= 0.0, "zeta must be >= 0");
  require(n.radial >= 0.0 && n.axial >= 0.0, "occupations must be >= 0");
  return -zeta * depth / constants::hbar +
         0.5 * zeta * (2.0 * f.radial * (0.5 + n.radial) + f.axial * (0.5 + n.axial));
}

inline double differential_light_shift(double depth, const TrapFrequencies& f, double temperature, double zeta) {
  return differential_light_shift(depth, f,
                                  Occupations{bose_occupation(f.radial, temperature), bose_occupation(f.axial, temperature)},
                                  zeta);
}

/// T2* = 2 hbar / (zeta k_B T).
inline double reversible_dephasing_time(double temperature, double zeta) {
  require(temperature > 0.0 && zeta > 0.0, "T2*: temperature and zeta must be > 0");
  return 2.0 * constants::hbar / (zeta * constants::k_B * temperature);
}

/// d(1/T2*)/dT = zeta k_B / (2 hbar), in 1/(s K).
inline double dephasing_rate_slope(double zeta) {
  require(zeta > 0.0, "zeta must be > 0");
  return zeta * constants::k_B / (2.0 * constants::hbar);
}

// ---------------------------------------------------------------------------
// Ramps

/// Qubit detuning sampled on a uniform grid starting at t = 0.
struct LightShiftRamp {
  double dt = 0.0;
  std::vector<double> samples;  // rad/s

  double duration() const { return dt * static_cast<double>(samples.size() - 1); }

  void validate() const {
    require(samples.size() >= 2 && dt > 0.0, "ramp needs at least two samples and dt > 0");
    for (double s : samples) require(std::isfinite(s), "ramp samples must be finite");
  }

  double operator()(double t) const {
    const double x = std::clamp(t / dt, 0.0, static_cast<double>(samples.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(x), samples.size() - 2);
    const double frac = x - static_cast<double>(i);
    return samples[i] + frac * (samples[i + 1] - samples[i]);
  }

  /// Exact integral of the linear interpolant over [a, b] (clamped to the grid).
  double integral(double a, double b) const {
    if (b <= a) return 0.0;
    return primitive(b) - primitive(a);
  }

 private:
  double primitive(double t) const {
    const double x = std::clamp(t / dt, 0.0, static_cast<double>(samples.size() - 1));
    const auto i = std::min(static_cast<std::size_t>(x), samples.size() - 2);
    double acc = 0.0;
    for (std::size_t j = 0; j < i; ++j) acc += 0.5 * (samples[j] + samples[j + 1]);
    acc *= dt;
    const double part = (x - static_cast<double>(i)) * dt;
    return acc + 0.5 * part * (samples[i] + (*this)(t));
  }
};

/// offset + amplitude tanh(rate (t - center)). Integrals are exact.
struct TanhProfile {
  double offset = 0.0;
  double amplitude = 0.0;
  double center = 0.0;
  double rate = 0.0;

  double operator()(double t) const { return offset + amplitude * std::tanh(rate * (t - center)); }

  double integral(double a, double b) const {
    double out = offset * (b - a);
    if (rate != 0.0 && amplitude != 0.0)
      out += amplitude * (log_cosh(rate * (b - center)) - log_cosh(rate * (a - center))) / rate;
    return out;
  }

  static double log_cosh(double x) {
    const double ax = std::abs(x);
    return ax + std::log1p(std::exp(-2.0 * ax)) - std::log(2.0);
  }
};

template <class P>
concept PhaseProfile = requires(const P& p, double a, double b) {
  { p(a) } -> std::convertible_to<double>;
  { p.integral(a, b) } -> std::convertible_to<double>;
};

struct RampShape {
  double duration = 650e-6;    // s
  double steepness = 20.0;     // rate * duration / 2; 0 gives a flat ramp
  double start_shift = 0.0;    // rad/s, at the cavity
  double end_shift = 0.0;      // rad/s, in free space
  double response_time = 0.0;  // s, first-order mirror lag; 0 disables
  std::size_t samples = 2001;

  TanhProfile profile() const {
    require(duration > 0.0, "ramp duration must be > 0");
    require(steepness >= 0.0, "ramp steepness must be >= 0");
    return {0.5 * (start_shift + end_shift), 0.5 * (end_shift - start_shift), 0.5 * duration,
            2.0 * steepness / duration};
  }
};

/// Samples midpoint + amplitude tanh((t - T/2)/tau) and, if requested, passes
/// it through a first-order lag with the mirror response time.
inline LightShiftRamp build_ramp(const RampShape& shape) {
  require(shape.samples >= 2, "ramp needs at least two samples");
  require(shape.response_time >= 0.0, "response time must be >= 0");
  require(shape.response_time == 0.0 || shape.duration >= shape.response_time,
          "ramp duration must not be shorter than the mirror response time");
  const auto p = shape.profile();
  LightShiftRamp r;
  r.dt = shape.duration / static_cast<double>(shape.samples - 1);
  r.samples.resize(shape.samples);
  for (std::size_t i = 0; i < shape.samples; ++i) r.samples[i] = p(static_cast<double>(i) * r.dt);
  if (shape.response_time > 0.0) {
    // Exact update of y' = (x - y)/tau for x linear across each step.
    const double a = std::exp(-r.dt / shape.response_time);
    const double b = shape.response_time / r.dt * (1.0 - a);
    std::vector<double> y(shape.samples);
    y[0] = r.samples[0];
    for (std::size_t i = 1; i < shape.samples; ++i)
      y[i] = a * y[i - 1] + (1.0 - b) * r.samples[i] + (b - a) * r.samples[i - 1];
    r.samples = std::move(y);
  }
  return r;
}

/// Stationary light shifts at the cavity (standing wave, thermal occupations)
/// and in free space (same occupations carried over adiabatically).
struct RampAnchors {
  double cavity;
  double free_space;
};

inline RampAnchors stationary_shifts(const TrapGeometry& g, double temperature, double zeta) {
  const auto fc = trap_frequencies(g, TrapConfiguration::standing_wave);
  const auto ff = trap_frequencies(g, TrapConfiguration::gaussian);
  const Occupations n{bose_occupation(fc.radial, temperature), bose_occupation(fc.axial, temperature)};
  return {differential_light_shift(g.contrast * g.depth, fc, n, zeta), differential_light_shift(g.depth, ff, n, zeta)};
}

// ---------------------------------------------------------------------------
// Pulse sequences and phase

enum class SequenceKind { ramsey, spin_echo, carr_purcell };

struct PulseSequence {
  SequenceKind kind = SequenceKind::ramsey;
  double duration = 650e-6;     // total free-evolution window T
  std::vector<double> times;    // pi-pulse centres
  double pulse_duration = 0.0;  // 0: instantaneous

  void validate() const {
    require(duration > 0.0, "sequence duration must be > 0");
    require(pulse_duration >= 0.0, "pulse duration must be >= 0");
    double prev_end = 0.0;
    for (std::size_t k = 0; k < times.size(); ++k) {
      const double start = times[k] - pulse_duration / 2.0;
      const double end = times[k] + pulse_duration / 2.0;
      require(times[k] >= 0.0 && times[k] <= duration, "pulse times must lie inside [0, T]");
      require(k == 0 || times[k] > times[k - 1], "pulse times must be strictly increasing");
      require(start >= -1e-15 && end <= duration + 1e-15 && start >= prev_end - 1e-15,
              "finite pulses must fit inside [0, T] without overlapping");
      prev_end = end;
    }
  }

  std::size_t pulses() const { return times.size(); }
};

/// t_k = (k - 1/2) T / N, k = 1..N.
inline std::vector<double> cp_pulse_times(std::size_t n, double duration) {
  require(n >= 1, "Carr-Purcell needs at least one pulse");
  require(duration > 0.0, "duration must be > 0");
  std::vector<double> t(n);
  for (std::size_t k = 0; k < n; ++k) t[k] = (static_cast<double>(k) + 0.5) * duration / static_cast<double>(n);
  return t;
}

inline PulseSequence ramsey_sequence(double duration) { return {SequenceKind::ramsey, duration, {}, 0.0}; }

inline PulseSequence carr_purcell_sequence(std::size_t n, double duration, double pulse_duration = 0.0) {
  if (n == 0) return ramsey_sequence(duration);
  PulseSequence s{n == 1 ? SequenceKind::spin_echo : SequenceKind::carr_purcell, duration, cp_pulse_times(n, duration),
                  pulse_duration};
  s.validate();
  return s;
}

/// Integral of s(t) delta(t) over [0, T]; s starts at +1, flips at each pi
/// pulse and is 0 while a finite pulse is applied.
template <PhaseProfile Profile>
double accumulated_phase(const Profile& delta, const PulseSequence& seq) {
  seq.validate();
  double phase = 0.0;
  double sign = 1.0;
  double t = 0.0;
  const double half = seq.pulse_duration / 2.0;
  for (double tp : seq.times) {
    phase += sign * delta.integral(t, tp - half);
    sign = -sign;
    t = tp + half;
  }
  phase += sign * delta.integral(t, seq.duration);
  return phase;
}

// ---------------------------------------------------------------------------
// Monte Carlo of the retained coherence

struct TransportNoise {
  double energy_spread = 1.0;  // 1: thermal spread of motional energies, 0: none
  double jitter_sd = 0.0;      // s, Gaussian shift of the ramp centre
};

struct TransportModel {
  TrapGeometry geometry = TrapGeometry::reference();
  double temperature = 70e-6;  // K, at the cavity
  double zeta = 5.4e-4;
  double duration = 650e-6;
  double steepness = 20.0;
  double t2_prime_cavity = 4.9e-3;  // s
  double t2_prime_free = 17e-3;     // s
  double cavity_fraction = 0.5;     // share of the move spent at the cavity
  TransportNoise noise;

  void validate() const {
    geometry.validate();
    require(temperature >= 0.0 && zeta >= 0.0, "temperature and zeta must be >= 0");
    require(duration > 0.0 && steepness >= 0.0, "duration > 0 and steepness >= 0 required");
    require(t2_prime_cavity > 0.0 && t2_prime_free > 0.0, "T2' values must be > 0");
    require(cavity_fraction >= 0.0 && cavity_fraction <= 1.0, "cavity fraction must lie in [0, 1]");
    require(noise.energy_spread >= 0.0 && noise.jitter_sd >= 0.0, "noise scales must be >= 0");
  }

  /// Irreversible decay exp(-t_c/T2'_c - t_f/T2'_f).
  double t2_prime_factor() const {
    return std::exp(-cavity_fraction * duration / t2_prime_cavity - (1.0 - cavity_fraction) * duration / t2_prime_free);
  }

  /// Default detuning ramp for the thermal mean energy, for export.
  RampShape mean_ramp_shape() const {
    const auto a = stationary_shifts(geometry, temperature, zeta);
    RampShape s;
    s.duration = duration;
    s.steepness = steepness;
    s.start_shift = a.cavity;
    s.end_shift = a.free_space;
    return s;
  }
};

/// Detuning profile of one atom. Motional energies per axis (x, y radial, z
/// axial) are drawn from the Boltzmann distribution at the cavity; along the
/// move each scales with its trap frequency (fixed quantum numbers) and the
/// depth changes from alpha U0 to U0 on the same tanh schedule. The ramp
/// centre is shifted by the trajectory jitter.
inline TanhProfile sample_atom_profile(const TransportModel& m, Rng& rng) {
  const auto fc = trap_frequencies(m.geometry, TrapConfiguration::standing_wave);
  const auto ff = trap_frequencies(m.geometry, TrapConfiguration::gaussian);
  const double kt = constants::k_B * m.temperature;
  auto energy = [&] { return std::max(0.0, kt * (1.0 + m.noise.energy_spread * (standard_exponential(rng) - 1.0))); };
  const double ex = energy(), ey = energy(), ez = energy();
  const double rr = ff.radial / fc.radial;
  const double rz = ff.axial / fc.axial;
  const double scale = m.zeta / (2.0 * constants::hbar);
  const double start = -m.zeta * m.geometry.contrast * m.geometry.depth / constants::hbar + scale * (ex + ey + ez);
  const double step = -m.zeta * (m.geometry.depth - m.geometry.contrast * m.geometry.depth) / constants::hbar +
                      scale * ((ex + ey) * (rr - 1.0) + ez * (rz - 1.0));
  const double shift = m.noise.jitter_sd > 0.0 ? m.noise.jitter_sd * standard_normal(rng) : 0.0;
  // start + step * (1 + tanh)/2
  return {start + 0.5 * step, 0.5 * step, 0.5 * m.duration + shift, 2.0 * m.steepness / m.duration};
}

struct CoherenceEstimate {
  double contrast = 0.0;         // phase contrast x T2' factor
  double mc_error = 0.0;
  double phase_contrast = 0.0;   // |<exp(i phi)>|
  double t2_prime_factor = 0.0;
};

inline CoherenceEstimate simulate_retained_coherence(const TransportModel& m, const PulseSequence& seq,
                                                     std::size_t n_samples, std::uint64_t seed) {
  m.validate();
  require(n_samples >= 1, "need at least one sample");
  require(std::abs(seq.duration - m.duration) <= 1e-12 * m.duration, "sequence and move durations differ");
  const auto phases = parallel_map<double>(n_samples, [&](std::size_t i) {
    Rng rng = make_rng(seed, i);
    return accumulated_phase(sample_atom_profile(m, rng), seq);
  });
  double c = 0.0, s = 0.0;
  for (double p : phases) {
    c += std::cos(p);
    s += std::sin(p);
  }
  const double n = static_cast<double>(n_samples);
  c /= n;
  s /= n;
  const double mag = std::hypot(c, s);
  // Spread of the projection onto the mean phasor.
  const double mean_arg = std::atan2(s, c);
  double var = 0.0;
  for (double p : phases) {
    const double d = std::cos(p - mean_arg) - mag;
    var += d * d;
  }
  var = n_samples > 1 ? var / (n - 1.0) : 0.0;
  CoherenceEstimate out;
  out.phase_contrast = mag;
  out.t2_prime_factor = m.t2_prime_factor();
  out.contrast = mag * out.t2_prime_factor;
  out.mc_error = std::sqrt(var / n) * out.t2_prime_factor;
  return out;
}

struct PulseCountPoint {
  std::size_t pulses;
  double contrast;
  double mc_error;
};

/// Retained contrast for each Carr-Purcell pulse number (0 = Ramsey).
inline std::vector<PulseCountPoint> contrast_vs_pulses(const TransportModel& m, std::span<const std::size_t> counts,
                                                       std::size_t n_samples, std::uint64_t seed,
                                                       double pulse_duration = 0.0) {
  std::vector<PulseCountPoint> out;
  for (std::size_t n : counts) {
    const auto est = simulate_retained_coherence(m, carr_purcell_sequence(n, m.duration, pulse_duration), n_samples, seed);
    out.push_back({n, est.contrast, est.mc_error});
  }
  return out;
}

/// Jitter SD that brings the retained contrast down to `target` (shared seeds,
/// bisection on the SD).
inline double calibrate_jitter(TransportModel m, const PulseSequence& seq, double target, std::size_t n_samples,
                               std::uint64_t seed) {
  require(target > 0.0 && target < 1.0, "target contrast must lie in (0, 1)");
  m.noise.jitter_sd = 0.0;
  if (simulate_retained_coherence(m, seq, n_samples, seed).contrast < target)
    throw InvalidArgument("target contrast is above the jitter-free value");
  double lo = 0.0, hi = 1e-6;
  auto contrast_at = [&](double sd) {
    m.noise.jitter_sd = sd;
    return simulate_retained_coherence(m, seq, n_samples, seed).contrast;
  };
  while (contrast_at(hi) > target) {
    lo = hi;
    hi *= 2.0;
    if (hi > m.duration) throw NumericError("jitter calibration did not bracket the target");
  }
  for (int it = 0; it < 50; ++it) {
    const double mid = 0.5 * (lo + hi);
    (contrast_at(mid) > target ? lo : hi) = mid;
  }
  return 0.5 * (lo + hi);
}

}  // namespace carvesim
