#pragma once

// Classical trajectories through the handoff from the free-space tweezer to
// the standing wave at the crystal, one axis at a time, and the resulting
// survival probability averaged over a thermal ensemble.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

#include "carvesim/common.hpp"
#include "carvesim/transport_coherence.hpp"

namespace carvesim {

enum class Axis { radial, axial };

/// Linear interpolation s(t) from the Gaussian tweezer (s = 0) to the
/// standing wave (s = 1). The radial depth scales by (1 - s) + s alpha; the
/// axial profile mixes the Lorentzian envelope with alpha cos^2(kz) under it.
struct PotentialMorph {
  TrapGeometry geometry = TrapGeometry::reference();
  double duration = 65e-6;  // s
  double s_initial = 0.0;
  double s_final = 1.0;

  void validate() const {
    geometry.validate();
    require(duration > 0.0, "morph duration must be > 0");
    require(s_initial >= 0.0 && s_initial <= 1.0 && s_final >= 0.0 && s_final <= 1.0,
            "morph endpoints must lie in [0, 1]");
  }

  double s(double t) const {
    const double x = std::clamp(t / duration, 0.0, 1.0);
    return s_initial + (s_final - s_initial) * x;
  }

  /// Morph frozen at a single value of s.
  static PotentialMorph frozen(const TrapGeometry& g, double s, double duration) { return {g, duration, s, s}; }
};

inline double potential_1d(Axis axis, double x, double s, const TrapGeometry& g) {
  if (axis == Axis::radial) {
    const double w = g.waist;
    return -g.depth * ((1.0 - s) + s * g.contrast) * std::exp(-2.0 * x * x / (w * w));
  }
  const double zr = g.rayleigh_range();
  const double env = 1.0 / (1.0 + x * x / (zr * zr));
  const double c = std::cos(g.wavenumber() * x);
  return -g.depth * env * ((1.0 - s) + s * g.contrast * c * c);
}

inline double potential_1d(Axis axis, double x, double t, const PotentialMorph& m) {
  return potential_1d(axis, x, m.s(t), m.geometry);
}

/// -dU/dx.
inline double force_1d(Axis axis, double x, double s, const TrapGeometry& g) {
  if (axis == Axis::radial) {
    const double w2 = g.waist * g.waist;
    return -4.0 * g.depth * ((1.0 - s) + s * g.contrast) * x / w2 * std::exp(-2.0 * x * x / w2);
  }
  const double zr2 = g.rayleigh_range() * g.rayleigh_range();
  const double k = g.wavenumber();
  const double env = 1.0 / (1.0 + x * x / zr2);
  const double denv = -2.0 * x / zr2 * env * env;
  const double c = std::cos(k * x);
  const double lattice = (1.0 - s) + s * g.contrast * c * c;
  const double dlattice = -s * g.contrast * k * std::sin(2.0 * k * x);
  return g.depth * (denv * lattice + env * dlattice);
}

/// Harmonic frequency at x = 0 for a given s, rad/s.
inline double harmonic_frequency(Axis axis, double s, const TrapGeometry& g) {
  if (axis == Axis::radial) return std::sqrt(4.0 * g.depth * ((1.0 - s) + s * g.contrast) / (g.mass * g.waist * g.waist));
  const double zr = g.rayleigh_range();
  const double k = g.wavenumber();
  const double curvature = 2.0 * g.depth * ((1.0 - s) / (zr * zr) + s * g.contrast * (k * k + 1.0 / (zr * zr)));
  return std::sqrt(curvature / g.mass);
}

/// Largest harmonic frequency over the morph (the curvature is linear in s).
inline double max_frequency(Axis axis, const PotentialMorph& m) {
  return std::max(harmonic_frequency(axis, m.s_initial, m.geometry), harmonic_frequency(axis, m.s_final, m.geometry));
}

/// dt = 1 / (steps_per_period f_max).
inline double default_time_step(Axis axis, const PotentialMorph& m, double steps_per_period = 50.0) {
  return constants::two_pi / (steps_per_period * max_frequency(axis, m));
}

struct PhaseSpaceSample {
  double position = 0.0;  // m
  double momentum = 0.0;  // kg m/s
  double weight = 1.0;
};

enum class LoadingOutcome { first_site, higher_site, lost };

struct TrajectoryOptions {
  double dt = 0.0;              // s; 0 selects default_time_step
  double hold = 0.0;            // s at s_final after the morph
  double radial_window = 5.0;   // in waists
  double axial_window = 10.0;   // in Rayleigh ranges
  std::size_t record_stride = 0;  // 0: no trajectory recorded
};

struct TrajectoryPoint {
  double time;
  double position;
  double momentum;
  double energy;
};

struct TrajectoryResult {
  LoadingOutcome outcome = LoadingOutcome::lost;
  bool escaped = false;  // left the spatial window
  double final_position = 0.0;
  double final_momentum = 0.0;
  double final_energy = 0.0;  // J, kinetic + potential at s_final
  std::vector<TrajectoryPoint> trajectory;
};

/// Lowest saddle around the central site at a given s: max of U on
/// [0, lambda/2] (the potential is even).
inline double first_site_barrier(double s, const TrapGeometry& g) {
  const double half = g.wavelength / 2.0;
  double best = potential_1d(Axis::axial, 0.0, s, g);
  constexpr int n = 512;
  for (int i = 1; i <= n; ++i) best = std::max(best, potential_1d(Axis::axial, half * i / n, s, g));
  return best;
}

/// Velocity-Verlet through the morph plus the hold time. The outcome is
/// judged in the final potential: escaped or unbound atoms are lost; bound
/// atoms inside the central lattice site below its barrier are in the first
/// site, other bound atoms in a higher site.
inline TrajectoryResult integrate_trajectory(Axis axis, const PhaseSpaceSample& start, const PotentialMorph& morph,
                                             const TrajectoryOptions& opt = {}) {
  morph.validate();
  const auto& g = morph.geometry;
  const double limit = default_time_step(axis, morph);
  const double dt_req = opt.dt > 0.0 ? opt.dt : limit;
  require(dt_req <= limit * (1.0 + 1e-12), "time step exceeds 1/(50 f_max)");
  require(opt.hold >= 0.0, "hold time must be >= 0");
  const double total = morph.duration + opt.hold;
  const auto steps = static_cast<std::size_t>(std::ceil(total / dt_req));
  const double dt = total / static_cast<double>(steps);
  const double window = axis == Axis::radial ? opt.radial_window * g.waist : opt.axial_window * g.rayleigh_range();
  const double mass = g.mass;

  double x = start.position;
  double p = start.momentum;
  double t = 0.0;
  TrajectoryResult out;
  auto record = [&] {
    out.trajectory.push_back({t, x, p, p * p / (2.0 * mass) + potential_1d(axis, x, t, morph)});
  };
  if (opt.record_stride) record();
  double f = force_1d(axis, x, morph.s(t), g);
  for (std::size_t i = 0; i < steps; ++i) {
    p += 0.5 * dt * f;
    x += dt * p / mass;
    t = static_cast<double>(i + 1) * dt;
    f = force_1d(axis, x, morph.s(t), g);
    p += 0.5 * dt * f;
    if (opt.record_stride && (i + 1) % opt.record_stride == 0) record();
    if (std::abs(x) > window) {
      out.escaped = true;
      break;
    }
  }
  out.final_position = x;
  out.final_momentum = p;
  out.final_energy = p * p / (2.0 * mass) + potential_1d(axis, x, morph.s_final, g);
  if (out.escaped || out.final_energy >= 0.0) {
    out.outcome = LoadingOutcome::lost;
  } else if (axis == Axis::radial) {
    out.outcome = LoadingOutcome::first_site;
  } else {
    const bool central = std::abs(x) < g.wavelength / 4.0;
    out.outcome = central && out.final_energy < first_site_barrier(morph.s_final, g) ? LoadingOutcome::first_site
                                                                                      : LoadingOutcome::higher_site;
  }
  return out;
}

/// Thermal draw in the initial well: harmonic Gaussian proposal around the
/// minimum, reweighted by exp(-(U - U_harmonic)/k_B T) and restricted to bound
/// states. At T = 0 the atom sits at rest at the minimum.
inline PhaseSpaceSample sample_boltzmann(Axis axis, double temperature, const PotentialMorph& morph, Rng& rng) {
  require(temperature >= 0.0, "temperature must be >= 0");
  const auto& g = morph.geometry;
  const double n1 = standard_normal(rng);
  const double n2 = standard_normal(rng);
  if (temperature == 0.0) return {};
  const double kt = constants::k_B * temperature;
  const double omega = harmonic_frequency(axis, morph.s_initial, g);
  const double x = n1 * std::sqrt(kt / g.mass) / omega;
  const double p = n2 * std::sqrt(kt * g.mass);
  const double u = potential_1d(axis, x, morph.s_initial, g);
  const double u0 = potential_1d(axis, 0.0, morph.s_initial, g);
  const double u_harm = u0 + 0.5 * g.mass * omega * omega * x * x;
  const bool bound = p * p / (2.0 * g.mass) + u < 0.0;
  return {x, p, bound ? std::exp(-(u - u_harm) / kt) : 0.0};
}

struct Probability {
  double value = 0.0;
  double mc_error = 0.0;
};

struct AxisSurvival {
  Probability first_site;
  Probability higher_site;
  Probability lost;
};

struct SurvivalEstimate {
  AxisSurvival radial;
  AxisSurvival axial;
  Probability joint;  // first-site survival, product over axes
};

struct LoadingOptions {
  TrajectoryOptions trajectory;
  std::uint64_t seed = 1;
};

namespace detail {
struct WeightedOutcome {
  double weight;
  LoadingOutcome outcome;
};

inline Probability weighted_fraction(std::span<const WeightedOutcome> r, LoadingOutcome which) {
  double sw = 0.0, hit = 0.0;
  for (const auto& o : r) {
    sw += o.weight;
    if (o.outcome == which) hit += o.weight;
  }
  if (!(sw > 0.0)) throw NumericError("no bound initial samples; temperature too high for the trap depth");
  const double p = hit / sw;
  double var = 0.0;
  for (const auto& o : r) {
    const double d = (o.outcome == which ? 1.0 : 0.0) - p;
    var += o.weight * o.weight * d * d;
  }
  return {p, std::sqrt(var) / sw};
}

inline AxisSurvival summarize(std::span<const WeightedOutcome> r) {
  return {weighted_fraction(r, LoadingOutcome::first_site), weighted_fraction(r, LoadingOutcome::higher_site),
          weighted_fraction(r, LoadingOutcome::lost)};
}

constexpr std::uint64_t axis_stream(Axis a) { return a == Axis::radial ? 0x72616469ULL : 0x6178696cULL; }

/// Sample i of an axis always uses the same random stream, so estimates at
/// different temperatures and depths share their seeds.
inline WeightedOutcome run_sample(Axis axis, double temperature, const PotentialMorph& morph,
                                  const LoadingOptions& opt, std::size_t i) {
  Rng rng(derive_seed(opt.seed, axis_stream(axis), i));
  const auto start = sample_boltzmann(axis, temperature, morph, rng);
  if (start.weight == 0.0) return {0.0, LoadingOutcome::lost};
  return {start.weight, integrate_trajectory(axis, start, morph, opt.trajectory).outcome};
}
}  // namespace detail

struct SurvivalCell {
  double temperature;  // K
  double depth;        // J
  SurvivalEstimate estimate;
};

struct SurvivalMap {
  std::vector<double> temperatures;
  std::vector<double> depths;
  std::vector<SurvivalCell> cells;  // temperature-major

  const SurvivalCell& at(std::size_t ti, std::size_t di) const { return cells.at(ti * depths.size() + di); }
};

/// Grid of survival_probability. Every cell reuses the same per-sample seeds.
inline SurvivalMap survival_map(std::span<const double> temperatures, std::span<const double> depths,
                                const PotentialMorph& morph, std::size_t n_samples, const LoadingOptions& opt = {}) {
  require(!temperatures.empty() && !depths.empty(), "survival map needs a non-empty grid");
  require(n_samples >= 100, "survival needs at least 100 samples");
  for (double d : depths) require(d > 0.0, "trap depth must be > 0");
  morph.validate();
  SurvivalMap map{{temperatures.begin(), temperatures.end()}, {depths.begin(), depths.end()}, {}};
  const std::size_t nd = depths.size();
  const std::size_t cells = temperatures.size() * nd;
  // One flat parallel loop over (cell, axis, sample) keeps every worker busy.
  const auto flat = parallel_map<detail::WeightedOutcome>(cells * 2 * n_samples, [&](std::size_t k) {
    const std::size_t cell = k / (2 * n_samples);
    const Axis axis = (k / n_samples) % 2 == 0 ? Axis::radial : Axis::axial;
    PotentialMorph m = morph;
    m.geometry.depth = depths[cell % nd];
    return detail::run_sample(axis, temperatures[cell / nd], m, opt, k % n_samples);
  });
  const std::span<const detail::WeightedOutcome> all(flat);
  for (std::size_t c = 0; c < cells; ++c) {
    const auto r = detail::summarize(all.subspan(c * 2 * n_samples, n_samples));
    const auto a = detail::summarize(all.subspan(c * 2 * n_samples + n_samples, n_samples));
    SurvivalEstimate e{r, a, {}};
    const double pr = r.first_site.value, pa = a.first_site.value;
    e.joint = {pr * pa, std::hypot(pr * a.first_site.mc_error, pa * r.first_site.mc_error)};
    map.cells.push_back({temperatures[c / nd], depths[c % nd], e});
  }
  return map;
}

/// Survival of the handoff for an ensemble at `temperature` in a trap of
/// depth `depth` (J); the morph geometry supplies everything else.
inline SurvivalEstimate survival_probability(double temperature, double depth, const PotentialMorph& morph,
                                             std::size_t n_samples, const LoadingOptions& opt = {}) {
  const double t[] = {temperature};
  const double d[] = {depth};
  return survival_map(t, d, morph, n_samples, opt).cells.front().estimate;
}

}  // namespace carvesim
