#include <catch_amalgamated.hpp>

#include <random>

#include "carvesim/cavity_model.hpp"

using namespace carvesim;
using Catch::Approx;

namespace {

// Exact Poisson CDF P(N <= k) by direct summation, for small means.
double poisson_cdf(double mean, int k) {
  double term = std::exp(-mean), sum = term;
  for (int j = 1; j <= k; ++j) {
    term *= mean / j;
    sum += term;
  }
  return sum;
}

}  // namespace

TEST_CASE("cooperativity", "[cavity]") {
  const auto p = CavityParams::reference();
  CHECK(p.cooperativity() == Approx(27.096).margin(1e-3));
  CHECK(cooperativity(0.0, 1.0, 1.0) == 0.0);
  CHECK(cooperativity(2.0, 3.0, 5.0) == Approx(4.0 * cooperativity(1.0, 3.0, 5.0)));
  CHECK_THROWS_AS(cooperativity(1.0, 0.0, 1.0), InvalidArgument);
  CHECK_THROWS_AS(cooperativity(1.0, 1.0, 0.0), InvalidArgument);
}

TEST_CASE("reflection amplitude", "[cavity]") {
  CavityParams lossless;
  lossless.kappa = lossless.kappa_wg = 1.0;
  lossless.gamma = 1.0;
  CHECK(std::abs(reflection_amplitude(lossless) - Complex(1.0, 0.0)) < 1e-15);

  const auto p = CavityParams::reference();
  const Complex empty = reflection_amplitude(p.with_coupling(0.0));
  CHECK(empty.real() == Approx(-0.632).margin(1e-12));
  CHECK(std::norm(empty) == Approx(0.3994).margin(1e-4));
  CHECK(reflectivity(p.with_cooperativity(27.0)) == Approx(0.9739).margin(1e-4));

  CavityParams pole;
  CHECK_THROWS_AS(reflection_amplitude(pole.with_coupling(1.0)), NumericError);
  CavityParams bad = p;
  bad.kappa_wg = 2.0 * bad.kappa;
  CHECK_THROWS_AS(reflection_amplitude(bad), InvalidArgument);
}

TEST_CASE("on-resonance identity and passivity", "[cavity][property]") {
  std::mt19937_64 gen(17);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 2000; ++k) {
    CavityParams p;
    p.kappa = 1e9 * (0.1 + u(gen));
    p.kappa_wg = u(gen) * p.kappa;
    p.gamma = 1e7 * (0.1 + u(gen));
    p.g = 1e9 * u(gen);
    const double exact = on_resonance_amplitude(p.cooperativity(), p.kappa_wg / p.kappa);
    CHECK(std::abs(reflection_amplitude(p) - Complex(exact, 0.0)) < 1e-14);
    p.atom_detuning = 1e9 * (u(gen) - 0.5);
    p.cavity_detuning = 1e9 * (u(gen) - 0.5);
    CHECK(reflectivity(p) <= 1.0 + 1e-14);
  }
}

TEST_CASE("reflectivity is monotone above critical coupling", "[cavity][property]") {
  const auto p = CavityParams::reference();
  // Undercoupled: r crosses zero at C = 2 kappa_wg/kappa - 1 < 0, so R rises for all C >= 0.
  double prev = reflectivity(p.with_cooperativity(0.0));
  for (double c = 0.5; c < 2000.0; c *= 1.3) {
    const double r = reflectivity(p.with_cooperativity(c));
    CHECK(r > prev);
    prev = r;
  }
  CHECK(prev == Approx(1.0).margin(2e-3));
}

TEST_CASE("large-C approximation differs from the exact form", "[cavity]") {
  const double exact = std::pow(on_resonance_amplitude(27.0, 0.184), 2);
  const double approx = reflectivity_large_c_approx(27.0, 0.184);
  CHECK(approx < exact);
  CHECK(reflectivity_large_c_approx(1e6, 0.184) == Approx(std::pow(on_resonance_amplitude(1e6, 0.184), 2)).epsilon(1e-9));
}

TEST_CASE("basis-state amplitudes", "[cavity]") {
  const auto p = CavityParams::reference().with_cooperativity(27.0);
  const auto r = basis_state_reflectivities(p, p);
  CHECK(std::norm(r[1]) == Approx(0.9739).margin(1e-4));
  CHECK(std::norm(r[3]) == Approx(0.9867).margin(1e-4));
  CHECK(std::norm(r[3]) == Approx(reflectivity(p.with_cooperativity(54.0))).margin(1e-14));

  const auto off = p.with_coupling(0.0);
  const auto same = basis_state_reflectivities(off, off);
  for (const auto& x : same) CHECK(std::abs(x - same[0]) == 0.0);

  const auto amps = amplitudes_from_reflectivities(kMeasuredReflectivities);
  CHECK(amps[0].real() == Approx(-std::sqrt(0.40)));
  CHECK_THROWS_AS(amplitudes_from_reflectivities({0.4, 1.3, 0.9, 0.9}), InvalidArgument);
}

TEST_CASE("spectrum", "[cavity]") {
  const auto p = CavityParams::reference();
  const std::vector<double> f{-1e9, 0.0, 1e9};
  const auto s = reflection_spectrum(p, f);
  REQUIRE(s.size() == 3);
  CHECK(s[1].reflectivity == Approx(reflectivity(p)).margin(1e-15));
  CHECK(s[0].detuning_hz == -1e9);
}

TEST_CASE("thermal averaging", "[cavity]") {
  const auto p = CavityParams::reference();
  const auto delta = CooperativityDistribution::delta(27.0);
  CHECK(thermal_average_reflectivity(delta, p) == Approx(reflectivity(p.with_cooperativity(27.0))).margin(1e-12));
  CHECK_THROWS_AS(CooperativityDistribution({}), InvalidArgument);
  CHECK_THROWS_AS(CooperativityDistribution({{1.0, -1.0}}), InvalidArgument);

  ThermalCloud cold;
  cold.temperature = 1e-15;
  const ModeFunction mode;
  const auto frozen = sample_thermal_cooperativity(mode, cold, 100, 1);
  CHECK(frozen.mean() == Approx(mode.peak_cooperativity).epsilon(1e-4));
  CHECK(thermal_average_reflectivity(frozen, p) ==
        Approx(reflectivity(p.with_cooperativity(mode.peak_cooperativity))).epsilon(1e-6));
}

TEST_CASE("mode-function calibration reproduces the target moments", "[cavity]") {
  const ThermalCloud cloud;
  const auto mode = calibrate_mode_function(47.0, 27.0, 25.0, cloud);
  CHECK(mode.radial_length_x == Approx(111.0e-9).epsilon(0.01));
  CHECK(mode.vertical_decay_length == Approx(42.0e-9).epsilon(0.01));
  const auto dist = sample_thermal_cooperativity(mode, cloud, 200000, 42);
  CHECK(dist.mean() == Approx(27.0).epsilon(0.02));
  CHECK(dist.stddev() == Approx(25.0).epsilon(0.06));
  CHECK_THROWS_AS(calibrate_mode_function(47.0, 27.0, 1.0, cloud), InvalidArgument);
}

TEST_CASE("sampling is independent of worker count", "[cavity][determinism]") {
  const ThermalCloud cloud;
  const ModeFunction mode;
  set_worker_count(1);
  const auto a = sample_thermal_cooperativity(mode, cloud, 1000, 5);
  set_worker_count(4);
  const auto b = sample_thermal_cooperativity(mode, cloud, 1000, 5);
  set_worker_count(0);
  for (std::size_t k = 0; k < 1000; ++k) CHECK(a.samples()[k].cooperativity == b.samples()[k].cooperativity);
}

TEST_CASE("cavity readout", "[cavity]") {
  ReadoutModel dark;
  dark.photon_flux = 0.0;
  Rng rng = make_rng(1, 0);
  for (int k = 0; k < 20; ++k) {
    const auto shot = simulate_cavity_readout(Basis::s11, dark, kMeasuredReflectivities, rng);
    CHECK(shot.count == 0);
    CHECK(shot.classification == ReadoutClass::uncoupled);
  }

  ReadoutModel m;
  m.photon_flux = 100.0;
  m.integration_time = 1.0;
  m.efficiency = 1.0;
  CHECK(m.mean_counts(0.40) == Approx(40.0));

  // Exact classification probability versus an independent Poisson CDF.
  m.photon_flux = 10.0;
  m.threshold = 7;
  CHECK(readout_fidelity_exact(Basis::s00, m, kMeasuredReflectivities) == Approx(poisson_cdf(4.0, 6)).epsilon(1e-12));
  CHECK(readout_fidelity_exact(Basis::s11, m, kMeasuredReflectivities) ==
        Approx(1.0 - poisson_cdf(9.7, 6)).epsilon(1e-12));

  const ReadoutModel defaults;
  CHECK(readout_fidelity_exact(Basis::s00, defaults, kMeasuredReflectivities) >= 0.94);
  CHECK(readout_fidelity_exact(Basis::s01, defaults, kMeasuredReflectivities) >= 0.94);
}

TEST_CASE("readout fidelity grows with integration time", "[cavity][property]") {
  ReadoutModel m;
  double prev = 0.0;
  for (double t = 5e-6; t <= 60e-6; t += 5e-6) {
    m.integration_time = t;
    // threshold scaled with the mean so discrimination is compared at fixed relative position
    m.threshold = static_cast<std::uint64_t>(std::lround(m.mean_counts(0.64)));
    std::size_t correct = 0, total = 0;
    for (Basis b : kAllBasis) {
      for (std::size_t i = 0; i < 4000; ++i) {
        Rng rng = make_rng(derive_seed(99, index(b)), i);
        const auto shot = simulate_cavity_readout(b, m, kMeasuredReflectivities, rng);
        correct += shot.classification == expected_class(b);
        ++total;
      }
    }
    const double f = static_cast<double>(correct) / total;
    CHECK(f >= prev - 0.01);
    prev = std::max(prev, f);
  }
}
