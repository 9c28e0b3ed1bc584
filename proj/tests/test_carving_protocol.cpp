#include <catch_amalgamated.hpp>

#include <random>

#include "carvesim/carving_protocol.hpp"

using namespace carvesim;
using Catch::Approx;

namespace {
const double pi = constants::pi;
const ReflectionAmplitudes measured_amps = amplitudes_from_reflectivities(kMeasuredReflectivities);
}  // namespace

TEST_CASE("theta state", "[carving]") {
  const auto zero = prepare_theta_state(0.0);
  CHECK(zero.probability(Basis::s00) == Approx(1.0));
  const auto half = prepare_theta_state(pi / 2.0);
  CHECK(std::abs(half.amplitude(Basis::s01) - Complex(0.0, -0.5)) < 1e-15);
  CHECK(std::abs(half.amplitude(Basis::s11) - Complex(-0.5, 0.0)) < 1e-15);
  CHECK(prepare_theta_state(0.3 * pi).probability(Basis::s00) == Approx(std::pow(std::cos(0.15 * pi), 4)));
  CHECK(prepare_theta_state(0.3 * pi).probability(Basis::s00) == Approx(0.630).margin(5e-4));
  // Agrees with the global rotation applied to |00>.
  const auto rotated = global_rotation(TwoQubitState(), RotationPulse(0.0, 0.7));
  CHECK((prepare_theta_state(0.7).amplitudes() - rotated.amplitudes()).norm() < 1e-15);
  CHECK_THROWS_AS(prepare_theta_state(-0.1), InvalidArgument);
}

TEST_CASE("interferometer model", "[carving]") {
  const auto perfect = effective_amplitudes(measured_amps, InterferometerModel{1.0, std::nullopt});
  CHECK(perfect[0] == Complex(0.0, 0.0));
  const auto off = effective_amplitudes(measured_amps, InterferometerModel::disengaged());
  for (std::size_t k = 0; k < 4; ++k) CHECK(std::abs(off[k] - measured_amps[k]) < 1e-15);

  const InterferometerModel real{0.96, std::nullopt};
  CHECK(real.mismatch() == Approx(0.2857).margin(1e-4));
  const auto eff = effective_amplitudes(measured_amps, real);
  CHECK(std::abs(eff[0] - real.mismatch() * measured_amps[0]) < 1e-15);
  const double ratio = std::norm(eff[0]) / std::norm(eff[1]);
  CHECK(ratio > 0.09);
  CHECK(ratio < 0.125);
  const double pu = p_u_from_reflectivities(std::norm(eff[0]), std::norm(eff[1]));
  CHECK(pu == Approx(0.1086).margin(5e-4));
  CHECK_THROWS_AS((InterferometerModel{1.01, std::nullopt}.mismatch()), InvalidArgument);
}

TEST_CASE("p_u from reflectivities", "[carving]") {
  CHECK(p_u_from_reflectivities(0.0, 0.5) == 0.0);
  CHECK(p_u_from_reflectivities(0.3, 0.3) == 0.5);
  CHECK(p_u_from_reflectivities(0.0953, 1.0) == Approx(0.087).margin(1e-4));
  CHECK_THROWS_AS(p_u_from_reflectivities(0.0, 0.0), InvalidArgument);
}

TEST_CASE("scattering decay", "[carving]") {
  CHECK(scattering_decay(0.0, 27.0, 0.184) == 1.0);
  CHECK(scattering_rate(27.0, 0.184) == Approx(0.025347).margin(1e-6));
  CHECK(scattering_decay(0.35, 27.0, 0.184) == Approx(0.99117).margin(1e-5));
  CHECK(scattering_decay(0.35, 1e12, 0.184) == Approx(1.0).margin(1e-11));
}

TEST_CASE("coherent carving", "[carving]") {
  ReflectionAmplitudes ideal{0.0, -1.0, -1.0, -1.0};
  const auto small = carve_coherent(prepare_theta_state(1e-4), ideal);
  CHECK(small.fidelity_psi_plus == Approx(1.0).margin(1e-8));
  CHECK(small.fidelity_phi_plus == Approx(1.0).margin(1e-8));

  const auto psi = prepare_theta_state(0.9);
  const auto same = carve_coherent(psi, {Complex(0.3, 0.4), Complex(0.3, 0.4), Complex(0.3, 0.4), Complex(0.3, 0.4)});
  CHECK((same.state.matrix() - TwoQubitDensityMatrix(psi).matrix()).norm() < 1e-14);
  CHECK(same.success_probability == Approx(0.25));

  // F = |f|^2 and the relabelled amplitudes reproduce the state.
  const auto out = carve_coherent(prepare_theta_state(0.3 * pi), effective_amplitudes(measured_amps, 0.2857));
  CHECK(out.fidelity_phi_plus == Approx(std::norm(out.f)).margin(1e-12));
  CHECK(std::norm(out.eps0) + std::norm(out.eps1) + std::norm(out.f) == Approx(1.0).margin(1e-12));

  CHECK_THROWS_AS(carve_coherent(TwoQubitState(), ideal), NumericError);
}

TEST_CASE("success probability lies between the extreme reflectivities", "[carving][property]") {
  std::mt19937_64 gen(23);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 500; ++k) {
    std::array<double, 4> r{u(gen), u(gen), u(gen), u(gen)};
    const auto out = carve_coherent(prepare_theta_state(0.05 + 3.0 * u(gen)), amplitudes_from_reflectivities(r));
    CHECK(out.success_probability >= *std::min_element(r.begin(), r.end()) - 1e-14);
    CHECK(out.success_probability <= *std::max_element(r.begin(), r.end()) + 1e-14);
  }
}

TEST_CASE("mixed carving", "[carving]") {
  const TwoQubitDensityMatrix rho(prepare_theta_state(0.3 * pi));
  const auto none = carve_mixed(rho, 0.0);
  CHECK(none.state.population(Basis::s00) == 0.0);
  const auto mixed = carve_mixed(rho, 0.087);
  for (Basis b : {Basis::s01, Basis::s10, Basis::s11}) {
    CHECK(mixed.state(Basis::s00, b) == Complex(0.0, 0.0));
    CHECK(mixed.state(b, Basis::s00) == Complex(0.0, 0.0));
  }
  CHECK(mixed.fidelity_phi_plus == Approx(0.76142).margin(1e-5));
  CHECK_THROWS_AS(carve_mixed(TwoQubitDensityMatrix(), 0.0), NumericError);
  CHECK_THROWS_AS(carve_mixed(rho, 1.5), InvalidArgument);
}

TEST_CASE("coherent and mixed fidelities agree for a consistent p_u", "[carving][property]") {
  // Equality needs |r10| = |r01| = |r11| and p_u = |r00|^2 / (|r00|^2 + |r01|^2).
  std::mt19937_64 gen(31);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (int k = 0; k < 1000; ++k) {
    const double theta = 0.01 + (pi - 0.02) * u(gen);
    const double m = 0.05 + 0.95 * u(gen);
    const Complex r00 = std::polar(u(gen), constants::two_pi * u(gen));
    const Complex r01 = std::polar(m, constants::two_pi * u(gen));
    const Complex r11 = std::polar(m, constants::two_pi * u(gen));
    const ReflectionAmplitudes r{r00, r01, r01, r11};
    const auto psi = prepare_theta_state(theta);
    const auto coh = carve_coherent(psi, r);
    const auto mix = carve_mixed(TwoQubitDensityMatrix(psi), p_u_from_reflectivities(std::norm(r00), std::norm(r01)));
    CHECK(std::abs(coh.fidelity_phi_plus - mix.fidelity_phi_plus) < 1e-10);
  }
}

TEST_CASE("angle optimization", "[carving]") {
  const auto grid = theta_grid();
  CHECK(grid.size() == 100);
  CHECK(grid.front() == Approx(0.005 * pi));
  CHECK(grid.back() == Approx(0.5 * pi));

  const auto opt = optimize_angle(measured_amps, 0.96);
  CHECK(opt.fidelity == Approx(0.7357).margin(1e-3));
  CHECK(opt.theta / pi == Approx(0.335).margin(1e-9));
  CHECK(opt.success_probability == Approx(0.137).margin(2e-3));
  CHECK(opt.landscape.size() == grid.size());

  auto low = kMeasuredReflectivities;
  low[0] = 0.1;
  CHECK(optimize_angle(amplitudes_from_reflectivities(low), 0.96).fidelity == Approx(0.8897).margin(1e-3));

  const auto perfect = optimize_angle(measured_amps, 1.0);
  CHECK(perfect.theta == Approx(grid.front()));
  CHECK(perfect.fidelity > 0.999);

  const ReflectionAmplitudes equal{-0.6, -0.9, -0.9, -0.9};
  for (const auto& p : optimize_angle(equal, 1.0).landscape)
    CHECK(p.fidelity == Approx(perfect_interferometer_fidelity(p.theta)).margin(1e-12));
}

TEST_CASE("best fidelity does not increase with the uncoupled reflectivity", "[carving][property]") {
  double prev = 2.0;
  for (double r00 = 0.0; r00 <= 0.9; r00 += 0.05) {
    auto r = kMeasuredReflectivities;
    r[0] = r00;
    const double f = optimize_angle(amplitudes_from_reflectivities(r), 0.96).fidelity;
    CHECK(f <= prev + 1e-12);
    prev = f;
  }
}

TEST_CASE("heralded state and parity prediction", "[carving]") {
  const auto phis = linspace(0.0, pi, 9);
  CarvingConfig cfg;
  cfg.photons_sent = 0.0;
  const auto coh = predict_figure3(cfg, CarvingModel::coherent, phis);
  const auto out = carve_coherent(prepare_theta_state(cfg.theta), cfg.effective());
  const Complex a = (out.eps0 + out.eps1) / std::sqrt(2.0);
  CHECK(coh.populations[0] == Approx(0.5 * std::norm(a - out.f)).margin(1e-12));
  CHECK(coh.populations[3] == Approx(0.5 * std::norm(a + out.f)).margin(1e-12));
  CHECK(coh.populations[1] == Approx(0.25 * std::norm(out.eps0 - out.eps1)).margin(1e-12));
  CHECK(coh.populations[3] - coh.populations[0] > 0.0);

  CarvingConfig ideal;
  ideal.theta = 1e-4;
  ideal.photons_sent = 0.0;
  ideal.interferometer = {1.0, std::nullopt};
  ideal.amplitudes = {-0.6, -0.9, -0.9, -0.9};
  for (auto model : {CarvingModel::coherent, CarvingModel::mixed}) {
    const auto p = predict_figure3(ideal, model, phis);
    // residual imbalance is first order in theta
    CHECK(p.populations[0] == Approx(0.5).margin(1e-4));
    CHECK(p.populations[3] == Approx(0.5).margin(1e-4));
    CHECK(p.odd_population() == Approx(0.0).margin(1e-7));
  }

  CarvingConfig measured;
  measured.interferometer.uncoupled_probability = 0.087;
  const auto both = predict_figure3(measured, phis);
  // Carving alone; preparation and readout errors are added by the pipeline.
  CHECK(both.coherent.even_population() == Approx(0.9909).margin(1e-3));
  CHECK(both.mixed.even_population() == Approx(0.8773).margin(1e-3));
  CHECK(both.mixed.fidelity < 0.76142);
  CHECK(both.mixed.fidelity > 0.75);
  CHECK(both.mixed.parity.size() == phis.size());
}
