#pragma once

// Two-qubit states in the {|00>, |01>, |10>, |11>} basis (first label = atom A),
// the global microwave rotation applied to both atoms, and the estimators
// used to certify entanglement: Bell-state fidelity, parity and a concurrence
// lower bound.
//
// Rotation convention: R_{phi,theta} = exp(-i theta/2 (cos phi X + sin phi Y)),
//
//   R_{phi,theta} = [[ cos(theta/2),            -i e^{-i phi} sin(theta/2) ],
//                    [ -i e^{i phi} sin(theta/2),  cos(theta/2)            ]]
//
// so that R_{0,theta} (x) R_{0,theta} |00> = cos^2|00> - i sc (|01>+|10>) - sin^2 |11>.

#include <array>
#include <cmath>
#include <span>
#include <vector>

#include <Eigen/Dense>

#include "carvesim/common.hpp"

namespace carvesim {

using Ket4 = Eigen::Matrix<Complex, 4, 1>;
using Matrix4c = Eigen::Matrix<Complex, 4, 4>;
using Matrix2c = Eigen::Matrix<Complex, 2, 2>;

/// Computational basis label; the integer value is the vector index.
enum class Basis : int { s00 = 0, s01 = 1, s10 = 2, s11 = 3 };

inline constexpr std::array<Basis, 4> kAllBasis{Basis::s00, Basis::s01, Basis::s10, Basis::s11};

constexpr int index(Basis b) { return static_cast<int>(b); }

inline constexpr double kNormTolerance = 1e-12;

/// Pure two-qubit state. Always normalized.
class TwoQubitState {
 public:
  TwoQubitState() : amps_(Ket4::Zero()) { amps_(0) = 1.0; }

  /// Rejects vectors whose norm differs from one by more than `tol`.
  explicit TwoQubitState(const Ket4& amplitudes, double tol = kNormTolerance) : amps_(amplitudes) {
    const double n2 = amps_.squaredNorm();
    if (!std::isfinite(n2) || std::abs(n2 - 1.0) > tol)
      throw InvalidArgument("TwoQubitState: amplitudes are not normalized (|a|^2 = " + std::to_string(n2) + ")");
  }

  TwoQubitState(Complex a00, Complex a01, Complex a10, Complex a11, double tol = kNormTolerance)
      : TwoQubitState(make(a00, a01, a10, a11), tol) {}

  /// Normalizes an arbitrary non-zero vector.
  static TwoQubitState normalized(const Ket4& v) {
    const double n = v.norm();
    if (!(n > 0.0) || !std::isfinite(n)) throw NumericError("TwoQubitState: cannot normalize a zero vector");
    return TwoQubitState(v / n);
  }

  static TwoQubitState basis(Basis b) {
    Ket4 v = Ket4::Zero();
    v(index(b)) = 1.0;
    return TwoQubitState(v);
  }

  const Ket4& amplitudes() const { return amps_; }
  Complex amplitude(Basis b) const { return amps_(index(b)); }
  double probability(Basis b) const { return std::norm(amps_(index(b))); }

 private:
  static Ket4 make(Complex a00, Complex a01, Complex a10, Complex a11) {
    Ket4 v;
    v << a00, a01, a10, a11;
    return v;
  }
  Ket4 amps_;
};

/// Replaces m by (m + m^dagger)/2.
inline void hermitize(Matrix4c& m) {
  const Matrix4c h = 0.5 * (m + m.adjoint());
  m = h;
}

/// Density operator. Hermitian, unit trace and positive semidefinite
/// (eigenvalues >= -1e-10) by construction.
class TwoQubitDensityMatrix {
 public:
  static constexpr double kHermitianTolerance = 1e-12;
  static constexpr double kTraceTolerance = 1e-12;
  static constexpr double kEigenTolerance = 1e-10;

  TwoQubitDensityMatrix() : rho_(Matrix4c::Zero()) { rho_(0, 0) = 1.0; }

  explicit TwoQubitDensityMatrix(const Matrix4c& rho) : rho_(rho) {
    if (!rho_.allFinite()) throw InvalidArgument("density matrix has non-finite entries");
    if ((rho_ - rho_.adjoint()).cwiseAbs().maxCoeff() > kHermitianTolerance)
      throw InvalidArgument("density matrix is not Hermitian");
    hermitize(rho_);
    const double tr = rho_.trace().real();
    if (std::abs(tr - 1.0) > kTraceTolerance)
      throw InvalidArgument("density matrix trace is " + std::to_string(tr) + ", expected 1");
    if (min_eigenvalue() < -kEigenTolerance) throw InvalidArgument("density matrix has a negative eigenvalue");
  }

  TwoQubitDensityMatrix(const TwoQubitState& psi)  // NOLINT(google-explicit-constructor)
      : rho_(psi.amplitudes() * psi.amplitudes().adjoint()) {
    hermitize(rho_);
  }

  /// Rescales a positive operator to unit trace. Throws when the trace vanishes.
  static TwoQubitDensityMatrix from_unnormalized(Matrix4c m) {
    hermitize(m);
    const double tr = m.trace().real();
    if (!(tr > 0.0) || !std::isfinite(tr)) throw NumericError("cannot normalize an operator with zero trace");
    m /= tr;
    hermitize(m);
    return TwoQubitDensityMatrix(m);
  }

  static TwoQubitDensityMatrix maximally_mixed() { return TwoQubitDensityMatrix(Matrix4c::Identity() / 4.0); }

  const Matrix4c& matrix() const { return rho_; }

  /// rho_{row,col}; e.g. element(Basis::s11, Basis::s00) is rho_{11,00}.
  Complex element(Basis row, Basis col) const { return rho_(index(row), index(col)); }
  Complex operator()(Basis row, Basis col) const { return element(row, col); }

  double population(Basis b) const { return rho_(index(b), index(b)).real(); }
  std::array<double, 4> populations() const {
    return {population(Basis::s00), population(Basis::s01), population(Basis::s10), population(Basis::s11)};
  }

  Eigen::Vector4d eigenvalues() const { return Eigen::SelfAdjointEigenSolver<Matrix4c>(rho_).eigenvalues(); }
  double min_eigenvalue() const { return eigenvalues().minCoeff(); }
  double purity() const { return (rho_ * rho_).trace().real(); }

 private:
  Matrix4c rho_;
};

/// Single-qubit rotation. Angles are wrapped into [0, 2 pi).
struct RotationPulse {
  double axis_phase = 0.0;
  double angle = 0.0;

  RotationPulse() = default;
  RotationPulse(double phi, double theta) : axis_phase(wrap(phi)), angle(wrap(theta)) {}

  static double wrap(double a) {
    require(std::isfinite(a), "rotation angles must be finite");
    double w = std::fmod(a, constants::two_pi);
    if (w < 0.0) w += constants::two_pi;
    if (w >= constants::two_pi) w = 0.0;
    return w;
  }
};

inline Matrix2c rotation_matrix(const RotationPulse& p) {
  const double c = std::cos(p.angle / 2.0);
  const double s = std::sin(p.angle / 2.0);
  const Complex i{0.0, 1.0};
  Matrix2c r;
  r << c, -i * std::exp(-i * p.axis_phase) * s, -i * std::exp(i * p.axis_phase) * s, c;
  return r;
}

/// R (x) R for the same pulse on both atoms.
inline Matrix4c global_rotation_matrix(const RotationPulse& p) {
  const Matrix2c r = rotation_matrix(p);
  Matrix4c u;
  for (int a = 0; a < 2; ++a)
    for (int b = 0; b < 2; ++b)
      for (int c = 0; c < 2; ++c)
        for (int d = 0; d < 2; ++d) u(2 * a + b, 2 * c + d) = r(a, c) * r(b, d);
  return u;
}

inline TwoQubitState global_rotation(const TwoQubitState& psi, const RotationPulse& p) {
  // Renormalize to strip rounding; the map is unitary.
  return TwoQubitState::normalized(global_rotation_matrix(p) * psi.amplitudes());
}

inline TwoQubitDensityMatrix global_rotation(const TwoQubitDensityMatrix& rho, const RotationPulse& p) {
  const Matrix4c u = global_rotation_matrix(p);
  Matrix4c out = u * rho.matrix() * u.adjoint();
  return TwoQubitDensityMatrix::from_unnormalized(out);
}

inline TwoQubitState bell_phi_plus() {
  const double h = 1.0 / std::sqrt(2.0);
  return TwoQubitState(h, 0.0, 0.0, h);
}

inline TwoQubitState bell_psi_plus() {
  const double h = 1.0 / std::sqrt(2.0);
  return TwoQubitState(0.0, h, h, 0.0);
}

/// <Phi+|rho|Phi+> = (rho_{00,00} + rho_{11,11})/2 + Re rho_{00,11}.
inline double fidelity_phi_plus(const TwoQubitDensityMatrix& rho) {
  const double f = 0.5 * (rho.population(Basis::s00) + rho.population(Basis::s11)) +
                   rho(Basis::s00, Basis::s11).real();
  return std::clamp(f, 0.0, 1.0);
}

inline double fidelity_psi_plus(const TwoQubitDensityMatrix& rho) {
  const double f = 0.5 * (rho.population(Basis::s01) + rho.population(Basis::s10)) +
                   rho(Basis::s01, Basis::s10).real();
  return std::clamp(f, 0.0, 1.0);
}

/// P00 - P01 - P10 + P11.
inline double parity(const TwoQubitDensityMatrix& rho) {
  return rho.population(Basis::s00) - rho.population(Basis::s01) - rho.population(Basis::s10) +
         rho.population(Basis::s11);
}

/// Axis of the analysis pi/2 pulse for parity angle phi. The oscillation phase
/// is referenced to the y axis, which makes parity_curve follow
/// 2Re(rho_{10,01}) + 2Im(rho_{11,00}) sin 2phi + 2Re(rho_{11,00}) cos 2phi.
inline RotationPulse parity_analysis_pulse(double phi) {
  return RotationPulse(phi + constants::pi / 2.0, constants::pi / 2.0);
}

/// Parity after a global pi/2 analysis pulse, one value per entry of phis.
inline std::vector<double> parity_curve(const TwoQubitDensityMatrix& rho, std::span<const double> phis) {
  std::vector<double> out;
  out.reserve(phis.size());
  for (double phi : phis) out.push_back(parity(global_rotation(rho, parity_analysis_pulse(phi))));
  return out;
}

/// Closed-form parity oscillation in terms of rho_{10,01} and rho_{11,00}.
inline double parity_closed_form(const TwoQubitDensityMatrix& rho, double phi) {
  const Complex c = rho(Basis::s11, Basis::s00);
  return 2.0 * rho(Basis::s10, Basis::s01).real() + 2.0 * c.imag() * std::sin(2.0 * phi) +
         2.0 * c.real() * std::cos(2.0 * phi);
}

/// 2(|rho_{00,11}| - sqrt(rho_{01,01} rho_{10,10})). Negative values are
/// returned as-is: they mean the bound certifies nothing.
inline double concurrence_lower_bound(const TwoQubitDensityMatrix& rho) {
  const double p01 = std::max(0.0, rho.population(Basis::s01));
  const double p10 = std::max(0.0, rho.population(Basis::s10));
  return 2.0 * (std::abs(rho(Basis::s00, Basis::s11)) - std::sqrt(p01 * p10));
}

/// Bound from the coherence magnitude and the summed odd population only.
/// The product P01 P10 is maximal at P01 = P10, which is the case assumed.
inline double concurrence_lower_bound_equal_split(double coherence_abs, double odd_population) {
  require(odd_population >= 0.0, "odd population must be non-negative");
  return 2.0 * (coherence_abs - odd_population / 2.0);
}

// Channels used by the experiment pipeline.

/// Single-qubit depolarizing channel rho -> (1-p) rho + p Tr_q(rho) (x) I/2
/// applied to each atom.
inline TwoQubitDensityMatrix depolarize_each(const TwoQubitDensityMatrix& rho, double p) {
  require(p >= 0.0 && p <= 1.0, "depolarizing probability must lie in [0, 1]");
  // Pauli-twirl form: (1 - 3p/4) rho + p/4 (X rho X + Y rho Y + Z rho Z) per qubit.
  Matrix2c x, y, z, id;
  const Complex i{0.0, 1.0};
  x << 0, 1, 1, 0;
  y << 0, -i, i, 0;
  z << 1, 0, 0, -1;
  id = Matrix2c::Identity();
  auto kron = [](const Matrix2c& a, const Matrix2c& b) {
    Matrix4c k;
    for (int r = 0; r < 4; ++r)
      for (int c = 0; c < 4; ++c) k(r, c) = a(r / 2, c / 2) * b(r % 2, c % 2);
    return k;
  };
  const std::array<Matrix2c, 3> paulis{x, y, z};
  Matrix4c m = rho.matrix();
  for (int qubit = 0; qubit < 2; ++qubit) {
    Matrix4c next = (1.0 - 0.75 * p) * m;
    for (const auto& s : paulis) {
      const Matrix4c k = qubit == 0 ? kron(s, id) : kron(id, s);
      next += 0.25 * p * (k * m * k.adjoint());
    }
    m = next;
  }
  return TwoQubitDensityMatrix::from_unnormalized(m);
}

/// Scales every coherence between different states of atom A by factor_a and
/// of atom B by factor_b (phase-randomizing / T2 channel).
inline TwoQubitDensityMatrix dephase_each(const TwoQubitDensityMatrix& rho, double factor_a, double factor_b) {
  require(factor_a >= 0.0 && factor_a <= 1.0 && factor_b >= 0.0 && factor_b <= 1.0,
          "dephasing factors must lie in [0, 1]");
  Matrix4c m = rho.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) {
      double f = 1.0;
      if ((r >> 1) != (c >> 1)) f *= factor_a;
      if ((r & 1) != (c & 1)) f *= factor_b;
      m(r, c) *= f;
    }
  return TwoQubitDensityMatrix::from_unnormalized(m);
}

/// Multiplies every off-diagonal element by `factor`.
inline TwoQubitDensityMatrix damp_coherences(const TwoQubitDensityMatrix& rho, double factor) {
  require(factor >= 0.0 && factor <= 1.0, "damping factor must lie in [0, 1]");
  Matrix4c m = rho.matrix();
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c)
      if (r != c) m(r, c) *= factor;
  return TwoQubitDensityMatrix::from_unnormalized(m);
}

}  // namespace carvesim
