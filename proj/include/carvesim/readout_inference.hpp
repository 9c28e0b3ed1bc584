#pragma once

// From raw outcome counts to populations, two-atom coherence, Bell fidelity
// and concurrence bound, with bootstrap intervals.
//
// Push-out records hold retention counts (both atoms, A only, B only, none)
// and are corrected with the retention calibration. Cavity records hold
// (uncoupled, coupled) counts without and with a global pi pulse and are used
// uncorrected.

#include <Eigen/Dense>
#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <functional>
#include <istream>
#include <map>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "carvesim/cavity_model.hpp"
#include "carvesim/common.hpp"
#include "carvesim/io.hpp"
#include "carvesim/quantum_core.hpp"

namespace carvesim {

using Matrix4d = Eigen::Matrix4d;
using Vector4d = Eigen::Vector4d;

/// Retention probabilities of each atom prepared in |0> (h) and |1> (l).
struct RetentionCalibration {
  double h_a = 1.0;
  double l_a = 0.0;
  double h_b = 1.0;
  double l_b = 0.0;

  void validate() const {
    for (double v : {h_a, l_a, h_b, l_b})
      require(std::isfinite(v) && v >= 0.0 && v <= 1.0, "retention probabilities must lie in [0, 1]");
  }

  /// Multiplies every retention probability of atom A (B) by 1 - loss_a (1 - loss_b).
  RetentionCalibration with_loss(double loss_a, double loss_b) const {
    require(loss_a >= 0.0 && loss_a <= 1.0 && loss_b >= 0.0 && loss_b <= 1.0, "loss must lie in [0, 1]");
    return {h_a * (1.0 - loss_a), l_a * (1.0 - loss_a), h_b * (1.0 - loss_b), l_b * (1.0 - loss_b)};
  }

  static RetentionCalibration symmetric(double h, double l) { return {h, l, h, l}; }
};

/// K = K_A (x) K_B with K_i = [[h_i, l_i], [1-h_i, 1-l_i]]: columns are the
/// prepared two-atom states (00, 01, 10, 11), rows the retention outcomes
/// (both, A only, B only, none).
inline Matrix4d correction_matrix(const RetentionCalibration& cal) {
  cal.validate();
  if (cal.h_a == cal.l_a || cal.h_b == cal.l_b)
    throw NumericError("correction matrix is singular (h == l for an atom)");
  const Eigen::Matrix2d ka{{cal.h_a, cal.l_a}, {1.0 - cal.h_a, 1.0 - cal.l_a}};
  const Eigen::Matrix2d kb{{cal.h_b, cal.l_b}, {1.0 - cal.h_b, 1.0 - cal.l_b}};
  Matrix4d k;
  for (int r = 0; r < 4; ++r)
    for (int c = 0; c < 4; ++c) k(r, c) = ka(r / 2, c / 2) * kb(r % 2, c % 2);
  return k;
}

/// Outcome probabilities K P for populations P.
inline Vector4d retention_probabilities(const std::array<double, 4>& populations, const RetentionCalibration& cal) {
  return correction_matrix(cal) * Vector4d(populations[0], populations[1], populations[2], populations[3]);
}

struct PopulationEstimate {
  std::array<double, 4> raw{};      // K^-1 R, may leave [0, 1]
  std::array<double, 4> clipped{};  // negatives set to 0, renormalized
};

inline std::array<double, 4> clip_populations(const std::array<double, 4>& raw) {
  std::array<double, 4> out{};
  double total = 0.0;
  for (std::size_t k = 0; k < 4; ++k) {
    out[k] = std::max(0.0, raw[k]);
    total += out[k];
  }
  if (!(total > 0.0)) throw NumericError("corrected populations are all non-positive");
  for (auto& v : out) v /= total;
  return out;
}

inline PopulationEstimate infer_populations(const std::array<double, 4>& retention, const RetentionCalibration& cal) {
  double total = 0.0;
  for (double r : retention) {
    require(std::isfinite(r) && r >= 0.0 && r <= 1.0, "retention frequencies must lie in [0, 1]");
    total += r;
  }
  require(std::abs(total - 1.0) <= 1e-9, "retention frequencies must sum to 1");
  const Matrix4d k = correction_matrix(cal);
  const Vector4d p = k.partialPivLu().solve(Vector4d(retention[0], retention[1], retention[2], retention[3]));
  PopulationEstimate out;
  for (int i = 0; i < 4; ++i) out.raw[static_cast<std::size_t>(i)] = p(i);
  out.clipped = clip_populations(out.raw);
  return out;
}

// ---------------------------------------------------------------------------
// Coherence from parity

struct CoherenceFit {
  Complex rho_11_00;      // (B + iA)/2
  double re_rho_10_01;    // c0/2
  double rms_residual;
};

/// Least-squares fit of Pi(phi) = c0 + A sin 2phi + B cos 2phi.
inline CoherenceFit extract_coherence(std::span<const double> phis, std::span<const double> parities) {
  require(phis.size() == parities.size(), "extract_coherence: phi and parity lengths differ");
  require(phis.size() >= 3, "extract_coherence: need at least three analysis angles");
  Eigen::MatrixXd design(static_cast<Eigen::Index>(phis.size()), 3);
  Eigen::VectorXd y(static_cast<Eigen::Index>(phis.size()));
  for (std::size_t k = 0; k < phis.size(); ++k) {
    const auto i = static_cast<Eigen::Index>(k);
    design(i, 0) = 1.0;
    design(i, 1) = std::sin(2.0 * phis[k]);
    design(i, 2) = std::cos(2.0 * phis[k]);
    y(i) = parities[k];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  qr.setThreshold(1e-10);
  if (qr.rank() < 3)
    throw InvalidArgument("extract_coherence: analysis angles must take three distinct values modulo pi");
  const Eigen::Vector3d coef = qr.solve(y);
  const double rms = std::sqrt((design * coef - y).squaredNorm() / static_cast<double>(phis.size()));
  return {Complex(coef(2), coef(1)) / 2.0, coef(0) / 2.0, rms};
}

/// (Pi(0) - Pi(pi/2)) / 4: Re rho_{11,00} when the analysis axes are aligned
/// with the calibrated coherence phase.
inline double two_point_coherence_signed(double parity_parallel, double parity_orthogonal) {
  require(parity_parallel >= -1.0 - 1e-12 && parity_parallel <= 1.0 + 1e-12 && parity_orthogonal >= -1.0 - 1e-12 &&
              parity_orthogonal <= 1.0 + 1e-12,
          "parities must lie in [-1, 1]");
  return (parity_parallel - parity_orthogonal) / 4.0;
}

inline double two_point_coherence(double parity_parallel, double parity_orthogonal) {
  return std::abs(two_point_coherence_signed(parity_parallel, parity_orthogonal));
}

// ---------------------------------------------------------------------------
// Records

enum class RecordKind { pushout_zz, pushout_xx, pushout_yy, pushout_parity, cavity_zz, cavity_parity };

inline std::string to_string(RecordKind k) {
  switch (k) {
    case RecordKind::pushout_zz: return "ZZ";
    case RecordKind::pushout_xx: return "XX";
    case RecordKind::pushout_yy: return "YY";
    case RecordKind::pushout_parity: return "parity";
    case RecordKind::cavity_zz: return "cavity_ZZ";
    case RecordKind::cavity_parity: return "cavity_parity";
  }
  return "?";
}

inline RecordKind record_kind_from_string(const std::string& s) {
  for (auto k : {RecordKind::pushout_zz, RecordKind::pushout_xx, RecordKind::pushout_yy, RecordKind::pushout_parity,
                 RecordKind::cavity_zz, RecordKind::cavity_parity})
    if (to_string(k) == s) return k;
  throw ConfigError("unknown basis label '" + s + "' (valid: ZZ, XX, YY, parity, cavity_ZZ, cavity_parity)");
}

inline bool is_cavity(RecordKind k) { return k == RecordKind::cavity_zz || k == RecordKind::cavity_parity; }

/// One measurement setting. Push-out: (both, A only, B only, none).
/// Cavity: (uncoupled, coupled, uncoupled after pi, coupled after pi).
struct MeasurementRecord {
  RecordKind kind = RecordKind::pushout_zz;
  double phi = 0.0;
  std::array<std::uint64_t, 4> counts{};

  std::uint64_t total() const { return counts[0] + counts[1] + counts[2] + counts[3]; }

  std::array<double, 4> frequencies() const {
    const double n = static_cast<double>(total());
    if (!(n > 0.0)) throw InvalidArgument("record " + to_string(kind) + " has no counts");
    return {counts[0] / n, counts[1] / n, counts[2] / n, counts[3] / n};
  }
};

/// Lines `basis,phi_rad,n1,n2,n3,n4`. Blank lines, '#' comments and a header
/// line starting with `basis` are skipped.
inline std::vector<MeasurementRecord> parse_records(std::istream& in) {
  std::vector<MeasurementRecord> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("basis", 0) == 0) continue;
    const auto f = split_fields(line);
    const std::string where = "records line " + std::to_string(line_no);
    if (f.size() != 6) throw ConfigError(where + ": expected 6 fields, got " + std::to_string(f.size()));
    MeasurementRecord r;
    r.kind = record_kind_from_string(std::string(f[0]));
    r.phi = parse_number(f[1], where);
    for (std::size_t k = 0; k < 4; ++k) r.counts[k] = parse_count(f[k + 2], where);
    out.push_back(r);
  }
  if (out.empty()) throw ConfigError("record file contains no records");
  return out;
}

inline std::string format_records(std::span<const MeasurementRecord> records) {
  CsvTable t({"basis", "phi_rad", "n_both", "n_Aonly", "n_Bonly", "n_none"});
  for (const auto& r : records)
    t.add_row({to_string(r.kind), format_number(r.phi), format_number(r.counts[0]), format_number(r.counts[1]),
               format_number(r.counts[2]), format_number(r.counts[3])});
  return t.str();
}

/// One line `h_A,l_A,h_B,l_B` (optional header).
inline RetentionCalibration parse_calibration(std::istream& in) {
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || line[0] == '#' || line.rfind("h_A", 0) == 0) continue;
    const auto f = split_fields(line);
    const std::string where = "calibration line " + std::to_string(line_no);
    if (f.size() != 4) throw ConfigError(where + ": expected h_A,l_A,h_B,l_B");
    RetentionCalibration c{parse_number(f[0], where), parse_number(f[1], where), parse_number(f[2], where),
                           parse_number(f[3], where)};
    try {
      c.validate();
    } catch (const InvalidArgument& e) {
      throw ConfigError(where + ": " + e.what());
    }
    return c;
  }
  throw ConfigError("calibration file contains no calibration line");
}

// ---------------------------------------------------------------------------
// Estimation

struct TomographyEstimate {
  std::array<double, 4> populations{};      // clipped (cavity: P01 = P10 = odd/2)
  std::array<double, 4> raw_populations{};  // before clipping
  Complex coherence{};                      // rho_{11,00}
  double fidelity = 0.0;
  double concurrence_bound = 0.0;
  bool odd_split_known = true;
};

/// Corrected ZZ populations from all push-out ZZ records (counts pooled).
inline PopulationEstimate pushout_populations(std::span<const MeasurementRecord> records,
                                              RecordKind kind, double phi, const RetentionCalibration& cal,
                                              bool match_phi) {
  std::array<std::uint64_t, 4> pooled{};
  bool any = false;
  for (const auto& r : records)
    if (r.kind == kind && (!match_phi || r.phi == phi)) {
      for (std::size_t k = 0; k < 4; ++k) pooled[k] += r.counts[k];
      any = true;
    }
  if (!any) throw InvalidArgument("no " + to_string(kind) + " record");
  MeasurementRecord merged{kind, phi, pooled};
  return infer_populations(merged.frequencies(), cal);
}

inline double parity_of(const std::array<double, 4>& p) { return p[0] - p[1] - p[2] + p[3]; }

/// Uncoupled fractions (without pi, with pi) of a cavity record: P00 and P11.
inline std::array<double, 2> cavity_even_populations(const MeasurementRecord& r) {
  const double n0 = static_cast<double>(r.counts[0] + r.counts[1]);
  const double n1 = static_cast<double>(r.counts[2] + r.counts[3]);
  if (!(n0 > 0.0) || !(n1 > 0.0)) throw InvalidArgument("cavity record needs shots with and without the pi pulse");
  return {r.counts[0] / n0, r.counts[2] / n1};
}

inline TomographyEstimate estimate_state(std::span<const MeasurementRecord> records,
                                         const RetentionCalibration& cal) {
  if (records.empty()) throw InvalidArgument("no records");
  TomographyEstimate est;
  const bool cavity = is_cavity(records.front().kind);
  for (const auto& r : records)
    if (is_cavity(r.kind) != cavity) throw InvalidArgument("cannot mix cavity and push-out records");

  std::vector<double> phis, parities;
  if (cavity) {
    std::array<std::uint64_t, 4> pooled{};
    bool any = false;
    for (const auto& r : records) {
      if (r.kind == RecordKind::cavity_zz) {
        for (std::size_t k = 0; k < 4; ++k) pooled[k] += r.counts[k];
        any = true;
      } else {
        const auto even = cavity_even_populations(r);
        phis.push_back(r.phi);
        parities.push_back(2.0 * (even[0] + even[1]) - 1.0);
      }
    }
    if (!any) throw InvalidArgument("no cavity_ZZ record");
    const auto even = cavity_even_populations(MeasurementRecord{RecordKind::cavity_zz, 0.0, pooled});
    const double odd = 1.0 - even[0] - even[1];
    est.raw_populations = {even[0], odd / 2.0, odd / 2.0, even[1]};
    est.populations = clip_populations(est.raw_populations);
    est.odd_split_known = false;
  } else {
    const auto zz = pushout_populations(records, RecordKind::pushout_zz, 0.0, cal, false);
    est.raw_populations = zz.raw;
    est.populations = zz.clipped;
    std::vector<std::pair<RecordKind, double>> settings;
    for (const auto& r : records) {
      if (r.kind == RecordKind::pushout_zz) continue;
      const std::pair<RecordKind, double> key{r.kind, r.phi};
      if (std::find(settings.begin(), settings.end(), key) != settings.end()) continue;
      settings.push_back(key);
      // XX and YY are the analysis axes parallel and orthogonal to the coherence phase.
      const double phi = r.kind == RecordKind::pushout_xx ? 0.0
                         : r.kind == RecordKind::pushout_yy ? constants::pi / 2.0
                                                            : r.phi;
      const auto p = pushout_populations(records, r.kind, r.phi, cal, true);
      phis.push_back(phi);
      parities.push_back(parity_of(p.clipped));
    }
  }

  // Two settings: the XX / YY pair aligned with the coherence phase.
  // Three or more distinct angles: full oscillation fit.
  std::vector<double> distinct;
  for (double p : phis) {
    const double m = std::fmod(std::fmod(p, constants::pi) + constants::pi, constants::pi);
    if (std::none_of(distinct.begin(), distinct.end(), [&](double d) { return std::abs(d - m) < 1e-9; }))
      distinct.push_back(m);
  }
  if (distinct.size() >= 3) {
    est.coherence = extract_coherence(phis, parities).rho_11_00;
  } else if (distinct.size() == 2 && std::abs(std::abs(distinct[0] - distinct[1]) - constants::pi / 2.0) < 1e-9) {
    double par = 0.0, orth = 0.0;
    int n_par = 0, n_orth = 0;
    const double ref = std::min(distinct[0], distinct[1]);
    for (std::size_t k = 0; k < phis.size(); ++k) {
      const double m = std::fmod(std::fmod(phis[k], constants::pi) + constants::pi, constants::pi);
      if (std::abs(m - ref) < 1e-9) {
        par += parities[k];
        ++n_par;
      } else {
        orth += parities[k];
        ++n_orth;
      }
    }
    // Pi(ref) - Pi(ref + pi/2) = 4 |rho| cos(2 ref - arg rho): with ref = 0 this
    // is 4 Re rho_{11,00}.
    const double re = two_point_coherence_signed(par / n_par, orth / n_orth);
    est.coherence = std::polar(re, 2.0 * ref);
  } else {
    throw InvalidArgument("need an XX/YY pair or at least three parity angles");
  }

  const auto& p = est.populations;
  est.fidelity = 0.5 * (p[0] + p[3]) + est.coherence.real();
  const double abs_coh = std::abs(est.coherence);
  est.concurrence_bound = est.odd_split_known ? 2.0 * (abs_coh - std::sqrt(p[1] * p[2]))
                                              : concurrence_lower_bound_equal_split(abs_coh, p[1] + p[2]);
  return est;
}

// ---------------------------------------------------------------------------
// Bootstrap

struct Interval {
  double lo = 0.0;
  double hi = 0.0;
};

/// Resampled values of each named quantity, sorted ascending.
struct BootstrapResult {
  std::vector<std::string> names;
  std::vector<std::vector<double>> sorted_samples;

  /// Empirical quantile by linear interpolation between order statistics.
  double quantile(std::size_t q, double p) const {
    const auto& s = sorted_samples.at(q);
    require(!s.empty(), "bootstrap: no samples");
    require(p >= 0.0 && p <= 1.0, "quantile level must lie in [0, 1]");
    const double pos = p * static_cast<double>(s.size() - 1);
    const auto i = static_cast<std::size_t>(std::floor(pos));
    const std::size_t j = std::min(i + 1, s.size() - 1);
    return s[i] + (pos - static_cast<double>(i)) * (s[j] - s[i]);
  }

  /// Central percentile interval at the given coverage.
  Interval interval(std::size_t q, double coverage) const {
    return {quantile(q, 0.5 - coverage / 2.0), quantile(q, 0.5 + coverage / 2.0)};
  }

  std::size_t index_of(const std::string& name) const {
    for (std::size_t k = 0; k < names.size(); ++k)
      if (names[k] == name) return k;
    throw InvalidArgument("bootstrap: unknown quantity " + name);
  }
};

/// Multinomial draw of n trials over the observed frequencies, by sequential
/// conditional binomials.
inline std::array<std::uint64_t, 4> resample_counts(Rng& rng, const std::array<std::uint64_t, 4>& counts) {
  std::array<std::uint64_t, 4> out{};
  std::uint64_t remaining_n = counts[0] + counts[1] + counts[2] + counts[3];
  std::uint64_t remaining_mass = remaining_n;
  for (std::size_t k = 0; k < 3; ++k) {
    if (remaining_mass == 0) break;
    const double p = static_cast<double>(counts[k]) / static_cast<double>(remaining_mass);
    out[k] = binomial(rng, remaining_n, p);
    remaining_n -= out[k];
    remaining_mass -= counts[k];
  }
  out[3] = remaining_n;
  return out;
}

using Estimator = std::function<std::vector<double>(std::span<const MeasurementRecord>)>;

/// Percentile bootstrap: each resample redraws every record multinomially
/// with its own shot number. Resample b uses the seed derive_seed(seed, b).
inline BootstrapResult bootstrap(std::span<const MeasurementRecord> records, const Estimator& estimator,
                                 std::vector<std::string> names, std::size_t n_resamples, std::uint64_t seed) {
  if (records.empty()) throw InvalidArgument("bootstrap: no records");
  require(n_resamples >= 100, "bootstrap: need at least 100 resamples");
  const std::vector<MeasurementRecord> base(records.begin(), records.end());
  auto draws = parallel_map<std::vector<double>>(n_resamples, [&](std::size_t b) {
    Rng rng = make_rng(seed, b);
    std::vector<MeasurementRecord> resampled = base;
    for (auto& r : resampled) r.counts = resample_counts(rng, r.counts);
    return estimator(resampled);
  });
  BootstrapResult out;
  out.names = std::move(names);
  out.sorted_samples.assign(out.names.size(), {});
  for (auto& d : draws) {
    if (d.size() != out.names.size()) throw InvalidArgument("bootstrap: estimator returned the wrong arity");
    for (std::size_t q = 0; q < d.size(); ++q) out.sorted_samples[q].push_back(d[q]);
  }
  for (auto& s : out.sorted_samples) std::sort(s.begin(), s.end());
  return out;
}

inline constexpr double kOneSigmaCoverage = 0.682689492137086;

struct TomographyResult {
  TomographyEstimate estimate;
  std::map<std::string, Interval> intervals;  // 1-SD percentile intervals
  double certification_confidence = 0.99;
  double fidelity_lower = 0.0;     // one-sided lower bound at the certification level
  double concurrence_lower = 0.0;
  std::size_t resamples = 0;

  bool entanglement_certified() const { return fidelity_lower > 0.5 && concurrence_lower > 0.0; }
};

inline std::vector<std::string> tomography_quantities() {
  return {"P00", "P01", "P10", "P11", "coherence_re", "coherence_im", "coherence_abs", "fidelity", "concurrence_bound"};
}

inline std::vector<double> tomography_vector(const TomographyEstimate& e) {
  return {e.populations[0], e.populations[1], e.populations[2], e.populations[3], e.coherence.real(),
          e.coherence.imag(), std::abs(e.coherence), e.fidelity, e.concurrence_bound};
}

inline TomographyResult tomography(std::span<const MeasurementRecord> records, const RetentionCalibration& cal,
                                   std::size_t n_resamples, std::uint64_t seed, double confidence = 0.99) {
  require(confidence > 0.0 && confidence < 1.0, "confidence must lie in (0, 1)");
  TomographyResult res;
  res.estimate = estimate_state(records, cal);
  res.certification_confidence = confidence;
  res.resamples = n_resamples;
  const auto names = tomography_quantities();
  const auto boot = bootstrap(
      records, [&](std::span<const MeasurementRecord> rs) { return tomography_vector(estimate_state(rs, cal)); },
      names, n_resamples, seed);
  const auto point = tomography_vector(res.estimate);
  for (std::size_t q = 0; q < names.size(); ++q) {
    Interval iv = boot.interval(q, kOneSigmaCoverage);
    // Percentile intervals of skewed statistics can miss the point estimate.
    iv.lo = std::min(iv.lo, point[q]);
    iv.hi = std::max(iv.hi, point[q]);
    res.intervals[names[q]] = iv;
  }
  res.fidelity_lower = boot.quantile(boot.index_of("fidelity"), 1.0 - confidence);
  res.concurrence_lower = boot.quantile(boot.index_of("concurrence_bound"), 1.0 - confidence);
  return res;
}

inline KeyValueDocument to_document(const TomographyResult& r) {
  KeyValueDocument d;
  const auto names = tomography_quantities();
  const auto point = tomography_vector(r.estimate);
  for (std::size_t k = 0; k < 4; ++k) d.set(names[k] + "_raw", r.estimate.raw_populations[k]);
  for (std::size_t q = 0; q < names.size(); ++q) {
    d.set(names[q], point[q]);
    d.set(names[q] + "_lo", r.intervals.at(names[q]).lo);
    d.set(names[q] + "_hi", r.intervals.at(names[q]).hi);
  }
  d.set("odd_split_measured", r.estimate.odd_split_known);
  d.set("bootstrap_resamples", static_cast<std::uint64_t>(r.resamples));
  d.set("certification_confidence", r.certification_confidence);
  d.set("fidelity_lower_bound", r.fidelity_lower);
  d.set("concurrence_lower_bound", r.concurrence_lower);
  d.set("entanglement_certified", r.entanglement_certified());
  return d;
}

// ---------------------------------------------------------------------------
// Cavity threshold fidelity

struct ThresholdFidelity {
  std::array<double, 4> fidelity{};
  std::array<Interval, 4> interval{};  // from threshold - 1 .. threshold + 1
  /// (F_00 + mean of the coupled-state fidelities) / 2.
  double balanced = 0.0;
};

/// Photon-count histograms, one per true basis state (index = count).
inline ThresholdFidelity threshold_fidelity(const std::array<std::vector<std::uint64_t>, 4>& histograms,
                                            std::uint64_t threshold, bool coupled_at_or_above = true) {
  auto fid = [&](std::size_t state, std::uint64_t t) {
    const auto& h = histograms[state];
    std::uint64_t total = 0, above = 0;
    for (std::size_t n = 0; n < h.size(); ++n) {
      total += h[n];
      if (n >= t) above += h[n];
    }
    if (total == 0) throw InvalidArgument("threshold_fidelity: empty histogram");
    const double frac_above = static_cast<double>(above) / static_cast<double>(total);
    const double coupled = coupled_at_or_above ? frac_above : 1.0 - frac_above;
    return state == 0 ? 1.0 - coupled : coupled;
  };
  ThresholdFidelity out;
  for (std::size_t s = 0; s < 4; ++s) {
    out.fidelity[s] = fid(s, threshold);
    const double a = fid(s, threshold == 0 ? 0 : threshold - 1);
    const double b = fid(s, threshold + 1);
    out.interval[s] = {std::min({a, b, out.fidelity[s]}), std::max({a, b, out.fidelity[s]})};
  }
  out.balanced = 0.5 * (out.fidelity[0] + (out.fidelity[1] + out.fidelity[2] + out.fidelity[3]) / 3.0);
  return out;
}

/// Histograms of simulated cavity readout shots for each basis state.
inline std::array<std::vector<std::uint64_t>, 4> simulate_count_histograms(const ReadoutModel& model,
                                                                          const std::array<double, 4>& reflectivities,
                                                                          std::size_t shots, std::uint64_t seed) {
  std::array<std::vector<std::uint64_t>, 4> hist;
  for (Basis b : kAllBasis) {
    const auto counts = parallel_map<std::uint64_t>(shots, [&](std::size_t i) {
      Rng rng = make_rng(derive_seed(seed, static_cast<std::uint64_t>(index(b))), i);
      return simulate_cavity_readout(b, model, reflectivities, rng).count;
    });
    auto& h = hist[static_cast<std::size_t>(index(b))];
    for (auto c : counts) {
      if (c >= h.size()) h.resize(c + 1, 0);
      ++h[c];
    }
  }
  return hist;
}

}  // namespace carvesim
