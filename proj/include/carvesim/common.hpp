#pragma once

// Shared plumbing: physical constants, error types, deterministic seeding and
// an order-preserving parallel map used by every Monte Carlo routine.

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <mutex>
#include <numbers>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace carvesim {

using Complex = std::complex<double>;

namespace constants {
inline constexpr double pi = std::numbers::pi;
inline constexpr double two_pi = 2.0 * std::numbers::pi;
inline constexpr double hbar = 1.054571817e-34;   // J s
inline constexpr double planck = 6.62607015e-34;  // J s
inline constexpr double k_B = 1.380649e-23;       // J / K
inline constexpr double amu = 1.66053906660e-27;  // kg
inline constexpr double rb87_mass = 86.909180527 * amu;
}  // namespace constants

namespace units {
/// 2*pi * f, with f given in MHz.
constexpr double mhz_to_rad(double f_mhz) { return constants::two_pi * f_mhz * 1e6; }
constexpr double khz_to_rad(double f_khz) { return constants::two_pi * f_khz * 1e3; }
/// Energy of h * f for f in MHz (trap depths quoted as light shifts).
constexpr double energy_from_mhz(double f_mhz) { return constants::planck * f_mhz * 1e6; }
/// Energy of k_B * T for T in mK.
constexpr double energy_from_mk(double t_mk) { return constants::k_B * t_mk * 1e-3; }
constexpr double energy_to_kelvin(double e) { return e / constants::k_B; }
}  // namespace units

/// Base class for every error raised by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A precondition or configuration value is out of its allowed domain.
class InvalidArgument : public Error {
 public:
  using Error::Error;
};

/// Unknown keys, unreadable files, malformed records.
class ConfigError : public Error {
 public:
  using Error::Error;
};

/// The mathematics has no answer: singular matrices, a herald that can never
/// fire, a pole of the reflection amplitude.
class NumericError : public Error {
 public:
  using Error::Error;
};

inline void require(bool ok, const std::string& what) {
  if (!ok) throw InvalidArgument(what);
}

/// SplitMix64 finaliser. Used to derive independent per-sample seeds from a
/// master seed so results never depend on how samples are split across workers.
constexpr std::uint64_t mix_seed(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t index) {
  return mix_seed(mix_seed(master) ^ mix_seed(index + 0x632be59bd9b4e019ULL));
}

/// Named sub-streams (e.g. "one seed for the in-situ branch, one for transport").
constexpr std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream, std::uint64_t index) {
  return derive_seed(derive_seed(master, stream), index);
}

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t master, std::uint64_t index) { return Rng(derive_seed(master, index)); }

// The draws below are written out instead of using <random> distributions,
// whose algorithms differ between standard libraries.

/// Uniform on (0, 1).
inline double uniform01(Rng& rng) {
  return (static_cast<double>(rng() >> 11) + 0.5) * 0x1.0p-53;
}

/// Standard normal by Box-Muller (one variate per call).
inline double standard_normal(Rng& rng) {
  const double u1 = uniform01(rng);
  const double u2 = uniform01(rng);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(constants::two_pi * u2);
}

/// Exponential with unit mean.
inline double standard_exponential(Rng& rng) { return -std::log(uniform01(rng)); }

namespace detail {
inline unsigned& worker_setting() {
  static unsigned workers = 0;
  return workers;
}
}  // namespace detail

/// Number of threads used by parallel_map; 0 selects hardware_concurrency.
/// Results are identical for every setting.
inline void set_worker_count(unsigned n) { detail::worker_setting() = n; }

inline unsigned worker_count() {
  unsigned n = detail::worker_setting();
  if (n == 0) n = std::max(1u, std::thread::hardware_concurrency());
  return n;
}

/// Evaluates fn(i) for i in [0, n) and returns the results in index order.
/// fn must only depend on i (derive its RNG from the index), which makes the
/// output independent of the worker count.
template <class T, class Fn>
std::vector<T> parallel_map(std::size_t n, Fn&& fn) {
  std::vector<T> out(n);
  const std::size_t workers = std::min<std::size_t>(worker_count(), std::max<std::size_t>(n, 1));
  if (workers <= 1) {
    for (std::size_t i = 0; i < n; ++i) out[i] = fn(i);
    return out;
  }
  std::vector<std::thread> pool;
  pool.reserve(workers);
  std::exception_ptr failure;
  std::mutex failure_mutex;
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (std::size_t i = w; i < n; i += workers) out[i] = fn(i);
      } catch (...) {
        std::lock_guard lock(failure_mutex);
        if (!failure) failure = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  if (failure) std::rethrow_exception(failure);
  return out;
}

/// Uniform grid with `count` points on [lo, hi] (both ends included).
inline std::vector<double> linspace(double lo, double hi, std::size_t count) {
  std::vector<double> out(count);
  if (count == 1) {
    out[0] = lo;
    return out;
  }
  for (std::size_t i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1);
  return out;
}

/// Binomial(n, p) as a sum of Bernoulli draws; shot counts here stay in the
/// thousands.
inline std::uint64_t binomial(Rng& rng, std::uint64_t n, double p) {
  if (n == 0 || p <= 0.0) return 0;
  if (p >= 1.0) return n;
  std::uint64_t k = 0;
  for (std::uint64_t i = 0; i < n; ++i)
    if (uniform01(rng) < p) ++k;
  return k;
}

/// Index drawn from a discrete distribution given by non-negative weights.
template <class Weights>
std::size_t categorical(Rng& rng, const Weights& w) {
  double total = 0.0;
  for (double x : w) total += x;
  double u = uniform01(rng) * total;
  std::size_t last = 0;
  for (std::size_t i = 0; i < std::size(w); ++i) {
    if (w[i] <= 0.0) continue;
    last = i;
    if (u < w[i]) return i;
    u -= w[i];
  }
  return last;
}

/// Poisson variate by CDF inversion of a single uniform. Sharing the uniform
/// across calls with different means couples the draws monotonically.
inline std::uint64_t poisson_from_uniform(double mean, double u) {
  require(mean >= 0.0 && std::isfinite(mean), "poisson mean must be finite and >= 0");
  if (mean == 0.0) return 0;
  // log-space recursion keeps large means finite
  double log_p = -mean;
  double cdf = std::exp(log_p);
  std::uint64_t k = 0;
  while (u > cdf) {
    ++k;
    log_p += std::log(mean) - std::log(static_cast<double>(k));
    const double p = std::exp(log_p);
    cdf += p;
    if (p < 1e-300 && static_cast<double>(k) > mean) break;
  }
  return k;
}

}  // namespace carvesim
