#ifndef COOPCCM_COMMON_HPP
#define COOPCCM_COMMON_HPP

#include <Eigen/Dense>
#include <complex>
#include <cstdint>
#include <random>
#include <stdexcept>
#include <string>

namespace coopccm {

using cxd = std::complex<double>;
using VecC = Eigen::VectorXcd;
using VecR = Eigen::VectorXd;
using MatC = Eigen::MatrixXcd;
using MatR = Eigen::MatrixXd;

/// Raised when a tracked quantity leaves the numerically usable range
/// (non-finite soft output, singular system, non-positive trace).  Callers
/// are expected to reset the offending state.
class numeric_degenerate_error : public std::runtime_error {
 public:
  explicit numeric_degenerate_error(const std::string& what)
      : std::runtime_error(what) {}
};

inline constexpr double kInvSqrt2 = 0.70710678118654752440;

/// QPSK point for a bit pair, Gray mapped: b0 -> sign of real part,
/// b1 -> sign of imaginary part.
inline cxd qpsk_point(bool b0, bool b1) {
  return {b0 ? -kInvSqrt2 : kInvSqrt2, b1 ? -kInvSqrt2 : kInvSqrt2};
}

inline bool is_qpsk_symbol(cxd s, double tol = 1e-9) {
  return std::abs(std::abs(s.real()) - kInvSqrt2) <= tol &&
         std::abs(std::abs(s.imag()) - kInvSqrt2) <= tol;
}

/// Bit pair of a QPSK grid point (inverse of qpsk_point).
inline std::pair<bool, bool> qpsk_bits(cxd s) {
  return {s.real() < 0.0, s.imag() < 0.0};
}

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

/// Independent deterministic RNG stream derived from a master seed.
/// Streams with distinct ids are decorrelated regardless of thread
/// scheduling, which keeps multi-threaded runs reproducible.
inline std::mt19937_64 make_stream(std::uint64_t master_seed,
                                   std::uint64_t stream_id) {
  std::seed_seq seq{splitmix64(master_seed),
                    splitmix64(master_seed ^ (stream_id + 1)),
                    splitmix64(stream_id)};
  return std::mt19937_64(seq);
}

/// Circularly symmetric complex Gaussian vector with total variance
/// sigma2 per sample (sigma2/2 per real dimension).
inline VecC complex_awgn(std::mt19937_64& rng, Eigen::Index n, double sigma2) {
  VecC v(n);
  std::normal_distribution<double> g(0.0, std::sqrt(sigma2 / 2.0));
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = g(rng);
    const double im = g(rng);
    v[i] = cxd(re, im);
  }
  return v;
}

}  // namespace coopccm

#endif
