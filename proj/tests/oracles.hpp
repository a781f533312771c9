// Test-only reference implementations, independent of the library's
// computation paths: naive dense products, explicit received-window
// decomposition, dense inverses and KKT solves.
#ifndef COOPCCM_TESTS_ORACLES_HPP
#define COOPCCM_TESTS_ORACLES_HPP

#include <random>
#include <vector>

#include "coopccm/common.hpp"

namespace coopccm::oracle {

inline VecC random_cvec(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> g(0.0, scale);
  VecC v(n);
  for (int i = 0; i < n; ++i) v[i] = cxd(g(rng), g(rng));
  return v;
}

inline MatC random_cmat(std::mt19937_64& rng, int rows, int cols) {
  std::normal_distribution<double> g(0.0, 1.0);
  MatC m(rows, cols);
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) m(r, c) = cxd(g(rng), g(rng));
  }
  return m;
}

inline MatC random_hpd(std::mt19937_64& rng, int n, double loading = 0.5) {
  const MatC a = random_cmat(rng, n, n);
  return a * a.adjoint() + loading * MatC::Identity(n, n);
}

// element-by-element triple loop, no Eigen product kernels
inline VecC naive_matvec(const MatC& m, const VecC& v) {
  VecC out = VecC::Zero(m.rows());
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out[r] += m(r, c) * v[c];
  }
  return out;
}

inline MatC naive_matmul(const MatC& a, const MatC& b) {
  MatC out = MatC::Zero(a.rows(), b.cols());
  for (Eigen::Index r = 0; r < a.rows(); ++r) {
    for (Eigen::Index c = 0; c < b.cols(); ++c) {
      for (Eigen::Index k = 0; k < a.cols(); ++k) {
        out(r, c) += a(r, k) * b(k, c);
      }
    }
  }
  return out;
}

inline cxd naive_inner(const VecC& a, const VecC& b) {
  cxd s = 0.0;
  for (Eigen::Index i = 0; i < a.size(); ++i) s += std::conj(a[i]) * b[i];
  return s;
}

/// Explicit single-link window decomposition: the desired term C h b[i]
/// plus the intersymbol leakage eta assembled term by term from the
/// neighbor symbols' shifted responses.
struct WindowDecomposition {
  VecC desired;
  VecC eta;
};

inline WindowDecomposition decompose_window(const MatC& C, const VecC& h,
                                            const VecC& symbols, int i) {
  const int M = static_cast<int>(C.rows());
  const int L = static_cast<int>(C.cols());
  const int N = M - L + 1;
  const int P = static_cast<int>(symbols.size());
  const VecC s = naive_matvec(C, h);
  WindowDecomposition d;
  d.desired = s * symbols[i];
  d.eta = VecC::Zero(M);
  if (i > 0) {
    for (int p = 0; p <= L - 2; ++p) d.eta[p] += symbols[i - 1] * s[p + N];
  }
  if (i + 1 < P) {
    for (int p = N; p < M; ++p) d.eta[p] += symbols[i + 1] * s[p - N];
  }
  return d;
}

/// Equality-constrained quadratic solve via the dense KKT system:
/// minimize w^H R w - 2 Re(w^H d) subject to p^H w = nu.
inline VecC kkt_constrained_solve(const MatC& R, const VecC& d, const VecC& p,
                                  double nu) {
  const Eigen::Index n = d.size();
  MatC kkt = MatC::Zero(n + 1, n + 1);
  kkt.topLeftCorner(n, n) = R;
  kkt.block(0, n, n, 1) = p;
  kkt.block(n, 0, 1, n) = p.adjoint();
  VecC rhs = VecC::Zero(n + 1);
  rhs.head(n) = d;
  rhs[n] = cxd(nu, 0.0);
  const VecC sol = kkt.fullPivLu().solve(rhs);
  return sol.head(n);
}

/// Smallest-eigenvalue eigenvector through a full eigendecomposition.
inline VecC smallest_eigenvector(const MatC& hermitian) {
  Eigen::SelfAdjointEigenSolver<MatC> eig(hermitian);
  return eig.eigenvectors().col(0);
}

/// Angle between one-dimensional subspaces (phase-invariant).
inline double subspace_angle(const VecC& a, const VecC& b) {
  const double c = std::abs(naive_inner(a, b)) / (a.norm() * b.norm());
  return std::acos(std::min(1.0, c));
}

}  // namespace coopccm::oracle

#endif
