#include "coopccm/chanest.hpp"

#include <cmath>

namespace coopccm {

InverseCovarianceTracker::InverseCovarianceTracker(int dim, double alpha,
                                                   double delta,
                                                   int p_exponent)
    : alpha_(alpha), p_(p_exponent) {
  if (dim < 1) throw std::invalid_argument("InverseCovarianceTracker: dim");
  if (delta <= 0.0) {
    throw std::invalid_argument("InverseCovarianceTracker: delta");
  }
  if (p_ != 1 && p_ != 2) {
    throw std::invalid_argument("InverseCovarianceTracker: p must be 1 or 2");
  }
  pmat_ = MatC::Identity(dim, dim) / delta;
}

void InverseCovarianceTracker::update(const VecC& r) {
  if (r.size() != pmat_.rows()) {
    throw std::invalid_argument("InverseCovarianceTracker: dim mismatch");
  }
  // Sherman-Morrison for R <- alpha R + r r^H
  const VecC pr = pmat_ * r;
  const double denom = alpha_ + (r.dot(pr)).real();
  pmat_.noalias() -= (pr * pr.adjoint()) / denom;
  pmat_ /= alpha_;
  pmat_ = ((pmat_ + pmat_.adjoint()) * 0.5).eval();
}

MatC InverseCovarianceTracker::inverse_pow() const {
  if (p_ == 1) return pmat_;
  return pmat_ * pmat_;
}

UpsilonTracker::UpsilonTracker(int n_phases, int taps_per_link, double alpha)
    : n_p_(n_phases), taps_(taps_per_link), alpha_(alpha) {
  if (n_phases < 1 || taps_per_link < 1) {
    throw std::invalid_argument("UpsilonTracker: bad dimensions");
  }
  ups_ = MatC::Zero(n_p_ * taps_, n_p_ * taps_);
}

void UpsilonTracker::update(const MatC& C, const VecR& amps,
                            const VecC& phase_symbols, const MatC& rinv_p) {
  const Eigen::Index M = C.rows();
  if (C.cols() != taps_ || amps.size() != n_p_ ||
      phase_symbols.size() != n_p_ || rinv_p.rows() != n_p_ * M ||
      rinv_p.cols() != n_p_ * M) {
    throw std::invalid_argument("UpsilonTracker: dimension mismatch");
  }
  ups_ *= alpha_;
  for (int j = 0; j < n_p_; ++j) {
    for (int l = 0; l < n_p_; ++l) {
      const cxd scale =
          std::conj(amps[j] * phase_symbols[j]) * (amps[l] * phase_symbols[l]);
      ups_.block(j * taps_, l * taps_, taps_, taps_).noalias() +=
          scale * (C.adjoint() * rinv_p.block(j * M, l * M, M, M) * C);
    }
  }
  ups_ = ((ups_ + ups_.adjoint()) * 0.5).eval();
}

VecC power_method_step(const VecC& h_hat, const MatC& ups) {
  if (h_hat.size() != ups.rows()) {
    throw std::invalid_argument("power_method_step: dimension mismatch");
  }
  const double tr = ups.trace().real();
  if (!(tr > 0.0) || !std::isfinite(tr)) {
    throw numeric_degenerate_error("power_method_step: non-positive trace");
  }
  VecC h = h_hat - (ups * h_hat) / tr;
  const double norm = h.norm();
  if (!(norm > 0.0) || !std::isfinite(norm)) {
    throw numeric_degenerate_error("power_method_step: degenerate iterate");
  }
  return h / norm;
}

VecC batch_channel_estimate(const MatC& ups, double hermitian_tol) {
  if ((ups - ups.adjoint()).cwiseAbs().maxCoeff() >
      hermitian_tol * (1.0 + ups.cwiseAbs().maxCoeff())) {
    throw std::invalid_argument("batch_channel_estimate: not Hermitian");
  }
  Eigen::SelfAdjointEigenSolver<MatC> eig(ups);
  VecC h = eig.eigenvectors().col(0);  // eigenvalues sorted ascending
  return h / h.norm();
}

BlindChannelEstimator::BlindChannelEstimator(int n_phases, int taps_per_link,
                                             double alpha)
    : ups_(n_phases, taps_per_link, alpha) {
  h_hat_ = VecC::Zero(n_phases * taps_per_link);
  h_hat_[0] = 1.0;
}

void BlindChannelEstimator::update(const MatC& C, const VecR& amps,
                                   const VecC& phase_symbols,
                                   const MatC& rinv_p) {
  ups_.update(C, amps, phase_symbols, rinv_p);
  try {
    // Several inner iterations per symbol: each step contracts toward the
    // current minimal eigenvector only slowly (the shift 1/tr is dominated
    // by the large eigenvalues), and the iteration cost is quadratic in the
    // small channel dimension, so extra steps remove tracking lag almost
    // for free.
    for (int it = 0; it < kPowerStepsPerUpdate; ++it) {
      h_hat_ = power_method_step(h_hat_, ups_.matrix());
    }
  } catch (const numeric_degenerate_error&) {
    h_hat_.setZero();
    h_hat_[0] = 1.0;
  }
}

}  // namespace coopccm
