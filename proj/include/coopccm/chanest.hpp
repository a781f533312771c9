#ifndef COOPCCM_CHANEST_HPP
#define COOPCCM_CHANEST_HPP

#include "coopccm/common.hpp"

namespace coopccm {

/// Tracks the inverse of the exponentially weighted sample covariance
/// R[i] = alpha * R[i-1] + r[i] r[i]^H, R[0] = delta * I, through the
/// matrix inversion lemma.  The tracked matrix is re-Hermitianized after
/// every rank-1 update.
class InverseCovarianceTracker {
 public:
  InverseCovarianceTracker(int dim, double alpha, double delta = 100.0,
                           int p_exponent = 1);

  void update(const VecC& r);

  const MatC& inverse() const { return pmat_; }

  /// R^{-p}; p = 2 squares the tracked inverse.
  MatC inverse_pow() const;

  int dim() const { return static_cast<int>(pmat_.rows()); }
  int p_exponent() const { return p_; }

 private:
  MatC pmat_;
  double alpha_;
  int p_;
};

/// Exponentially weighted accumulator for the channel-estimation matrix
/// Upsilon = sum alpha^(i-l) C~^H B~^H A~^H R^{-p} A~ B~ C~, where A~ and
/// B~ are the per-phase amplitude and symbol expansions and C~ is the
/// stacked signature.  Exploits the block-diagonal structure: block (j,l)
/// of the increment is conj(a_j b_j) a_l b_l C^H Rp_{jl} C.
class UpsilonTracker {
 public:
  UpsilonTracker(int n_phases, int taps_per_link, double alpha);

  /// amps and phase_symbols are the diagonal generators of A~ and B~,
  /// one entry per transmission phase.
  void update(const MatC& C, const VecR& amps, const VecC& phase_symbols,
              const MatC& rinv_p);

  const MatC& matrix() const { return ups_; }
  int n_phases() const { return n_p_; }

 private:
  MatC ups_;
  int n_p_;
  int taps_;
  double alpha_;
};

/// One shifted power-method iteration towards the eigenvector of the
/// smallest eigenvalue: h <- (I - Upsilon / tr(Upsilon)) h, renormalized.
/// Throws numeric_degenerate_error when the trace is non-positive or not
/// finite; the caller resets the estimate.
VecC power_method_step(const VecC& h_hat, const MatC& ups);

/// Unit-norm eigenvector of the smallest eigenvalue (batch oracle and
/// cold-start option).  Degenerate spectra resolve to the first
/// eigenvector reported by the solver.
VecC batch_channel_estimate(const MatC& ups, double hermitian_tol = 1e-8);

/// Shifted power-method iterations applied per estimator update; the
/// iteration is quadratic in the channel dimension, so a short burst per
/// symbol tracks the smallest eigenvector with negligible lag.
inline constexpr int kPowerStepsPerUpdate = 12;

/// Per-(user, link) blind channel estimator: Upsilon accumulation plus a
/// burst of power-method steps per update, with the unit-norm estimate
/// held across updates.  Starts from e_1.
class BlindChannelEstimator {
 public:
  BlindChannelEstimator(int n_phases, int taps_per_link, double alpha);

  void update(const MatC& C, const VecR& amps, const VecC& phase_symbols,
              const MatC& rinv_p);

  const VecC& estimate() const { return h_hat_; }
  const UpsilonTracker& upsilon() const { return ups_; }

 private:
  UpsilonTracker ups_;
  VecC h_hat_;
};

}  // namespace coopccm

#endif
