#ifndef COOPCCM_RECEIVER_HPP
#define COOPCCM_RECEIVER_HPP

#include <vector>

#include "coopccm/common.hpp"

namespace coopccm {

/// QPSK hard decision; zero components tie-break to +.
inline cxd qpsk_slice(cxd z) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw std::invalid_argument("qpsk_slice: non-finite input");
  }
  return {z.real() < 0.0 ? -kInvSqrt2 : kInvSqrt2,
          z.imag() < 0.0 ? -kInvSqrt2 : kInvSqrt2};
}

/// Matched-filter (RAKE) soft output p_hat^H r.
inline cxd rake_output(const VecC& p_hat, const VecC& r) {
  if (p_hat.size() != r.size()) {
    throw std::invalid_argument("rake_output: dimension mismatch");
  }
  return p_hat.dot(r);
}

/// Closed-form constrained filter
///   w = R^-1 (d - p gamma^-1 (p^H R^-1 d - nu)),  gamma = p^H R^-1 p,
/// satisfying w^H p = nu.  Near-singular R gets a small diagonal loading
/// before the solve.
VecC ccm_filter_closed_form(const MatC& R, const VecC& d, const VecC& p_hat,
                            double nu);

/// Same computation with a tracked inverse in place of R^-1.
VecC ccm_filter_from_inverse(const MatC& rinv, const VecC& d,
                             const VecC& p_hat, double nu);

/// Blind constant-modulus receiver with the code/channel constraint
/// w^H p_hat = nu, adapted by an exponentially weighted recursion with
/// effective regressor z[i] r[i]:
///   z      = w[i-1]^H r
///   d_hat <- alpha d_hat + conj(z) r
///   Pmat  <- rank-1 inverse update for alpha Pmat^-1 + |z|^2 r r^H
///   w      = Pmat-based constrained solve
class CcmRlsReceiver {
 public:
  CcmRlsReceiver(int dim, double alpha, double nu = 1.0,
                 double pmat_init = 0.01);

  /// Current effective-signature estimate used by the constraint.  The
  /// first call also initializes w to the scaled RAKE p nu / ||p||^2.
  void set_signature(const VecC& p_hat);

  struct StepResult {
    cxd z;
    cxd detected;
  };

  /// One adaptation step; emits the soft output and the slicer decision.
  /// Throws numeric_degenerate_error on divergence; call reset() then.
  StepResult update(const VecC& r);

  /// Filter application plus slicer, no state change.
  cxd detect(const VecC& r) const;

  void reset();

  const VecC& filter() const { return w_; }
  const MatC& pmat() const { return pmat_; }
  const VecC& dvec() const { return d_hat_; }
  double nu() const { return nu_; }
  int dim() const { return static_cast<int>(w_.size()); }

 private:
  MatC pmat_;
  VecC d_hat_;
  VecC w_;
  VecC p_hat_;
  double alpha_;
  double nu_;
  double pmat_init_;
  bool have_signature_ = false;
};

/// Decision-directed first-order phase loop.  The constant-modulus cost and
/// the blind channel estimate leave the soft output rotated by an arbitrary
/// angle; tracking arg(z e^{-j phi} conj(Q(z e^{-j phi}))) locks the
/// residual rotation to a multiple of 90 degrees, which the slicer grid
/// tolerates.  The loop never sees transmitted data.
class PhaseTracker {
 public:
  explicit PhaseTracker(double step_size = 0.1) : mu_(step_size) {
    if (!(step_size > 0.0) || !(step_size < 1.0)) {
      throw std::invalid_argument("PhaseTracker: step size must be in (0,1)");
    }
  }

  /// z rotated into the tracked frame.
  cxd derotate(cxd z) const { return z * std::polar(1.0, -phi_); }

  /// Derotate, slice, and advance the loop; returns the hard decision.
  cxd step(cxd z) {
    const cxd zd = derotate(z);
    const cxd dec = qpsk_slice(zd);
    if (std::abs(zd) > 1e-12) phi_ += mu_ * std::arg(zd * std::conj(dec));
    return dec;
  }

  double phase() const { return phi_; }
  void reset() { phi_ = 0.0; }

 private:
  double mu_;
  double phi_ = 0.0;
};

/// Clairvoyant linear MMSE reference filter for the desired user, built
/// from the true stacked signatures, channels and amplitudes under the
/// perfect-relay model, including the intersymbol leakage terms the
/// synthesis produces.  n_chips locates the leakage support inside each
/// phase segment.
VecC mmse_genie_filter(const std::vector<MatC>& stacked_signatures,
                       const std::vector<VecC>& stacked_channels,
                       const std::vector<VecR>& amplitudes, double sigma2,
                       int desired_user, int n_chips);

}  // namespace coopccm

#endif
