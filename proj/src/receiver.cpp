#include "coopccm/receiver.hpp"

#include <cmath>

namespace coopccm {

namespace {

MatC regularized_inverse(const MatC& R) {
  const Eigen::Index D = R.rows();
  Eigen::LDLT<MatC> ldlt(R);
  const double tr = R.trace().real();
  const double floor = tr / static_cast<double>(D) * 1e-12;
  bool degenerate = ldlt.info() != Eigen::Success;
  if (!degenerate) {
    const auto dvec = ldlt.vectorD();
    degenerate = !(dvec.real().minCoeff() > floor);
  }
  if (degenerate) {
    // near-singular: small diagonal loading before the solve
    MatC loaded = R + (1e-8 * tr / static_cast<double>(D)) *
                          MatC::Identity(D, D);
    ldlt.compute(loaded);
    if (ldlt.info() != Eigen::Success) {
      throw numeric_degenerate_error("ccm_filter: singular correlation");
    }
  }
  return ldlt.solve(MatC::Identity(D, D));
}

}  // namespace

VecC ccm_filter_from_inverse(const MatC& rinv, const VecC& d,
                             const VecC& p_hat, double nu) {
  if (rinv.rows() != d.size() || d.size() != p_hat.size()) {
    throw std::invalid_argument("ccm_filter: dimension mismatch");
  }
  if (p_hat.norm() == 0.0) {
    throw std::invalid_argument("ccm_filter: zero signature");
  }
  const VecC rinv_d = rinv * d;
  const VecC rinv_p = rinv * p_hat;
  const double gamma = p_hat.dot(rinv_p).real();
  if (!(gamma > 0.0) || !std::isfinite(gamma)) {
    throw numeric_degenerate_error("ccm_filter: degenerate gamma");
  }
  const cxd excess = p_hat.dot(rinv_d) - cxd(nu, 0.0);
  return rinv_d - rinv_p * (excess / gamma);
}

VecC ccm_filter_closed_form(const MatC& R, const VecC& d, const VecC& p_hat,
                            double nu) {
  return ccm_filter_from_inverse(regularized_inverse(R), d, p_hat, nu);
}

CcmRlsReceiver::CcmRlsReceiver(int dim, double alpha, double nu,
                               double pmat_init)
    : alpha_(alpha), nu_(nu), pmat_init_(pmat_init) {
  if (dim < 1) throw std::invalid_argument("CcmRlsReceiver: dim");
  pmat_ = pmat_init_ * MatC::Identity(dim, dim);
  d_hat_ = VecC::Zero(dim);
  w_ = VecC::Zero(dim);
}

void CcmRlsReceiver::set_signature(const VecC& p_hat) {
  if (p_hat.size() != pmat_.rows()) {
    throw std::invalid_argument("CcmRlsReceiver: signature dimension");
  }
  p_hat_ = p_hat;
  if (!have_signature_) {
    const double pn2 = p_hat_.squaredNorm();
    if (pn2 > 0.0) w_ = p_hat_ * (nu_ / pn2);
    have_signature_ = true;
  }
}

CcmRlsReceiver::StepResult CcmRlsReceiver::update(const VecC& r) {
  if (!have_signature_) {
    throw std::logic_error("CcmRlsReceiver: signature not set");
  }
  if (r.size() != pmat_.rows()) {
    throw std::invalid_argument("CcmRlsReceiver: window dimension");
  }
  const cxd z = w_.dot(r);
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) {
    throw numeric_degenerate_error("CcmRlsReceiver: diverged");
  }
  d_hat_ = alpha_ * d_hat_ + std::conj(z) * r;
  // inverse update for R <- alpha R + |z|^2 r r^H, regressor x = z r
  const VecC x = z * r;
  const VecC px = pmat_ * x;
  const double denom = alpha_ + x.dot(px).real();
  pmat_.noalias() -= (px * px.adjoint()) / denom;
  pmat_ /= alpha_;
  pmat_ = ((pmat_ + pmat_.adjoint()) * 0.5).eval();
  w_ = ccm_filter_from_inverse(pmat_, d_hat_, p_hat_, nu_);
  return {z, qpsk_slice(z)};
}

cxd CcmRlsReceiver::detect(const VecC& r) const {
  return qpsk_slice(w_.dot(r));
}

void CcmRlsReceiver::reset() {
  const Eigen::Index dim = pmat_.rows();
  pmat_ = pmat_init_ * MatC::Identity(dim, dim);
  d_hat_.setZero();
  if (have_signature_) {
    const double pn2 = p_hat_.squaredNorm();
    w_ = pn2 > 0.0 ? VecC(p_hat_ * (nu_ / pn2)) : VecC(VecC::Zero(dim));
  } else {
    w_.setZero();
  }
}

VecC mmse_genie_filter(const std::vector<MatC>& stacked_signatures,
                       const std::vector<VecC>& stacked_channels,
                       const std::vector<VecR>& amplitudes, double sigma2,
                       int desired_user, int n_chips) {
  const size_t K = stacked_signatures.size();
  if (K == 0 || stacked_channels.size() != K || amplitudes.size() != K) {
    throw std::invalid_argument("mmse_genie_filter: scenario size");
  }
  if (desired_user < 0 || desired_user >= static_cast<int>(K)) {
    throw std::invalid_argument("mmse_genie_filter: desired user");
  }
  const Eigen::Index D = stacked_signatures[0].rows();
  const int n_p = static_cast<int>(amplitudes[0].size());
  const int M = static_cast<int>(D) / n_p;
  const int L = M - n_chips + 1;

  MatC R = MatC::Zero(D, D);
  VecC q_desired;
  for (size_t k = 0; k < K; ++k) {
    const VecC p = stacked_signatures[k] * stacked_channels[k];
    VecC q = VecC::Zero(D);
    VecC leak_prev = VecC::Zero(D);
    VecC leak_next = VecC::Zero(D);
    for (int j = 0; j < n_p; ++j) {
      const double a = amplitudes[k][j];
      q.segment(j * M, M) = a * p.segment(j * M, M);
      if (L > 1) {
        leak_prev.segment(j * M, L - 1) =
            a * p.segment(j * M + n_chips, L - 1);
        leak_next.segment(j * M + n_chips, L - 1) =
            a * p.segment(j * M, L - 1);
      }
    }
    R.noalias() += q * q.adjoint();
    R.noalias() += leak_prev * leak_prev.adjoint();
    R.noalias() += leak_next * leak_next.adjoint();
    if (static_cast<int>(k) == desired_user) q_desired = q;
  }
  R += sigma2 * MatC::Identity(D, D);
  return regularized_inverse(R) * q_desired;
}

}  // namespace coopccm
