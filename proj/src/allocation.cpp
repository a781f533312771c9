#include "coopccm/allocation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace coopccm {

std::vector<int> select_group(const VecR& rake_magnitudes, int G) {
  const int K = static_cast<int>(rake_magnitudes.size());
  if (G < 1 || G > K) throw std::invalid_argument("select_group: bad G");
  std::vector<int> order(K);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int a, int b) {
    return rake_magnitudes[a] > rake_magnitudes[b];
  });
  order.resize(G);
  return order;
}

MatC build_group_signature_matrix(const std::vector<VecC>& group_signatures,
                                  int seg_len) {
  if (group_signatures.empty()) {
    throw std::invalid_argument("build_group_signature_matrix: empty group");
  }
  const Eigen::Index D = group_signatures[0].size();
  if (seg_len < 1 || D % seg_len != 0) {
    throw std::invalid_argument("build_group_signature_matrix: segment size");
  }
  const int n_p = static_cast<int>(D) / seg_len;
  const int G = static_cast<int>(group_signatures.size());
  MatC P_S = MatC::Zero(D, static_cast<Eigen::Index>(G) * n_p);
  for (int g = 0; g < G; ++g) {
    if (group_signatures[g].size() != D) {
      throw std::invalid_argument("build_group_signature_matrix: mixed dims");
    }
    for (int j = 0; j < n_p; ++j) {
      P_S.col(g * n_p + j).segment(j * seg_len, seg_len) =
          group_signatures[g].segment(j * seg_len, seg_len);
    }
  }
  return P_S;
}

VecC build_regressor(const VecC& b_diag, const MatC& P_S, const VecC& w) {
  if (P_S.rows() != w.size() || P_S.cols() != b_diag.size()) {
    throw std::invalid_argument("build_regressor: dimension mismatch");
  }
  return b_diag.conjugate().cwiseProduct(P_S.adjoint() * w);
}

AllocationResult allocation_closed_form(const MatC& R_S, const VecC& d_S,
                                        double lambda, double P_G) {
  const Eigen::Index dim = d_S.size();
  if (R_S.rows() != dim || R_S.cols() != dim) {
    throw std::invalid_argument("allocation_closed_form: dimension mismatch");
  }
  if (lambda < 0.0) {
    throw std::invalid_argument("allocation_closed_form: negative lambda");
  }
  AllocationResult out;
  if (d_S.norm() == 0.0) {
    out.a = VecC::Constant(dim, std::sqrt(P_G / static_cast<double>(dim)));
    out.degenerate = true;
    return out;
  }
  const MatC sys = R_S + lambda * MatC::Identity(dim, dim);
  Eigen::LDLT<MatC> ldlt(sys);
  VecC a = ldlt.solve(d_S);
  const double norm = a.norm();
  if (ldlt.info() != Eigen::Success || !(norm > 0.0) ||
      !std::isfinite(norm)) {
    throw numeric_degenerate_error("allocation_closed_form: singular system");
  }
  out.a = a * (std::sqrt(P_G) / norm);
  return out;
}

VecR out_of_group_allocation(double P_Ak, int n_r) {
  if (!(P_Ak > 0.0)) {
    throw std::invalid_argument("out_of_group_allocation: power");
  }
  const int n_p = n_r + 1;
  return VecR::Constant(n_p, std::sqrt(P_Ak / n_p));
}

AllocationRls::AllocationRls(int dim, double alpha, double P_G,
                             double pmat_init)
    : alpha_(alpha), p_g_(P_G), pmat_init_(pmat_init) {
  if (dim < 1) throw std::invalid_argument("AllocationRls: dim");
  if (!(P_G > 0.0)) throw std::invalid_argument("AllocationRls: P_G");
  pmat_ = pmat_init_ * MatC::Identity(dim, dim);
  d_s_ = VecC::Zero(dim);
  a_ = VecC::Constant(dim, std::sqrt(p_g_ / dim));
}

const VecC& AllocationRls::update(const VecC& v, cxd z) {
  if (v.size() != d_s_.size()) {
    throw std::invalid_argument("AllocationRls: regressor dimension");
  }
  d_s_ = alpha_ * d_s_ + z * v;
  const VecC x = z * v;
  const VecC px = pmat_ * x;
  const double denom = alpha_ + x.dot(px).real();
  pmat_.noalias() -= (px * px.adjoint()) / denom;
  pmat_ /= alpha_;
  pmat_ = ((pmat_ + pmat_.adjoint()) * 0.5).eval();
  VecC a = pmat_ * d_s_;
  const double norm = a.norm();
  if (!std::isfinite(norm) || !std::isfinite(pmat_.cwiseAbs().sum())) {
    reset();
    throw numeric_degenerate_error("AllocationRls: diverged");
  }
  if (norm > 0.0) {
    a_ = a * (std::sqrt(p_g_) / norm);
  }
  return a_;
}

void AllocationRls::reset() {
  const Eigen::Index dim = d_s_.size();
  pmat_ = pmat_init_ * MatC::Identity(dim, dim);
  d_s_.setZero();
  a_ = VecC::Constant(dim, std::sqrt(p_g_ / dim));
}

}  // namespace coopccm
