#ifndef COOPCCM_ALLOCATION_HPP
#define COOPCCM_ALLOCATION_HPP

#include <vector>

#include "coopccm/common.hpp"

namespace coopccm {

/// Indices of the G users with the largest selection metric, ordered by
/// descending metric; ties resolve to the lower user index.
std::vector<int> select_group(const VecR& rake_magnitudes, int G);

/// (n_r+1)M x G(n_r+1) group signature matrix: column (g, j) carries the
/// j-th M-segment of group member g's stacked effective signature at
/// block j, zeros elsewhere.
MatC build_group_signature_matrix(const std::vector<VecC>& group_signatures,
                                  int seg_len);

/// v = B_S^H P_S^H w, the allocation regressor.  b_diag is the diagonal
/// of B_S (detected symbol per group member per phase).
VecC build_regressor(const VecC& b_diag, const MatC& P_S, const VecC& w);

struct AllocationResult {
  VecC a;
  bool degenerate = false;  // zero cross-correlation fallback
};

/// Batch allocation a = (R_S + lambda I)^-1 d_S, rescaled so that
/// ||a||^2 = P_G.  A zero d_S yields the equal-power allocation with the
/// degenerate flag set.
AllocationResult allocation_closed_form(const MatC& R_S, const VecC& d_S,
                                        double lambda, double P_G);

/// Equal split of an out-of-group user's power budget across its links.
VecR out_of_group_allocation(double P_Ak, int n_r);

/// Exponentially weighted recursion for the group allocation with
/// effective regressor z v:
///   d_S  <- alpha d_S + z v
///   Pmat <- rank-1 inverse update for alpha Pmat^-1 + |z|^2 v v^H
///   a     = Pmat d_S, then a <- sqrt(P_G) a / ||a||
class AllocationRls {
 public:
  AllocationRls(int dim, double alpha, double P_G, double pmat_init = 0.01);

  /// One step; returns the normalized allocation.  Non-finite state
  /// resets to the equal-power allocation.
  const VecC& update(const VecC& v, cxd z);

  const VecC& allocation() const { return a_; }
  const MatC& pmat() const { return pmat_; }
  const VecC& dvec() const { return d_s_; }
  double group_power() const { return p_g_; }

  void reset();

 private:
  MatC pmat_;
  VecC d_s_;
  VecC a_;
  double alpha_;
  double p_g_;
  double pmat_init_;
};

}  // namespace coopccm

#endif
