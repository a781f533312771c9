#ifndef COOPCCM_RELAYS_HPP
#define COOPCCM_RELAYS_HPP

#include <vector>

#include "coopccm/chanest.hpp"
#include "coopccm/common.hpp"
#include "coopccm/receiver.hpp"

namespace coopccm {

/// Phase/time bookkeeping: phase 1 is the source transmission, phase j+1
/// is relay j.  Global symbol index of within-packet index i (1-based) in
/// phase j is m_j(i) = (j-1)P + i.
struct PhaseSchedule {
  int n_r = 0;
  int packet_len = 0;

  int n_phases() const { return n_r + 1; }
  int global_index(int phase, int i) const {
    if (phase < 1 || phase > n_phases() || i < 1 || i > packet_len) {
      throw std::invalid_argument("PhaseSchedule: index out of range");
    }
    return (phase - 1) * packet_len + i;
  }
};

/// Decoded symbol streams, one per (relay, user).
struct RelayedSymbols {
  // streams[relay][user][i]
  std::vector<std::vector<VecC>> streams;
};

/// Diagonal of the per-user symbol matrix B_k for one symbol index:
/// source symbol first, then the relay decisions in relay order.
VecC build_symbol_diagonal(cxd source_symbol, const std::vector<cxd>& relayed);

/// Diagonal of the group symbol matrix B_S: the per-user diagonals of the
/// group members, concatenated in group order.
VecC build_group_symbol_diagonal(const std::vector<VecC>& member_diagonals);

/// Concatenates the per-phase windows of one symbol index into the
/// (n_r+1)M destination observation, source first.
VecC stack_destination(const VecC& window_sd,
                       const std::vector<VecC>& windows_rd);

/// Splits a stacked destination window back into per-phase segments.
std::vector<VecC> unstack_destination(const VecC& stacked, int n_phases);

/// One decode-and-forward relay: a shared inverse-covariance tracker, and
/// a blind channel estimator plus CCM-RLS receiver per user, all on the
/// M-dimensional source->relay observation.
class Relay {
 public:
  Relay(const std::vector<MatC>& signatures, double alpha, double nu,
        int p_exponent, double delta = 100.0, double pmat_init = 0.01);

  /// Processes one received window: adapts every user's estimator and
  /// receiver, returns the K slicer decisions.
  std::vector<cxd> step(const VecC& r_window);

  const VecC& channel_estimate(int user) const {
    return estimators_[user].estimate();
  }
  const CcmRlsReceiver& receiver(int user) const { return receivers_[user]; }

 private:
  std::vector<MatC> signatures_;
  InverseCovarianceTracker rinv_;
  std::vector<BlindChannelEstimator> estimators_;
  std::vector<CcmRlsReceiver> receivers_;
  std::vector<PhaseTracker> phase_;
};

/// Runs a bank of relay receivers over a whole packet of windows.
/// streams[user] holds the P decisions of that user.
std::vector<VecC> relay_decode(Relay& relay, const std::vector<VecC>& windows);

}  // namespace coopccm

#endif
