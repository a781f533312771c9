#ifndef COOPCCM_SPREADING_HPP
#define COOPCCM_SPREADING_HPP

#include <vector>

#include "coopccm/common.hpp"

namespace coopccm {

/// Unit-norm binary spreading sequence, chips in {+1/sqrt(N), -1/sqrt(N)}.
struct SpreadingCode {
  VecR chips;
  int user_id = 0;

  int length() const { return static_cast<int>(chips.size()); }
};

SpreadingCode random_code(std::mt19937_64& rng, int n_chips, int user_id);

/// Link power bookkeeping under the equal-nominal-power convention:
/// the group shares P_G = G * nominal, out-of-group users keep their own
/// (log-normal) budgets, and the network total is
/// P_T = P_G + (K - G) * mean(P_{A,k}).
struct PowerBudget {
  VecR per_user_power;  // P_{A,k}, linear scale
  double group_power = 0.0;
  double total = 0.0;
  double noise_variance = 1.0;

  double snr_linear(int user) const {
    return per_user_power[user] / noise_variance;
  }
};

PowerBudget make_power_budget(const VecR& per_user_power, int G,
                              double nominal_power, double noise_variance);

/// M x L banded signature matrix, M = N + L - 1.  Column c holds the code
/// shifted down by c positions, zeros elsewhere.
MatC build_signature_matrix(const SpreadingCode& code, int L);

/// Block-diagonal stack of n_r + 1 copies of the single-link signature
/// matrix, one block per transmission phase.
MatC build_stacked_signature(const MatC& C, int n_r);

/// p = Cs * h, the code convolved with the (stacked) channel.
VecC effective_signature(const MatC& Cs, const VecC& h);

/// L complex Gaussian taps shaped by a random power delay profile and
/// normalized to unit Euclidean norm.
VecC generate_multipath_channel(std::mt19937_64& rng, int L);

/// One chip-rate observation window of length M for symbol index i
/// (0-based) of a link with single-symbol response s = C * h.  Includes the
/// intersymbol leakage from symbols i-1 and i+1 present in the stream;
/// packet edges have no leakage from outside the packet.
VecC link_window(const VecC& s, const VecC& symbols, int i, int n_chips);

/// Full packet of received windows for one link: spreads the symbols into
/// a chip stream, convolves with the channel at chip rate, windows at
/// symbol boundaries and adds complex Gaussian noise of variance sigma2
/// per sample.  Pass sigma2 = 0 for the noise-free component of a
/// multiuser superposition.
std::vector<VecC> synthesize_link_windows(const VecC& symbols, const MatC& C,
                                          const VecC& h, double amp,
                                          double sigma2, std::mt19937_64& rng);

}  // namespace coopccm

#endif
