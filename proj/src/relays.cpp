#include "coopccm/relays.hpp"

namespace coopccm {

VecC build_symbol_diagonal(cxd source_symbol,
                           const std::vector<cxd>& relayed) {
  VecC d(static_cast<Eigen::Index>(relayed.size()) + 1);
  d[0] = source_symbol;
  for (size_t j = 0; j < relayed.size(); ++j) d[j + 1] = relayed[j];
  return d;
}

VecC build_group_symbol_diagonal(const std::vector<VecC>& member_diagonals) {
  if (member_diagonals.empty()) {
    throw std::invalid_argument("build_group_symbol_diagonal: empty group");
  }
  Eigen::Index total = 0;
  for (const auto& d : member_diagonals) total += d.size();
  VecC out(total);
  Eigen::Index at = 0;
  for (const auto& d : member_diagonals) {
    out.segment(at, d.size()) = d;
    at += d.size();
  }
  return out;
}

VecC stack_destination(const VecC& window_sd,
                       const std::vector<VecC>& windows_rd) {
  const Eigen::Index M = window_sd.size();
  for (const auto& w : windows_rd) {
    if (w.size() != M) {
      throw std::invalid_argument("stack_destination: length mismatch");
    }
  }
  VecC out((static_cast<Eigen::Index>(windows_rd.size()) + 1) * M);
  out.head(M) = window_sd;
  for (size_t j = 0; j < windows_rd.size(); ++j) {
    out.segment((j + 1) * M, M) = windows_rd[j];
  }
  return out;
}

std::vector<VecC> unstack_destination(const VecC& stacked, int n_phases) {
  if (n_phases < 1 || stacked.size() % n_phases != 0) {
    throw std::invalid_argument("unstack_destination: bad phase count");
  }
  const Eigen::Index M = stacked.size() / n_phases;
  std::vector<VecC> out;
  out.reserve(n_phases);
  for (int j = 0; j < n_phases; ++j) out.push_back(stacked.segment(j * M, M));
  return out;
}

Relay::Relay(const std::vector<MatC>& signatures, double alpha, double nu,
             int p_exponent, double delta, double pmat_init)
    : signatures_(signatures),
      rinv_(static_cast<int>(signatures.at(0).rows()), alpha, delta,
            p_exponent) {
  const int M = static_cast<int>(signatures_[0].rows());
  const int L = static_cast<int>(signatures_[0].cols());
  estimators_.reserve(signatures_.size());
  receivers_.reserve(signatures_.size());
  for (size_t k = 0; k < signatures_.size(); ++k) {
    if (signatures_[k].rows() != M || signatures_[k].cols() != L) {
      throw std::invalid_argument("Relay: mixed signature dimensions");
    }
    estimators_.emplace_back(1, L, alpha);
    receivers_.emplace_back(M, alpha, nu, pmat_init);
    receivers_.back().set_signature(signatures_[k] *
                                    estimators_.back().estimate());
    phase_.emplace_back();
  }
}

std::vector<cxd> Relay::step(const VecC& r_window) {
  rinv_.update(r_window);
  const MatC rp = rinv_.inverse_pow();
  // single-link estimators: amplitude and symbol scalars cancel in the
  // normalized power-method step
  const VecR unit_amp = VecR::Ones(1);
  const VecC unit_sym = VecC::Ones(1);
  std::vector<cxd> decisions(receivers_.size());
  for (size_t k = 0; k < receivers_.size(); ++k) {
    estimators_[k].update(signatures_[k], unit_amp, unit_sym, rp);
    receivers_[k].set_signature(signatures_[k] * estimators_[k].estimate());
    cxd z;
    try {
      z = receivers_[k].update(r_window).z;
    } catch (const numeric_degenerate_error&) {
      receivers_[k].reset();
      z = receivers_[k].filter().dot(r_window);
    }
    // the blind receiver leaves an arbitrary rotation on z; lock it to the
    // slicer grid before forwarding
    decisions[k] = phase_[k].step(z);
  }
  return decisions;
}

std::vector<VecC> relay_decode(Relay& relay,
                               const std::vector<VecC>& windows) {
  if (windows.empty()) return {};
  const int P = static_cast<int>(windows.size());
  std::vector<cxd> first = relay.step(windows[0]);
  const int K = static_cast<int>(first.size());
  std::vector<VecC> streams(K, VecC(P));
  for (int k = 0; k < K; ++k) streams[k][0] = first[k];
  for (int i = 1; i < P; ++i) {
    const std::vector<cxd> dec = relay.step(windows[i]);
    for (int k = 0; k < K; ++k) streams[k][i] = dec[k];
  }
  return streams;
}

}  // namespace coopccm
