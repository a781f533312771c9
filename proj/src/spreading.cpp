#include "coopccm/spreading.hpp"

#include <cmath>

namespace coopccm {

SpreadingCode random_code(std::mt19937_64& rng, int n_chips, int user_id) {
  if (n_chips < 1) throw std::invalid_argument("random_code: n_chips < 1");
  SpreadingCode code;
  code.user_id = user_id;
  code.chips.resize(n_chips);
  const double scale = 1.0 / std::sqrt(static_cast<double>(n_chips));
  std::uniform_int_distribution<int> bit(0, 1);
  for (int i = 0; i < n_chips; ++i) {
    code.chips[i] = bit(rng) ? scale : -scale;
  }
  return code;
}

PowerBudget make_power_budget(const VecR& per_user_power, int G,
                              double nominal_power, double noise_variance) {
  const int K = static_cast<int>(per_user_power.size());
  if (G < 1 || G > K) throw std::invalid_argument("make_power_budget: G");
  if (!(noise_variance > 0.0)) {
    throw std::invalid_argument("make_power_budget: noise variance");
  }
  PowerBudget b;
  b.per_user_power = per_user_power;
  b.group_power = G * nominal_power;
  b.total = b.group_power + (K - G) * per_user_power.mean();
  b.noise_variance = noise_variance;
  return b;
}

MatC build_signature_matrix(const SpreadingCode& code, int L) {
  const int N = code.length();
  if (L < 1) throw std::invalid_argument("build_signature_matrix: L < 1");
  if (N < 1) throw std::invalid_argument("build_signature_matrix: empty code");
  const int M = N + L - 1;
  MatC C = MatC::Zero(M, L);
  for (int c = 0; c < L; ++c) {
    for (int n = 0; n < N; ++n) {
      C(n + c, c) = code.chips[n];
    }
  }
  return C;
}

MatC build_stacked_signature(const MatC& C, int n_r) {
  if (n_r < 0) throw std::invalid_argument("build_stacked_signature: n_r < 0");
  const Eigen::Index M = C.rows();
  const Eigen::Index L = C.cols();
  const Eigen::Index n_p = n_r + 1;
  MatC Cs = MatC::Zero(n_p * M, n_p * L);
  for (Eigen::Index j = 0; j < n_p; ++j) {
    Cs.block(j * M, j * L, M, L) = C;
  }
  return Cs;
}

VecC effective_signature(const MatC& Cs, const VecC& h) {
  if (h.size() != Cs.cols()) {
    throw std::invalid_argument("effective_signature: dimension mismatch");
  }
  return Cs * h;
}

VecC generate_multipath_channel(std::mt19937_64& rng, int L) {
  if (L < 1) throw std::invalid_argument("generate_multipath_channel: L < 1");
  std::normal_distribution<double> g(0.0, kInvSqrt2);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  VecC h(L);
  for (int l = 0; l < L; ++l) {
    // random power delay profile weight on a unit-variance complex gain
    const double profile = std::sqrt(u(rng));
    h[l] = profile * cxd(g(rng), g(rng));
  }
  const double norm = h.norm();
  if (norm == 0.0) {
    h.setZero();
    h[0] = 1.0;
    return h;
  }
  return h / norm;
}

VecC link_window(const VecC& s, const VecC& symbols, int i, int n_chips) {
  const int M = static_cast<int>(s.size());
  const int L = M - n_chips + 1;
  const int P = static_cast<int>(symbols.size());
  if (i < 0 || i >= P) throw std::invalid_argument("link_window: bad index");
  VecC w = s * symbols[i];
  if (L > 1) {
    if (i > 0) {
      // tail of the previous symbol's response leaks into the window head
      w.head(L - 1) += symbols[i - 1] * s.tail(L - 1);
    }
    if (i + 1 < P) {
      // head of the next symbol's response leaks into the window tail
      w.tail(L - 1) += symbols[i + 1] * s.head(L - 1);
    }
  }
  return w;
}

std::vector<VecC> synthesize_link_windows(const VecC& symbols, const MatC& C,
                                          const VecC& h, double amp,
                                          double sigma2,
                                          std::mt19937_64& rng) {
  const int M = static_cast<int>(C.rows());
  const int L = static_cast<int>(C.cols());
  const int N = M - L + 1;
  const int P = static_cast<int>(symbols.size());
  if (h.size() != L) {
    throw std::invalid_argument("synthesize_link_windows: channel length");
  }
  for (int i = 0; i < P; ++i) {
    if (!is_qpsk_symbol(symbols[i])) {
      throw std::invalid_argument(
          "synthesize_link_windows: symbol off the QPSK grid");
    }
  }
  // Spread to a chip stream and convolve with the channel at chip rate.
  // Column 0 of C is the code itself.
  VecC chips = VecC::Zero(P * N);
  for (int i = 0; i < P; ++i) {
    chips.segment(i * N, N) += symbols[i] * C.col(0).head(N);
  }
  VecC stream = VecC::Zero(P * N + L - 1);
  for (int n = 0; n < P * N; ++n) {
    for (int l = 0; l < L; ++l) {
      stream[n + l] += chips[n] * h[l];
    }
  }
  std::vector<VecC> windows;
  windows.reserve(P);
  for (int i = 0; i < P; ++i) {
    VecC w = amp * stream.segment(i * N, M);
    if (sigma2 > 0.0) w += complex_awgn(rng, M, sigma2);
    windows.push_back(std::move(w));
  }
  return windows;
}

}  // namespace coopccm
