#include <doctest.h>

#include "coopccm/relays.hpp"
#include "coopccm/spreading.hpp"
#include "oracles.hpp"

#include <algorithm>

using namespace coopccm;

TEST_CASE("phase schedule index map") {
  PhaseSchedule ps{2, 500};
  CHECK(ps.n_phases() == 3);
  CHECK(ps.global_index(1, 1) == 1);
  CHECK(ps.global_index(3, 500) == 1500);
  CHECK(ps.global_index(2, 1) == 501);

  // ranges are disjoint and cover 1..n_p*P
  std::vector<char> seen(ps.n_phases() * ps.packet_len + 1, 0);
  for (int j = 1; j <= ps.n_phases(); ++j) {
    for (int i = 1; i <= ps.packet_len; ++i) {
      const int m = ps.global_index(j, i);
      CHECK(!seen[m]);
      seen[m] = 1;
    }
  }
  CHECK(std::count(seen.begin() + 1, seen.end(), 0) == 0);
  CHECK_THROWS_AS(ps.global_index(0, 1), std::invalid_argument);
  CHECK_THROWS_AS(ps.global_index(1, 501), std::invalid_argument);
}

TEST_CASE("symbol diagonals") {
  const cxd b = qpsk_point(false, false);
  const VecC d0 = build_symbol_diagonal(b, {});
  REQUIRE(d0.size() == 1);
  CHECK(d0[0] == b);

  const VecC d2 = build_symbol_diagonal(b, {b, b});
  REQUIRE(d2.size() == 3);
  for (int i = 0; i < 3; ++i) CHECK(d2[i] == b);

  // perfect decode-and-forward repeats the source symbol
  const cxd s = qpsk_point(true, false);
  const VecC perfect = build_symbol_diagonal(s, {s, s});
  CHECK((perfect.array() == s).all());

  const VecC g = build_group_symbol_diagonal({d2, perfect});
  REQUIRE(g.size() == 6);
  CHECK((g.head(3) - d2).norm() == 0.0);
  CHECK((g.tail(3) - perfect).norm() == 0.0);
  CHECK_THROWS_AS(build_group_symbol_diagonal({}), std::invalid_argument);
}

TEST_CASE("stacking and unstacking") {
  std::mt19937_64 rng(1);
  const VecC sd = oracle::random_cvec(rng, 20);

  const VecC same = stack_destination(sd, {});
  CHECK((same - sd).norm() == 0.0);

  const VecC r1 = oracle::random_cvec(rng, 20);
  const VecC r2 = oracle::random_cvec(rng, 20);
  const VecC stacked = stack_destination(sd, {r1, r2});
  REQUIRE(stacked.size() == 60);
  CHECK((stacked.segment(0, 20) - sd).norm() == 0.0);
  CHECK((stacked.segment(20, 20) - r1).norm() == 0.0);
  CHECK((stacked.segment(40, 20) - r2).norm() == 0.0);

  const auto parts = unstack_destination(stacked, 3);
  REQUIRE(parts.size() == 3);
  CHECK((parts[0] - sd).norm() == 0.0);
  CHECK((parts[1] - r1).norm() == 0.0);
  CHECK((parts[2] - r2).norm() == 0.0);

  CHECK_THROWS_AS(stack_destination(sd, {oracle::random_cvec(rng, 19)}),
                  std::invalid_argument);
  CHECK_THROWS_AS(unstack_destination(stacked, 7), std::invalid_argument);
}

TEST_CASE("perfect-relay flat-channel stacked window") {
  // sigma^2 = 0, L = 1, K = 1: each phase segment is amplitude * symbol *
  // code exactly
  std::mt19937_64 rng(2);
  const int N = 8;
  const SpreadingCode code = random_code(rng, N, 0);
  const MatC C = build_signature_matrix(code, 1);
  VecC h(1);
  h << 1.0;
  const cxd b = qpsk_point(true, true);
  VecC sym(1);
  sym << b;
  const double a_sd = 1.5, a_r1 = 0.8, a_r2 = 1.1;
  const VecC w_sd = synthesize_link_windows(sym, C, h, a_sd, 0.0, rng)[0];
  const VecC w_r1 = synthesize_link_windows(sym, C, h, a_r1, 0.0, rng)[0];
  const VecC w_r2 = synthesize_link_windows(sym, C, h, a_r2, 0.0, rng)[0];
  const VecC stacked = stack_destination(w_sd, {w_r1, w_r2});
  const double amps[3] = {a_sd, a_r1, a_r2};
  for (int j = 0; j < 3; ++j) {
    for (int n = 0; n < N; ++n) {
      CHECK(std::abs(stacked[j * N + n] - amps[j] * b * code.chips[n]) <
            1e-14);
    }
  }
}

TEST_CASE("stacked window matches the per-phase decomposition") {
  // noise-free, perfect relays, one multipath user: every phase segment
  // equals the desired term plus the explicit ISI of that link
  std::mt19937_64 rng(3);
  const int N = 6, L = 3, P = 4, n_r = 2;
  const SpreadingCode code = random_code(rng, N, 0);
  const MatC C = build_signature_matrix(code, L);
  std::uniform_int_distribution<int> quad(0, 3);
  VecC b(P);
  for (int i = 0; i < P; ++i) {
    const int q = quad(rng);
    b[i] = qpsk_point(q & 1, (q >> 1) & 1);
  }
  std::vector<VecC> h(n_r + 1);
  std::vector<std::vector<VecC>> phase_windows(n_r + 1);
  VecR amps(n_r + 1);
  amps << 1.2, 0.9, 1.4;
  for (int j = 0; j <= n_r; ++j) {
    h[j] = generate_multipath_channel(rng, L);
    phase_windows[j] = synthesize_link_windows(b, C, h[j], amps[j], 0.0, rng);
  }
  for (int i = 0; i < P; ++i) {
    const VecC stacked = stack_destination(
        phase_windows[0][i], {phase_windows[1][i], phase_windows[2][i]});
    for (int j = 0; j <= n_r; ++j) {
      const auto dec = oracle::decompose_window(C, h[j], b, i);
      const VecC seg = stacked.segment(j * (N + L - 1), N + L - 1);
      CHECK((seg - amps[j] * (dec.desired + dec.eta)).cwiseAbs().maxCoeff() <
            1e-10);
    }
  }
}

namespace {

VecC qpsk_packet(std::mt19937_64& rng, int P) {
  std::uniform_int_distribution<int> q(0, 3);
  VecC b(P);
  for (int i = 0; i < P; ++i) {
    const int v = q(rng);
    b[i] = qpsk_point(v & 1, (v >> 1) & 1);
  }
  return b;
}

// best-of-four QPSK rotation symbol error count (metric-only resolution of
// the blind phase ambiguity)
long derotated_errors(const VecC& truth, const VecC& detected, int from) {
  static const cxd rot[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  long best = detected.size() + 1;
  for (const cxd r : rot) {
    long err = 0;
    for (int i = from; i < truth.size(); ++i) {
      if (std::abs(r * detected[i] - truth[i]) > 1e-9) ++err;
    }
    best = std::min(best, err);
  }
  return best;
}

}  // namespace

TEST_CASE("relay decodes a clean single user") {
  std::mt19937_64 rng(4);
  const int N = 8, P = 60;
  const SpreadingCode code = random_code(rng, N, 0);
  const MatC C = build_signature_matrix(code, 1);
  VecC h(1);
  h << 1.0;
  const VecC b = qpsk_packet(rng, P);
  const auto windows = synthesize_link_windows(b, C, h, 2.0, 0.0, rng);

  Relay relay({C}, 0.998, 1.0, 1);
  const auto streams = relay_decode(relay, windows);
  REQUIRE(streams.size() == 1);
  REQUIRE(streams[0].size() == P);
  // noiseless flat channel: the matched initialization already decodes,
  // up to the blind rotation
  CHECK(derotated_errors(b, streams[0], 0) == 0);
}

TEST_CASE("relay symbol error rate settles below 5 percent") {
  // four users, 15 dB, multipath; median trailing-half SER over 20 seeds
  const int seeds = 20, N = 16, L = 5, K = 4, P = 1000;
  const double power = std::pow(10.0, 1.5);
  std::vector<double> ser(seeds);
  for (int sd = 0; sd < seeds; ++sd) {
    std::mt19937_64 rng = make_stream(77, sd);
    std::vector<SpreadingCode> codes;
    std::vector<MatC> C;
    std::vector<VecC> s;
    std::vector<VecC> b;
    for (int k = 0; k < K; ++k) {
      codes.push_back(random_code(rng, N, k));
      C.push_back(build_signature_matrix(codes[k], L));
      s.push_back(C[k] * generate_multipath_channel(rng, L));
      b.push_back(qpsk_packet(rng, P));
    }
    std::vector<VecC> windows(P);
    for (int i = 0; i < P; ++i) {
      VecC r = VecC::Zero(N + L - 1);
      for (int k = 0; k < K; ++k) {
        r += std::sqrt(power) * link_window(s[k], b[k], i, N);
      }
      r += complex_awgn(rng, N + L - 1, 1.0);
      windows[i] = r;
    }
    Relay relay(C, 0.998, 1.0, 1);
    const auto streams = relay_decode(relay, windows);
    ser[sd] =
        static_cast<double>(derotated_errors(b[0], streams[0], P / 2)) /
        (P / 2);
  }
  std::sort(ser.begin(), ser.end());
  const double median = 0.5 * (ser[seeds / 2 - 1] + ser[seeds / 2]);
  CHECK(median < 0.05);
}
