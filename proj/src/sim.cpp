#include "coopccm/sim.hpp"

#include <algorithm>
#include <atomic>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "coopccm/allocation.hpp"
#include "coopccm/chanest.hpp"
#include "coopccm/receiver.hpp"
#include "coopccm/relays.hpp"

namespace coopccm {

std::string scheme_name(Scheme s) {
  switch (s) {
    case Scheme::BJPAIS_GBC: return "BJPAIS_GBC";
    case Scheme::BCIS: return "BCIS";
    case Scheme::BNCIS: return "BNCIS";
    case Scheme::MMSE_GENIE: return "MMSE_GENIE";
  }
  return "?";
}

Scheme scheme_from_name(const std::string& name) {
  std::string n;
  for (char c : name) {
    n += (c == '-') ? '_' : static_cast<char>(std::toupper(
                                static_cast<unsigned char>(c)));
  }
  if (n == "BJPAIS_GBC") return Scheme::BJPAIS_GBC;
  if (n == "BCIS") return Scheme::BCIS;
  if (n == "BNCIS") return Scheme::BNCIS;
  if (n == "MMSE_GENIE") return Scheme::MMSE_GENIE;
  throw config_error("scheme", "unknown scheme '" + name + "'");
}

void SimConfig::validate() const {
  if (K < 1) throw config_error("K", "must be >= 1");
  if (N < 1) throw config_error("N", "must be >= 1");
  if (L < 1) throw config_error("L", "must be >= 1");
  if (n_r < 0) throw config_error("n_r", "must be >= 0");
  if (G < 1 || G > K) throw config_error("G", "must satisfy 1 <= G <= K");
  if (P < 1) throw config_error("P", "must be >= 1");
  if (packets < 1) throw config_error("packets", "must be >= 1");
  if (snr_db.empty()) throw config_error("snr_db", "must not be empty");
  if (!(alpha > 0.9) || !(alpha <= 1.0)) {
    throw config_error("alpha", "must lie in (0.9, 1]");
  }
  if (p_exponent != 1 && p_exponent != 2) {
    throw config_error("p_exponent", "must be 1 or 2");
  }
  if (!(lambda_k >= 0.0)) throw config_error("lambda_k", "must be >= 0");
  if (!(nu > 0.0)) throw config_error("nu", "must be > 0");
  if (iterations_per_symbol != 1 && iterations_per_symbol != 2) {
    throw config_error("iterations_per_symbol", "must be 1 or 2");
  }
  if (!(lognormal_std_db >= 0.0)) {
    throw config_error("lognormal_std_db", "must be >= 0");
  }
  for (int k : k_sweep) {
    if (k < 1) throw config_error("k_sweep", "user counts must be >= 1");
  }
}

namespace {

std::string trim(const std::string& s) {
  size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

long parse_long(const std::string& key, const std::string& s) {
  try {
    size_t used = 0;
    long v = std::stol(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw config_error(key, "not an integer: '" + s + "'");
  }
}

double parse_dbl(const std::string& key, const std::string& s) {
  try {
    size_t used = 0;
    double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("");
    return v;
  } catch (const std::exception&) {
    throw config_error(key, "not a number: '" + s + "'");
  }
}

}  // namespace

SimConfig parse_config(const std::string& text) {
  std::map<std::string, std::vector<std::string>> kv;
  std::string current_key;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (size_t h = line.find('#'); h != std::string::npos) line.resize(h);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[') continue;  // section headers are cosmetic
    std::istringstream frags(line);
    std::string frag;
    while (std::getline(frags, frag, ',')) {
      frag = trim(frag);
      if (frag.empty()) continue;
      size_t eq = frag.find('=');
      if (eq != std::string::npos) {
        current_key = trim(frag.substr(0, eq));
        if (current_key.empty()) {
          throw config_error("<config>", "missing key before '='");
        }
        kv[current_key] = {trim(frag.substr(eq + 1))};
      } else {
        if (current_key.empty()) {
          throw config_error("<config>", "value '" + frag + "' without key");
        }
        kv[current_key].push_back(frag);
      }
    }
  }

  SimConfig cfg;
  for (const auto& [key, vals] : kv) {
    auto single = [&]() -> const std::string& {
      if (vals.size() != 1) {
        throw config_error(key, "expected a single value");
      }
      return vals[0];
    };
    if (key == "K") cfg.K = static_cast<int>(parse_long(key, single()));
    else if (key == "N") cfg.N = static_cast<int>(parse_long(key, single()));
    else if (key == "L") cfg.L = static_cast<int>(parse_long(key, single()));
    else if (key == "n_r") cfg.n_r = static_cast<int>(parse_long(key, single()));
    else if (key == "G") cfg.G = static_cast<int>(parse_long(key, single()));
    else if (key == "P") cfg.P = static_cast<int>(parse_long(key, single()));
    else if (key == "packets") cfg.packets = static_cast<int>(parse_long(key, single()));
    else if (key == "alpha") cfg.alpha = parse_dbl(key, single());
    else if (key == "p_exponent") cfg.p_exponent = static_cast<int>(parse_long(key, single()));
    else if (key == "lambda_k") cfg.lambda_k = parse_dbl(key, single());
    else if (key == "nu") cfg.nu = parse_dbl(key, single());
    else if (key == "iterations_per_symbol") cfg.iterations_per_symbol = static_cast<int>(parse_long(key, single()));
    else if (key == "scheme") cfg.scheme = scheme_from_name(single());
    else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(parse_long(key, single()));
    else if (key == "lognormal_std_db") cfg.lognormal_std_db = parse_dbl(key, single());
    else if (key == "snr_db") {
      cfg.snr_db.clear();
      for (const auto& v : vals) cfg.snr_db.push_back(parse_dbl(key, v));
    } else if (key == "k_sweep") {
      cfg.k_sweep.clear();
      for (const auto& v : vals) {
        cfg.k_sweep.push_back(static_cast<int>(parse_long(key, v)));
      }
    } else {
      throw config_error(key, "unknown configuration key");
    }
  }
  cfg.validate();
  return cfg;
}

namespace detail {
namespace {

VecC stacked_effective_signature(const MatC& C, const VecC& h_stacked,
                                 int n_p) {
  const Eigen::Index M = C.rows();
  const Eigen::Index L = C.cols();
  VecC p(n_p * M);
  for (int j = 0; j < n_p; ++j) {
    p.segment(j * M, M).noalias() = C * h_stacked.segment(j * L, L);
  }
  return p;
}

/// Signature as the receiver sees it: each phase segment scaled by that
/// link's transmit amplitude, so the constraint direction matches the
/// desired component of the received vector even under unequal allocation.
VecC weighted_effective_signature(const MatC& C, const VecC& h_stacked,
                                  const VecR& amps) {
  const Eigen::Index M = C.rows();
  const Eigen::Index L = C.cols();
  const int n_p = static_cast<int>(amps.size());
  VecC p(n_p * M);
  for (int j = 0; j < n_p; ++j) {
    p.segment(j * M, M).noalias() =
        amps[j] * (C * h_stacked.segment(j * L, L));
  }
  return p;
}

VecC random_qpsk_packet(std::mt19937_64& rng, int P) {
  std::uniform_int_distribution<int> quad(0, 3);
  VecC b(P);
  for (int i = 0; i < P; ++i) {
    const int q = quad(rng);
    b[i] = qpsk_point(q & 1, (q >> 1) & 1);
  }
  return b;
}

int bit_diff(cxd a, cxd b) {
  const auto [a0, a1] = qpsk_bits(a);
  const auto [b0, b1] = qpsk_bits(b);
  return static_cast<int>(a0 != b0) + static_cast<int>(a1 != b1);
}

/// Per-trial scenario: codes are shared across trials, everything else is
/// drawn from the trial's RNG stream in a fixed order.
struct TrialScenario {
  int n_r = 0;
  int n_p = 1;
  int M = 0;
  int D = 0;
  double sigma2 = 1.0;
  double nominal_power = 0.0;
  VecR user_power;                        // log-normal P_{A,k}
  std::vector<MatC> signatures;           // C_k
  std::vector<VecC> h_sd;                 // per user
  std::vector<std::vector<VecC>> h_sr;    // [relay][user]
  std::vector<std::vector<VecC>> h_rd;    // [relay][user]
  std::vector<VecC> s_sd;                 // C_k h_sd,k
  std::vector<std::vector<VecC>> s_sr;
  std::vector<std::vector<VecC>> s_rd;
  std::vector<VecC> symbols;              // source packets per user
};

TrialScenario draw_scenario(const SimConfig& cfg,
                            const std::vector<SpreadingCode>& codes,
                            double snr_db, int n_r, std::mt19937_64& rng) {
  TrialScenario sc;
  sc.n_r = n_r;
  sc.n_p = n_r + 1;
  sc.M = cfg.N + cfg.L - 1;
  sc.D = sc.n_p * sc.M;
  sc.sigma2 = 1.0;
  sc.nominal_power = std::pow(10.0, snr_db / 10.0) * sc.sigma2;

  const int K = cfg.K;
  std::normal_distribution<double> gauss(0.0, 1.0);
  sc.user_power.resize(K);
  for (int k = 0; k < K; ++k) {
    const double offset_db = cfg.lognormal_std_db * gauss(rng);
    sc.user_power[k] = std::pow(10.0, (snr_db + offset_db) / 10.0) * sc.sigma2;
  }

  sc.signatures.reserve(K);
  for (int k = 0; k < K; ++k) {
    sc.signatures.push_back(build_signature_matrix(codes[k], cfg.L));
  }
  sc.h_sd.resize(K);
  sc.h_sr.assign(n_r, std::vector<VecC>(K));
  sc.h_rd.assign(n_r, std::vector<VecC>(K));
  for (int k = 0; k < K; ++k) {
    sc.h_sd[k] = generate_multipath_channel(rng, cfg.L);
    for (int j = 0; j < n_r; ++j) {
      sc.h_sr[j][k] = generate_multipath_channel(rng, cfg.L);
      sc.h_rd[j][k] = generate_multipath_channel(rng, cfg.L);
    }
  }
  sc.s_sd.resize(K);
  sc.s_sr.assign(n_r, std::vector<VecC>(K));
  sc.s_rd.assign(n_r, std::vector<VecC>(K));
  for (int k = 0; k < K; ++k) {
    sc.s_sd[k] = sc.signatures[k] * sc.h_sd[k];
    for (int j = 0; j < n_r; ++j) {
      sc.s_sr[j][k] = sc.signatures[k] * sc.h_sr[j][k];
      sc.s_rd[j][k] = sc.signatures[k] * sc.h_rd[j][k];
    }
  }
  sc.symbols.resize(K);
  for (int k = 0; k < K; ++k) {
    sc.symbols[k] = random_qpsk_packet(rng, cfg.P);
  }
  return sc;
}

TrialCounts count_desired_errors(const VecC& truth,
                                 const std::vector<cxd>& detected, int P) {
  // Blind operation leaves a QPSK rotation undetermined; pick the best of
  // the 4 rotations for the whole packet before counting (metric only).
  static const cxd kRotations[4] = {{1, 0}, {0, 1}, {-1, 0}, {0, -1}};
  int best = 0;
  long long best_err = std::numeric_limits<long long>::max();
  for (int rot = 0; rot < 4; ++rot) {
    long long err = 0;
    for (int t = 0; t < P; ++t) {
      err += bit_diff(kRotations[rot] * detected[t], truth[t]);
    }
    if (err < best_err) {
      best_err = err;
      best = rot;
    }
  }
  const int warmup = P > kSteadyStateWarmup ? kSteadyStateWarmup : P / 2;
  TrialCounts counts;
  const int n_buckets = (P + kBerBucketWidth - 1) / kBerBucketWidth;
  counts.bucket_errors.assign(n_buckets, 0);
  counts.bucket_bits.assign(n_buckets, 0);
  for (int t = 0; t < P; ++t) {
    const int err = bit_diff(kRotations[best] * detected[t], truth[t]);
    const int bu = t / kBerBucketWidth;
    counts.bucket_errors[bu] += err;
    counts.bucket_bits[bu] += 2;
    if (t >= warmup) {
      counts.steady_errors += err;
      counts.steady_bits += 2;
    }
  }
  return counts;
}

TrialCounts run_blind_trial(const SimConfig& cfg, const TrialScenario& sc,
                            std::mt19937_64& rng) {
  const int K = cfg.K;
  const int P = cfg.P;
  const int n_r = sc.n_r;
  const int n_p = sc.n_p;
  const int M = sc.M;
  const int D = sc.D;
  const bool use_alloc = cfg.scheme == Scheme::BJPAIS_GBC;
  const double P_G = cfg.G * sc.nominal_power;

  std::vector<VecR> amps(K);
  for (int k = 0; k < K; ++k) {
    amps[k] = out_of_group_allocation(sc.user_power[k], n_r);
  }

  InverseCovarianceTracker rinv(D, cfg.alpha, 100.0, cfg.p_exponent);
  std::vector<BlindChannelEstimator> est;
  est.reserve(K);
  for (int k = 0; k < K; ++k) est.emplace_back(n_p, cfg.L, cfg.alpha);
  CcmRlsReceiver rx(D, cfg.alpha, cfg.nu, 0.01);
  rx.set_signature(weighted_effective_signature(sc.signatures[0],
                                                est[0].estimate(), amps[0]));

  std::vector<Relay> relays;
  relays.reserve(n_r);
  for (int j = 0; j < n_r; ++j) {
    relays.emplace_back(sc.signatures, cfg.alpha, cfg.nu, cfg.p_exponent);
  }
  // decoded relay streams, filled one symbol ahead of the destination
  std::vector<std::vector<VecC>> btilde(
      n_r, std::vector<VecC>(K, VecC::Zero(P)));

  VecR rake_acc = VecR::Zero(K);
  const int freeze = std::min(50, P);
  std::vector<int> group;
  std::vector<char> active(K, 1);
  std::optional<AllocationRls> alloc;
  VecC prev_dec = VecC::Constant(K, qpsk_point(false, false));
  std::vector<VecC> p_hat(K);
  std::vector<cxd> detected(P);
  // blind outputs carry an arbitrary rotation; decision-directed loops lock
  // each user's soft output to the slicer grid (residual is a 90-degree
  // multiple, absorbed by the derotation applied before bit counting)
  PhaseTracker pll0;
  std::vector<PhaseTracker> rake_pll(K);

  auto relay_step = [&](int i) {
    for (int j = 0; j < n_r; ++j) {
      VecC rw = VecC::Zero(M);
      for (int k = 0; k < K; ++k) {
        // a_sr is a separate link amplitude outside the destination-facing
        // budget: the relays hear the source broadcast at full user power,
        // with the fixed relays placed favorably toward the sources
        const double a_sr = std::sqrt(kSourceRelayGain * sc.user_power[k]);
        rw += a_sr * link_window(sc.s_sr[j][k], sc.symbols[k], i, cfg.N);
      }
      rw += complex_awgn(rng, M, sc.sigma2);
      const std::vector<cxd> dec = relays[j].step(rw);
      for (int k = 0; k < K; ++k) btilde[j][k][i] = dec[k];
    }
  };

  auto dest_step = [&](int t) {
    VecC r(D);
    {
      VecC seg = VecC::Zero(M);
      for (int k = 0; k < K; ++k) {
        seg +=
            amps[k][0] * link_window(sc.s_sd[k], sc.symbols[k], t, cfg.N);
      }
      r.head(M) = seg;
      for (int j = 0; j < n_r; ++j) {
        seg.setZero();
        for (int k = 0; k < K; ++k) {
          seg += amps[k][j + 1] *
                 link_window(sc.s_rd[j][k], btilde[j][k], t, cfg.N);
        }
        r.segment((j + 1) * M, M) = seg;
      }
      r += complex_awgn(rng, D, sc.sigma2);
    }

    rinv.update(r);
    MatC rp_store;
    const MatC& rp = cfg.p_exponent == 1 ? rinv.inverse()
                                         : (rp_store = rinv.inverse_pow());
    for (int k = 0; k < K; ++k) {
      if (!active[k]) continue;
      const VecC syms = VecC::Constant(n_p, prev_dec[k]);
      // Upsilon accumulation starts once the sample covariance has full
      // rank support (t >= D): before that, R^{-1} is dominated by the
      // initial loading and the early garbage takes ~1/(1-alpha) symbols
      // to forget, which is what used to sink the stacked receivers.
      if (t >= D) est[k].update(sc.signatures[k], amps[k], syms, rp);
      p_hat[k] = weighted_effective_signature(sc.signatures[k],
                                              est[k].estimate(), amps[k]);
      const cxd z_rake = rake_output(p_hat[k], r);
      if (t < freeze) rake_acc[k] += std::abs(z_rake);
      prev_dec[k] = rake_pll[k].step(z_rake);
    }

    if (use_alloc && t == freeze - 1) {
      VecR metric = rake_acc;
      // the desired user drives the group allocation and is always a member
      metric[0] = std::numeric_limits<double>::infinity();
      group = select_group(metric, cfg.G);
      alloc.emplace(cfg.G * n_p, cfg.alpha, P_G);
      for (size_t gi = 0; gi < group.size(); ++gi) {
        amps[group[gi]] =
            alloc->allocation().segment(gi * n_p, n_p).cwiseAbs();
      }
      for (int k = 0; k < K; ++k) {
        if (k != 0 &&
            std::find(group.begin(), group.end(), k) == group.end()) {
          active[k] = 0;  // only tracked users need channel estimates now
        }
      }
    }

    rx.set_signature(p_hat[0]);
    CcmRlsReceiver::StepResult res{cxd(0, 0), qpsk_point(false, false)};
    for (int it = 0; it < cfg.iterations_per_symbol; ++it) {
      try {
        res = rx.update(r);
      } catch (const numeric_degenerate_error&) {
        rx.reset();
        res = {cxd(0, 0), rx.detect(r)};
      }
      if (alloc && t >= freeze) {
        // allocation solves for the amplitudes, so its signature matrix
        // uses the unweighted per-phase signatures
        std::vector<VecC> group_sigs;
        group_sigs.reserve(group.size());
        for (int g : group) {
          group_sigs.push_back(stacked_effective_signature(
              sc.signatures[g], est[g].estimate(), n_p));
        }
        const MatC P_S = build_group_signature_matrix(group_sigs, M);
        VecC b_diag(static_cast<Eigen::Index>(group.size()) * n_p);
        for (size_t gi = 0; gi < group.size(); ++gi) {
          const cxd sym = group[gi] == 0 ? qpsk_slice(pll0.derotate(res.z))
                                         : prev_dec[group[gi]];
          b_diag.segment(gi * n_p, n_p).setConstant(sym);
        }
        const VecC v = build_regressor(b_diag, P_S, rx.filter());
        try {
          const VecC& a = alloc->update(v, res.z);
          for (size_t gi = 0; gi < group.size(); ++gi) {
            amps[group[gi]] = a.segment(gi * n_p, n_p).cwiseAbs();
          }
        } catch (const numeric_degenerate_error&) {
          // allocation state was reset; keep the current amplitudes
        }
      }
    }
    detected[t] = pll0.step(res.z);
    prev_dec[0] = detected[t];
  };

  for (int i = 0; i < P; ++i) {
    relay_step(i);
    if (i >= 1) dest_step(i - 1);
  }
  dest_step(P - 1);

  return count_desired_errors(sc.symbols[0], detected, P);
}

TrialCounts run_genie_trial(const SimConfig& cfg, const TrialScenario& sc,
                            std::mt19937_64& rng) {
  const int K = cfg.K;
  const int P = cfg.P;
  const int n_r = sc.n_r;
  const int n_p = sc.n_p;
  const int M = sc.M;

  std::vector<VecR> amps(K);
  for (int k = 0; k < K; ++k) {
    amps[k] = out_of_group_allocation(sc.user_power[k], n_r);
  }

  // relays: clairvoyant MMSE on the source->relay link
  std::vector<std::vector<VecC>> btilde(
      n_r, std::vector<VecC>(K, VecC::Zero(P)));
  for (int j = 0; j < n_r; ++j) {
    std::vector<VecR> relay_amps(K);
    std::vector<VecC> relay_channels(K);
    for (int k = 0; k < K; ++k) {
      relay_amps[k] =
          VecR::Constant(1, std::sqrt(kSourceRelayGain * sc.user_power[k]));
      relay_channels[k] = sc.h_sr[j][k];
    }
    std::vector<MatC> single(sc.signatures.begin(), sc.signatures.end());
    std::vector<VecC> filters(K);
    for (int k = 0; k < K; ++k) {
      filters[k] = mmse_genie_filter(single, relay_channels, relay_amps,
                                     sc.sigma2, k, cfg.N);
    }
    for (int i = 0; i < P; ++i) {
      VecC rw = VecC::Zero(M);
      for (int k = 0; k < K; ++k) {
        rw += std::sqrt(kSourceRelayGain * sc.user_power[k]) *
              link_window(sc.s_sr[j][k], sc.symbols[k], i, cfg.N);
      }
      rw += complex_awgn(rng, M, sc.sigma2);
      for (int k = 0; k < K; ++k) {
        btilde[j][k][i] = qpsk_slice(filters[k].dot(rw));
      }
    }
  }

  std::vector<MatC> stacked(K);
  std::vector<VecC> channels(K);
  std::vector<VecR> amp_list(K);
  for (int k = 0; k < K; ++k) {
    stacked[k] = build_stacked_signature(sc.signatures[k], n_r);
    VecC h(n_p * cfg.L);
    h.head(cfg.L) = sc.h_sd[k];
    for (int j = 0; j < n_r; ++j) {
      h.segment((j + 1) * cfg.L, cfg.L) = sc.h_rd[j][k];
    }
    channels[k] = h;
    amp_list[k] = amps[k];
  }
  const VecC w =
      mmse_genie_filter(stacked, channels, amp_list, sc.sigma2, 0, cfg.N);

  std::vector<cxd> detected(P);
  for (int t = 0; t < P; ++t) {
    VecC r(sc.D);
    VecC seg = VecC::Zero(M);
    for (int k = 0; k < K; ++k) {
      seg += amps[k][0] * link_window(sc.s_sd[k], sc.symbols[k], t, cfg.N);
    }
    r.head(M) = seg;
    for (int j = 0; j < n_r; ++j) {
      seg.setZero();
      for (int k = 0; k < K; ++k) {
        seg += amps[k][j + 1] *
               link_window(sc.s_rd[j][k], btilde[j][k], t, cfg.N);
      }
      r.segment((j + 1) * M, M) = seg;
    }
    if (sc.sigma2 > 0.0) r += complex_awgn(rng, sc.D, sc.sigma2);
    detected[t] = qpsk_slice(w.dot(r));
  }
  return count_desired_errors(sc.symbols[0], detected, P);
}

}  // namespace

TrialCounts run_trial(const SimConfig& cfg,
                      const std::vector<SpreadingCode>& codes, double snr_db,
                      std::uint64_t stream_id) {
  std::mt19937_64 rng = make_stream(cfg.seed, stream_id);
  const int n_r = cfg.scheme == Scheme::BNCIS ? 0 : cfg.n_r;
  const TrialScenario sc = draw_scenario(cfg, codes, snr_db, n_r, rng);
  if (cfg.scheme == Scheme::MMSE_GENIE) {
    return run_genie_trial(cfg, sc, rng);
  }
  return run_blind_trial(cfg, sc, rng);
}

}  // namespace detail

namespace {

std::vector<SpreadingCode> make_codes(std::uint64_t seed, int K, int N) {
  std::mt19937_64 rng = make_stream(seed, 0xC0DEULL);
  std::vector<SpreadingCode> codes;
  codes.reserve(K);
  for (int k = 0; k < K; ++k) codes.push_back(random_code(rng, N, k));
  return codes;
}

std::vector<detail::TrialCounts> run_point(const SimConfig& cfg,
                                           const std::vector<SpreadingCode>& codes,
                                           double snr_db,
                                           std::uint64_t point_idx,
                                           int threads) {
  std::vector<detail::TrialCounts> results(cfg.packets);
  auto work = [&](std::atomic<int>& next) {
    for (;;) {
      const int t = next.fetch_add(1);
      if (t >= cfg.packets) break;
      results[t] = detail::run_trial(cfg, codes, snr_db,
                                     point_idx * 1000003ULL + t);
    }
  };
  std::atomic<int> next{0};
  const int n_workers = std::max(1, std::min(threads, cfg.packets));
  if (n_workers == 1) {
    work(next);
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int i = 0; i < n_workers; ++i) {
      pool.emplace_back([&] { work(next); });
    }
    for (auto& th : pool) th.join();
  }
  return results;
}

BerRecord base_record(const SimConfig& cfg, double snr_db) {
  BerRecord rec;
  rec.scheme = scheme_name(cfg.scheme);
  rec.snr_db = snr_db;
  rec.K = cfg.K;
  rec.G = cfg.G;
  rec.n_r = cfg.scheme == Scheme::BNCIS ? 0 : cfg.n_r;
  rec.seed = cfg.seed;
  return rec;
}

}  // namespace

std::vector<BerRecord> run_ber_vs_symbols(const SimConfig& cfg, int threads) {
  cfg.validate();
  const auto codes = make_codes(cfg.seed, cfg.K, cfg.N);
  std::vector<BerRecord> records;
  for (size_t pt = 0; pt < cfg.snr_db.size(); ++pt) {
    const auto results = run_point(cfg, codes, cfg.snr_db[pt], pt, threads);
    const int n_buckets = static_cast<int>(results[0].bucket_errors.size());
    for (int bu = 0; bu < n_buckets; ++bu) {
      BerRecord rec = base_record(cfg, cfg.snr_db[pt]);
      rec.bucket = bu;
      for (const auto& tc : results) {
        rec.bit_errors += tc.bucket_errors[bu];
        rec.bits += tc.bucket_bits[bu];
      }
      rec.ber = rec.bits > 0
                    ? static_cast<double>(rec.bit_errors) / rec.bits
                    : 0.0;
      records.push_back(std::move(rec));
    }
  }
  return records;
}

std::vector<BerRecord> run_ber_vs_snr(const SimConfig& cfg, int threads) {
  cfg.validate();
  const auto codes = make_codes(cfg.seed, cfg.K, cfg.N);
  std::vector<BerRecord> records;
  for (size_t pt = 0; pt < cfg.snr_db.size(); ++pt) {
    const auto results = run_point(cfg, codes, cfg.snr_db[pt], pt, threads);
    BerRecord rec = base_record(cfg, cfg.snr_db[pt]);
    rec.bucket = -1;
    for (const auto& tc : results) {
      rec.bit_errors += tc.steady_errors;
      rec.bits += tc.steady_bits;
    }
    rec.ber =
        rec.bits > 0 ? static_cast<double>(rec.bit_errors) / rec.bits : 0.0;
    records.push_back(std::move(rec));
  }
  return records;
}

std::vector<BerRecord> run_ber_vs_users(const SimConfig& cfg, int threads) {
  cfg.validate();
  if (cfg.k_sweep.empty()) {
    throw config_error("k_sweep", "required for ber-vs-users");
  }
  std::vector<BerRecord> records;
  for (size_t pt = 0; pt < cfg.k_sweep.size(); ++pt) {
    SimConfig point = cfg;
    point.K = cfg.k_sweep[pt];
    point.G = std::min(cfg.G, point.K);
    point.validate();
    const auto codes = make_codes(point.seed, point.K, point.N);
    const auto results =
        run_point(point, codes, point.snr_db[0], pt, threads);
    BerRecord rec = base_record(point, point.snr_db[0]);
    rec.bucket = -1;
    for (const auto& tc : results) {
      rec.bit_errors += tc.steady_errors;
      rec.bits += tc.steady_bits;
    }
    rec.ber =
        rec.bits > 0 ? static_cast<double>(rec.bit_errors) / rec.bits : 0.0;
    records.push_back(std::move(rec));
  }
  return records;
}

void emit_results(const std::vector<BerRecord>& records,
                  const std::string& path, const SimConfig& cfg) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("emit_results: cannot open " + path);
  out << "scheme,snr_db,K,G,n_r,bucket,bit_errors,bits,ber,seed\n";
  char buf[64];
  for (const auto& r : records) {
    std::snprintf(buf, sizeof(buf), "%.17g", r.snr_db);
    out << r.scheme << ',' << buf << ',' << r.K << ',' << r.G << ','
        << r.n_r << ',' << r.bucket << ',' << r.bit_errors << ',' << r.bits
        << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", r.ber);
    out << buf << ',' << r.seed << '\n';
  }
  if (!out) throw std::runtime_error("emit_results: write failed: " + path);
  out.close();

  nlohmann::json manifest;
  manifest["version"] = "coopccm 0.1.0";
  manifest["records"] = records.size();
  manifest["phase_ambiguity"] =
      "BER counted after genie derotation (best of 4 QPSK rotations per "
      "packet)";
  nlohmann::json c;
  c["K"] = cfg.K;
  c["N"] = cfg.N;
  c["L"] = cfg.L;
  c["n_r"] = cfg.n_r;
  c["G"] = cfg.G;
  c["P"] = cfg.P;
  c["packets"] = cfg.packets;
  c["snr_db"] = cfg.snr_db;
  c["alpha"] = cfg.alpha;
  c["p_exponent"] = cfg.p_exponent;
  c["lambda_k"] = cfg.lambda_k;
  c["nu"] = cfg.nu;
  c["iterations_per_symbol"] = cfg.iterations_per_symbol;
  c["scheme"] = scheme_name(cfg.scheme);
  c["seed"] = cfg.seed;
  c["lognormal_std_db"] = cfg.lognormal_std_db;
  if (!cfg.k_sweep.empty()) c["k_sweep"] = cfg.k_sweep;
  manifest["config"] = c;
  std::ofstream mout(path + ".manifest.json", std::ios::binary);
  if (!mout) {
    throw std::runtime_error("emit_results: cannot open manifest for " + path);
  }
  mout << manifest.dump(2) << '\n';
}

std::vector<BerRecord> parse_results_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("parse_results_csv: cannot open " + path);
  std::string line;
  if (!std::getline(in, line)) {
    throw std::runtime_error("parse_results_csv: empty file " + path);
  }
  std::vector<BerRecord> records;
  while (std::getline(in, line)) {
    if (trim(line).empty()) continue;
    std::istringstream ls(line);
    std::string f;
    BerRecord r;
    std::getline(ls, r.scheme, ',');
    std::getline(ls, f, ',');
    r.snr_db = std::stod(f);
    std::getline(ls, f, ',');
    r.K = std::stoi(f);
    std::getline(ls, f, ',');
    r.G = std::stoi(f);
    std::getline(ls, f, ',');
    r.n_r = std::stoi(f);
    std::getline(ls, f, ',');
    r.bucket = std::stoi(f);
    std::getline(ls, f, ',');
    r.bit_errors = std::stoll(f);
    std::getline(ls, f, ',');
    r.bits = std::stoll(f);
    std::getline(ls, f, ',');
    r.ber = std::stod(f);
    std::getline(ls, f, ',');
    r.seed = std::stoull(f);
    records.push_back(std::move(r));
  }
  return records;
}

}  // namespace coopccm
