#ifndef COOPCCM_SIM_HPP
#define COOPCCM_SIM_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "coopccm/common.hpp"
#include "coopccm/spreading.hpp"

namespace coopccm {

enum class Scheme { BJPAIS_GBC, BCIS, BNCIS, MMSE_GENIE };

std::string scheme_name(Scheme s);
Scheme scheme_from_name(const std::string& name);

/// Configuration or CLI input that fails validation; carries the
/// offending key.
class config_error : public std::runtime_error {
 public:
  config_error(std::string key, const std::string& what)
      : std::runtime_error(key + ": " + what), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct SimConfig {
  int K = 8;
  int N = 16;
  int L = 5;
  int n_r = 2;
  int G = 3;
  int P = 1500;
  int packets = 50;
  std::vector<double> snr_db = {15.0};
  double alpha = 0.998;
  int p_exponent = 1;
  double lambda_k = 0.025;
  double nu = 1.0;
  int iterations_per_symbol = 1;
  Scheme scheme = Scheme::BJPAIS_GBC;
  std::uint64_t seed = 1;
  double lognormal_std_db = 3.0;
  std::vector<int> k_sweep;  // user counts for ber-vs-users

  void validate() const;  // throws config_error
};

/// Key-value config text: one `key = value` per line or comma separated,
/// '#' comments, optional [section] headers (ignored).  Unknown keys and
/// out-of-range values raise config_error naming the key.
SimConfig parse_config(const std::string& text);

struct BerRecord {
  std::string scheme;
  double snr_db = 0.0;
  int K = 0;
  int G = 0;
  int n_r = 0;
  int bucket = 0;  // symbol-index bucket of width 50; -1 = steady state
  long long bit_errors = 0;
  long long bits = 0;
  double ber = 0.0;
  std::uint64_t seed = 0;
};

/// Symbol-index bucket width used by the BER-versus-symbols curves.
inline constexpr int kBerBucketWidth = 50;
/// Symbols discarded as convergence warm-up in steady-state BER figures.
inline constexpr int kSteadyStateWarmup = 1000;
/// Power gain of the source->relay links over the direct link: the fixed
/// relays are deployed between the sources and the destination, so they
/// hear the broadcast with a better link budget.
inline constexpr double kSourceRelayGain = 8.0;

/// Convergence curve: BER per symbol-index bucket, averaged over packets.
std::vector<BerRecord> run_ber_vs_symbols(const SimConfig& cfg,
                                          int threads = 1);

/// Steady-state BER per SNR grid point (one record per point, bucket -1).
std::vector<BerRecord> run_ber_vs_snr(const SimConfig& cfg, int threads = 1);

/// Steady-state BER per user-count grid point from cfg.k_sweep.
std::vector<BerRecord> run_ber_vs_users(const SimConfig& cfg,
                                        int threads = 1);

/// Writes the records as CSV (fixed header, deterministic order) and a
/// JSON run manifest alongside at path + ".manifest.json".
void emit_results(const std::vector<BerRecord>& records,
                  const std::string& path, const SimConfig& cfg);

/// Re-reads a CSV written by emit_results.
std::vector<BerRecord> parse_results_csv(const std::string& path);

namespace detail {

/// Per-packet outcome for the desired user: bit errors per symbol bucket
/// after genie derotation, plus steady-state tallies.
struct TrialCounts {
  std::vector<long long> bucket_errors;
  std::vector<long long> bucket_bits;
  long long steady_errors = 0;
  long long steady_bits = 0;
};

/// Runs one packet of the full blind pipeline (relay adaptation, channel
/// estimation, group selection, alternating filter/allocation recursions)
/// for the configured scheme.
TrialCounts run_trial(const SimConfig& cfg,
                      const std::vector<SpreadingCode>& codes, double snr_db,
                      std::uint64_t stream_id);

}  // namespace detail

}  // namespace coopccm

#endif
