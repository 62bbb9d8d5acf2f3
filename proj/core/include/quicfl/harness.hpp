#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "quicfl/rational.hpp"
#include "quicfl/solver.hpp"
#include "quicfl/tables.hpp"

namespace quicfl {

enum class Scheme { kQuicfl, kQuicflAlg1, kBsq, kQsgd, kMinmaxHadamard, kUncompressed };
enum class Distribution { kLognormal, kNormal, kIdenticalLognormal, kSparseSpike };

Scheme parse_scheme(std::string_view s);
Distribution parse_distribution(std::string_view s);
std::string to_string(Scheme s);
std::string to_string(Distribution d);

/// Standard normal sample number i of the stream keyed by seed (Box-Muller
/// over PRF uniforms, so it is identical on every platform).
double prf_gaussian(std::uint64_t seed, std::uint64_t i) noexcept;

/// n client vectors of length d. identical_lognormal shares one vector,
/// sparse_spike places spike_k entries of +-1 at random positions.
std::vector<std::vector<double>> generate_inputs(Distribution dist, std::size_t d, int n,
                                                 std::uint64_t seed, std::size_t spike_k = 1);

struct ExperimentConfig {
  Scheme scheme = Scheme::kQuicfl;
  int n = 1;
  std::size_t d = 1 << 12;
  int b = 1;
  /// -1 picks default_ell(b).
  int ell = -1;
  Rational p{1, 512};
  int m = 512;
  Distribution dist = Distribution::kNormal;
  int trials = 1;
  std::uint64_t seed = 0;
  int threads = 1;
  std::size_t spike_k = 1;
  /// Table for the QUIC-FL schemes; looked up on the table path when null.
  std::shared_ptr<const QuantTable> table;
};

struct DmeReport {
  double nmse = 0;
  double nmse_stderr = 0;
  std::vector<double> vnmse_per_client;
  double vnmse_mean = 0;
  /// Quantizer MSE of the table (QUIC-FL schemes); NaN otherwise.
  double chi_estimate = 0;
  double bits_per_coord = 0;
  double outlier_fraction = 0;
  double encode_seconds = 0;
  double decode_seconds = 0;
};

/// Encodes, aggregates and scores `trials` independent rounds. Per-trial
/// seeds derive from (seed, trial, client), so results do not depend on
/// cfg.threads.
DmeReport run_dme(const ExperimentConfig& cfg);

/// E[(Z - Zhat)^2] for Z ~ N(0,1) conditioned on [-T, T], by the trapezoid
/// rule over `nodes` points.
double estimate_quantizer_mse(const QuantTable& t, int nodes = 100001);

/// Same expectation under an explicit discrete distribution.
double estimate_quantizer_mse(const QuantTable& t, std::span<const double> z,
                              std::span<const double> weight);

/// The one-shared-bit reference scheme integrated the same way (p = 1/512).
double one_bit_reference_integrated_mse(int nodes = 100001);

struct SweepRow {
  int b = 0;
  int ell = 0;
  Rational p;
  int m = 0;
  double chi = 0;
  double objective = 0;
  /// "solved", or "embedded" when the ell-1 table with a duplicated row
  /// scored better than the table solved at this ell.
  std::string source;
  /// "ok" or "failed: <reason>".
  std::string status;
};

struct SweepReport {
  std::vector<SweepRow> rows;
  bool monotone_in_ell = true;
  bool monotone_in_b = true;
};

/// Solves every (b, ell, p) cell and integrates chi. Failed cells are
/// flagged and the sweep goes on.
SweepReport sweep(std::span<const int> bs, std::span<const int> ells, std::span<const Rational> ps,
                  int m, const SolverOptions& opts = {}, int integration_nodes = 20001);

/// CSV with a header row; reals use 9 significant digits.
void write_sweep_csv(std::ostream& out, const SweepReport& report);
void write_dme_csv_header(std::ostream& out);
void write_dme_csv_row(std::ostream& out, const ExperimentConfig& cfg, const DmeReport& r);

struct PowerConfig {
  /// kQuicfl or kUncompressed.
  Scheme scheme = Scheme::kQuicfl;
  int n = 10;
  std::size_t d = 256;
  int rows_per_client = 64;
  int b = 1;
  int ell = -1;
  Rational p{1, 512};
  int m = 512;
  int rounds = 50;
  double learning_rate = 0.1;
  std::uint64_t seed = 0;
  std::shared_ptr<const QuantTable> table;
};

struct PowerReport {
  /// ||v_scheme - v_uncompressed|| after each round.
  std::vector<double> error_per_round;
  std::vector<double> estimate;
  std::vector<double> reference;
};

/// Distributed power iteration: each client takes one local power step from
/// the shared estimate, sends the difference, and the server moves the
/// estimate by learning_rate times the average difference.
PowerReport power_iteration(const PowerConfig& cfg);

}  // namespace quicfl
