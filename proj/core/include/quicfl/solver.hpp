#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "quicfl/error.hpp"
#include "quicfl/tables.hpp"

namespace quicfl {

struct SolverOptions {
  int restarts = 16;
  int max_iters = 500;
  double tol = 1e-10;
  std::uint64_t seed = 0;
  bool enforce_symmetry = true;
  bool enforce_monotone = true;
  bool enforce_boundary = true;
  /// Worker cap for restarts. Results do not depend on it.
  int threads = 1;
  /// Optional feasible starting r (row-major, 2^ell x 2^b). Restart 0 starts
  /// from it and later restarts from convex mixes with fresh starts.
  std::optional<std::vector<double>> warm_start;
};

struct SolverResult {
  QuantTable table;
  double objective = 0;
  double max_unbias_violation = 0;
  int iterations = 0;
  int restart_index = 0;
  /// Objective after every accepted step of the winning restart.
  std::vector<double> objective_history;
};

/// No restart produced a feasible table. Carries the best attempt, if any.
class SolverInfeasible : public Error {
 public:
  SolverInfeasible(const std::string& what, std::optional<SolverResult> best)
      : Error(what), best_(std::move(best)) {}
  const std::optional<SolverResult>& best() const noexcept { return best_; }

 private:
  std::optional<SolverResult> best_;
};

/// A single s- or r-step has no feasible solution.
class InfeasibleStep : public Error {
 public:
  using Error::Error;
};

/// Exact per-quantile LP: for every q, the s[h][q][.] minimizing the squared
/// error subject to the simplex rows and the unbiasedness equality. Solved by
/// walking the lower convex hull of (r, (q-r)^2) across rows in slope order;
/// ties break by (slope, position in row, h) so the result is reproducible.
/// Throws InfeasibleStep when some quantile lies outside the reachable range.
std::vector<double> s_step(std::span<const double> r, const QuantConfig& cfg);

/// (1/m)(1/2^ell) sum_{h,q,x} s (q - r)^2.
double objective(std::span<const double> s, std::span<const double> r,
                 const QuantConfig& cfg);

/// objective(s_step(r), r) without materializing s. +inf when some quantile
/// cannot be matched in expectation.
double lp_value(std::span<const double> r, const QuantConfig& cfg);

/// max_q |(1/2^ell) sum_{h,x} s r - q|
double max_unbias_violation(std::span<const double> s, std::span<const double> r,
                            const QuantConfig& cfg);

struct RStepOptions {
  bool enforce_symmetry = true;
  bool enforce_boundary = true;
};

struct RStepResult {
  std::vector<double> r;
  /// Number of directions along which the KKT system was singular; the
  /// minimum-norm solution was taken along them.
  int rank_deficiency = 0;
  double max_unbias_violation = 0;
};

/// Minimizes the objective in r for fixed s subject to the unbiasedness
/// equalities (and symmetry/boundary when enabled) through the KKT system.
RStepResult r_step(std::span<const double> s, const QuantConfig& cfg,
                   const RStepOptions& opts = {});
/// Same, over an explicit quantile list; s is indexed [h][q][x] with
/// q running over `quantiles`.
RStepResult r_step(std::span<const double> s, std::span<const double> quantiles, int b,
                   int ell, double threshold, const RStepOptions& opts = {});

/// Best table over all restarts. Each restart runs a projected Newton method
/// on lp_value(r), where every accepted step is an exact s-step followed by
/// an r-step restricted to the active constraint face.
SolverResult solve_table(const QuantConfig& cfg, const SolverOptions& opts = {});

/// Solves ell = 0..ell_max in sequence, warm-starting each level from the
/// previous table with its rows duplicated.
std::vector<SolverResult> solve_ladder(int b, int ell_max, int m, Rational p,
                                       const SolverOptions& opts = {});

/// Returns t with s = s_step(t.r) attached.
QuantTable attach_sender(const QuantTable& t);

/// r for ell+1 shared bits that behaves exactly like r: row h becomes rows
/// 2h and 2h+1.
std::vector<double> embed_shared_bit(std::span<const double> r, int b, int ell);

/// Largest 2^(b+ell) the dense solver accepts.
inline constexpr int kMaxSolverCells = 4096;

}  // namespace quicfl
