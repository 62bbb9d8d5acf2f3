#include <gtest/gtest.h>

#include <cmath>
#include <cstdlib>
#include <sstream>

#include "quicfl/error.hpp"
#include "quicfl/harness.hpp"
#include "quicfl/normal.hpp"
#include "quicfl/solver.hpp"
#include "quicfl/table_io.hpp"
#include "quicfl/table_store.hpp"
#include "support.hpp"

using namespace quicfl;

namespace {

std::shared_ptr<const QuantTable> small_table(int b, int ell) {
  SolverOptions o;
  o.restarts = 4;
  return std::make_shared<const QuantTable>(
      solve_ladder(b, ell, 128, Rational{1, 512}, o).back().table.without_s());
}

ExperimentConfig base_cfg() {
  ExperimentConfig c;
  c.scheme = Scheme::kQuicfl;
  c.b = 2;
  c.ell = 2;
  c.m = 128;
  c.d = 1000;
  c.n = 4;
  c.trials = 6;
  c.seed = 3;
  c.dist = Distribution::kNormal;
  c.table = small_table(2, 2);
  return c;
}

}  // namespace

TEST(Inputs, Distributions) {
  auto same = generate_inputs(Distribution::kIdenticalLognormal, 100, 5, 1);
  for (const auto& v : same) EXPECT_EQ(v, same[0]);
  auto logn = generate_inputs(Distribution::kLognormal, 1000, 3, 1);
  EXPECT_NE(logn[0], logn[1]);
  for (const auto& v : logn)
    for (double x : v) EXPECT_GT(x, 0.0);
  for (std::size_t k : {1u, 7u}) {
    auto spikes = generate_inputs(Distribution::kSparseSpike, 64, 4, 2, k);
    for (const auto& v : spikes) {
      std::size_t nz = 0;
      for (double x : v) {
        if (x != 0) {
          ++nz;
          EXPECT_EQ(std::abs(x), 1.0);
        }
      }
      EXPECT_EQ(nz, k);
    }
  }
  auto normal = generate_inputs(Distribution::kNormal, 200000, 1, 4)[0];
  double mean = 0, var = 0;
  for (double x : normal) mean += x / normal.size();
  for (double x : normal) var += (x - mean) * (x - mean) / normal.size();
  EXPECT_NEAR(mean, 0.0, 0.01);
  EXPECT_NEAR(var, 1.0, 0.01);
  EXPECT_THROW(parse_distribution("cauchy"), DomainError);
  EXPECT_THROW(parse_scheme("topk"), DomainError);
  EXPECT_EQ(to_string(parse_scheme("minmax_hadamard")), "minmax_hadamard");
}

TEST(RunDme, DeterministicAcrossThreads) {
  auto c = base_cfg();
  auto a = run_dme(c);
  c.threads = 3;
  auto b = run_dme(c);
  EXPECT_EQ(a.nmse, b.nmse);
  EXPECT_EQ(a.vnmse_per_client, b.vnmse_per_client);
  EXPECT_EQ(a.bits_per_coord, b.bits_per_coord);
  EXPECT_EQ(a.outlier_fraction, b.outlier_fraction);
}

TEST(RunDme, SingleClientNmseEqualsVnmse) {
  auto c = base_cfg();
  c.n = 1;
  auto r = run_dme(c);
  EXPECT_DOUBLE_EQ(r.nmse, r.vnmse_mean);
}

TEST(RunDme, UncompressedIsExact) {
  auto c = base_cfg();
  c.scheme = Scheme::kUncompressed;
  c.table = nullptr;
  auto r = run_dme(c);
  EXPECT_LT(r.nmse, 1e-28);
  EXPECT_EQ(r.bits_per_coord, 64.0);
}

TEST(RunDme, NmseIsVnmseOverN) {
  auto c = base_cfg();
  c.n = 16;
  c.trials = 30;
  auto r = run_dme(c);
  EXPECT_NEAR(r.nmse * c.n / r.vnmse_mean, 1.0, 0.2);
  EXPECT_NEAR(r.vnmse_mean, r.chi_estimate, 0.1 * r.chi_estimate);
  EXPECT_NEAR(r.bits_per_coord, 2 + (72 + 8) * 8.0 / 1024 + 64 * r.outlier_fraction, 1e-9);
}

TEST(RunDme, ConfigErrors) {
  auto c = base_cfg();
  c.b = 3;  // table is b=2
  EXPECT_THROW(run_dme(c), DomainError);
  c = base_cfg();
  c.trials = 0;
  EXPECT_THROW(run_dme(c), DomainError);
  c = base_cfg();
  c.table = nullptr;
  c.m = 7;  // nothing shipped for m=7
  EXPECT_THROW(run_dme(c), Error);
}

TEST(QuantizerMse, EndpointSchemeClosedForm) {
  auto cfg = QuantConfig::make(1, 0, 512);
  const double T = cfg.threshold;
  QuantTable t(cfg, {-T, T});
  // T^2 minus the variance of the normal truncated to [-T, T].
  const double mass = std::erf(T / std::sqrt(2.0));
  const double var = 1 - 2 * T * normal_pdf(T) / mass;
  EXPECT_NEAR(estimate_quantizer_mse(t), T * T - var, 1e-8);
  EXPECT_NEAR(estimate_quantizer_mse(t), 8.58, 0.02 * 8.58);
}

TEST(QuantizerMse, PointMassAtTwoQuantiles) {
  auto cfg = QuantConfig::make(1, 0, 2);
  const double T = cfg.threshold;
  QuantTable t(cfg, {-T, T});
  std::vector<double> z = {-T, T}, w = {0.5, 0.5};
  EXPECT_EQ(estimate_quantizer_mse(t, z, w), 0.0);
}

TEST(QuantizerMse, StableUnderNodeDoubling) {
  auto t = small_table(2, 3);
  const double a = estimate_quantizer_mse(*t, 100001), b = estimate_quantizer_mse(*t, 200001);
  EXPECT_NEAR(a, b, 5e-5 * a);
}

TEST(QuantizerMse, OneBitReference) {
  EXPECT_NEAR(one_bit_reference_integrated_mse(100001), 3.29, 0.01 * 3.29);
}

TEST(Sweep, MonotoneAndFlagsFailures) {
  std::vector<int> bs = {1, 2}, ells = {0, 1, 2};
  std::vector<Rational> ps = {Rational{1, 512}};
  SolverOptions o;
  o.restarts = 3;
  auto rep = sweep(bs, ells, ps, 64, o, 20001);
  ASSERT_EQ(rep.rows.size(), 6u);
  EXPECT_TRUE(rep.monotone_in_ell);
  EXPECT_TRUE(rep.monotone_in_b);
  for (const auto& r : rep.rows) EXPECT_EQ(r.status, "ok");
  std::ostringstream csv;
  write_sweep_csv(csv, rep);
  EXPECT_EQ(csv.str().substr(0, csv.str().find('\n')), "b,ell,p,p_value,m,chi,objective,source,status");

  // p = 1 leaves no range to quantize; its cells fail and the rest still run.
  std::vector<Rational> mixed = {Rational{1, 1}, Rational{1, 512}};
  std::vector<int> one = {1}, two = {0, 1};
  auto bad = sweep(one, two, mixed, 32, o, 2001);
  ASSERT_EQ(bad.rows.size(), 4u);
  EXPECT_EQ(bad.rows[0].status.rfind("failed", 0), 0u);
  EXPECT_EQ(bad.rows[1].status.rfind("failed", 0), 0u);
  EXPECT_EQ(bad.rows[2].status, "ok");
  EXPECT_EQ(bad.rows[3].status, "ok");
}

TEST(Csv, NineSignificantDigits) {
  auto c = base_cfg();
  c.trials = 2;
  auto r = run_dme(c);
  r.nmse = 1.0 / 3;
  std::ostringstream out;
  write_dme_csv_header(out);
  write_dme_csv_row(out, c, r);
  EXPECT_NE(out.str().find(",0.333333333,"), std::string::npos) << out.str();
}

TEST(Power, UncompressedHasZeroErrorAndQuicflConverges) {
  PowerConfig pc;
  pc.scheme = Scheme::kUncompressed;
  pc.n = 3;
  pc.d = 64;
  pc.rows_per_client = 32;
  pc.rounds = 20;
  auto r = power_iteration(pc);
  ASSERT_EQ(r.error_per_round.size(), 20u);
  for (double e : r.error_per_round) EXPECT_EQ(e, 0.0);

  pc.scheme = Scheme::kQuicfl;
  pc.b = 4;
  pc.ell = 2;
  pc.m = 128;
  pc.table = small_table(4, 2);
  auto q = power_iteration(pc);
  EXPECT_LT(q.error_per_round.back(), 0.5);
  pc.rows_per_client = 0;
  EXPECT_THROW(power_iteration(pc), DomainError);
}

TEST(TableStore, LooksUpShippedTables) {
  EXPECT_EQ(default_ell(1), 6);
  EXPECT_EQ(default_ell(2), 5);
  EXPECT_EQ(default_ell(3), 4);
  EXPECT_EQ(default_ell(4), 4);
  for (int b = 1; b <= 4; ++b) {
    auto path = find_table(b, default_ell(b));
    ASSERT_TRUE(path.has_value()) << b;
    auto t = load_default_table(b, default_ell(b), 512, Rational{1, 512}, true);
    EXPECT_TRUE(t.has_s());
    EXPECT_TRUE(validate_table(t).valid()) << b << ": " << validate_table(t).summary();
  }
  EXPECT_FALSE(find_table(2, 0, 7).has_value());
}

TEST(TableStore, EnvironmentDirectoryComesFirst) {
  test::TempDir dir("store");
  auto cfg = QuantConfig::make(1, 0, 512);
  QuantTable t(cfg, {-cfg.threshold, cfg.threshold});
  save_table(t, dir / default_table_name(1, 0, 512, Rational{1, 512}));
  const char* old = std::getenv("QUICFL_TABLE_DIR");
  std::string saved = old ? old : "";
  setenv("QUICFL_TABLE_DIR", dir.path().c_str(), 1);
  auto found = find_table(1, 0);
  if (old) setenv("QUICFL_TABLE_DIR", saved.c_str(), 1); else unsetenv("QUICFL_TABLE_DIR");
  ASSERT_TRUE(found.has_value());
  EXPECT_EQ(found->parent_path(), dir.path());
}
