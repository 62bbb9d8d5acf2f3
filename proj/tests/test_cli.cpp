#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "quicfl/harness.hpp"
#include "quicfl/quicfl_codec.hpp"
#include "quicfl/table_io.hpp"
#include "quicfl/vector_io.hpp"
#include "quicfl_cli/cli.hpp"
#include "support.hpp"

using namespace quicfl;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run(std::vector<std::string> args) {
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream f(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(f), {}};
}

// Drops the two trailing timing columns of a DME CSV row.
std::string strip_timing(const std::string& row) {
  auto cut = row.rfind(',', row.rfind(',') - 1);
  return row.substr(0, cut);
}

}  // namespace

TEST(Cli, SolveIsBitReproducible) {
  test::TempDir dir("cli_solve");
  auto a = (dir / "a.qfl").string(), b = (dir / "b.qfl").string();
  auto r1 = run({"solve", "--b", "2", "--l", "2", "--m", "64", "--p", "1/512", "-o", a, "--seed", "7"});
  auto r2 = run({"solve", "--b", "2", "--l", "2", "--m", "64", "--p", "1/512", "-o", b, "--seed", "7",
                 "--threads", "2"});
  ASSERT_EQ(r1.code, 0) << r1.err;
  ASSERT_EQ(r2.code, 0) << r2.err;
  EXPECT_EQ(slurp(a), slurp(b));
  EXPECT_EQ(run({"validate", a}).code, 0);
}

TEST(Cli, EncodeDecodeZeroVector) {
  test::TempDir dir("cli_codec");
  auto table = (dir / "t.qfl").string();
  ASSERT_EQ(run({"solve", "--b", "2", "--l", "2", "--m", "64", "-o", table}).code, 0);
  write_vector_file(dir / "v.f32", std::vector<double>(300, 0.0));
  auto enc = run({"encode", "--table", table, "--in", (dir / "v.f32").string(), "--global-seed", "1",
                  "--client-seed", "2", "--private-seed", "3", "-o", (dir / "m.qfl").string()});
  ASSERT_EQ(enc.code, 0) << enc.err;
  auto dec = run({"decode", "--table", table, "--in", (dir / "m.qfl").string(), "-o",
                  (dir / "out.f32").string()});
  ASSERT_EQ(dec.code, 0) << dec.err;
  auto y = read_vector_file(dir / "out.f32");
  ASSERT_EQ(y.size(), 300u);
  for (double v : y) EXPECT_EQ(v, 0.0);
}

TEST(Cli, DecodeMatchesLibrary) {
  test::TempDir dir("cli_match");
  auto table = (dir / "t.qfl").string();
  ASSERT_EQ(run({"solve", "--b", "1", "--l", "3", "--m", "64", "-o", table}).code, 0);
  std::vector<double> x(257);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.1 * i) + 0.01 * i;
  write_vector_file(dir / "x.f32", x);
  auto xf = read_vector_file(dir / "x.f32");  // f32-rounded input
  for (int c = 0; c < 2; ++c) {
    ASSERT_EQ(run({"encode", "--table", table, "--in", (dir / "x.f32").string(), "--global-seed", "9",
                   "--client-seed", std::to_string(10 + c), "--private-seed", std::to_string(20 + c),
                   "-o", (dir / ("m" + std::to_string(c))).string()})
                  .code,
              0);
  }
  ASSERT_EQ(run({"decode", "--table", table, "--in", (dir / "m0").string(), (dir / "m1").string(), "-o",
                 (dir / "y.f32").string()})
                .code,
            0);
  auto t = load_table(table);
  std::vector<EncodedVector> msgs = {encode_quicfl(xf, t, 9, 10, 20), encode_quicfl(xf, t, 9, 11, 21)};
  auto want = decode_aggregate(msgs, t, 9);
  auto got = read_vector_file(dir / "y.f32");
  ASSERT_EQ(got.size(), want.size());
  for (std::size_t i = 0; i < want.size(); ++i) EXPECT_EQ(got[i], static_cast<float>(want[i]));
}

TEST(Cli, BenchNmseMatchesLibrary) {
  test::TempDir dir("cli_nmse");
  auto csv = (dir / "out.csv").string();
  auto r = run({"bench-nmse", "--scheme", "bsq", "--n", "3", "--d", "500", "--b", "2", "--p", "1/32",
                "--trials", "4", "--seed", "9", "-o", csv, "--threads", "2"});
  ASSERT_EQ(r.code, 0) << r.err;
  ExperimentConfig c;
  c.scheme = Scheme::kBsq;
  c.n = 3;
  c.d = 500;
  c.b = 2;
  c.p = Rational{1, 32};
  c.trials = 4;
  c.seed = 9;
  c.dist = Distribution::kNormal;
  std::ostringstream want;
  write_dme_csv_header(want);
  write_dme_csv_row(want, c, run_dme(c));
  std::istringstream got_lines(slurp(csv)), want_lines(want.str());
  std::string g, w;
  std::getline(got_lines, g);
  std::getline(want_lines, w);
  EXPECT_EQ(g, w);
  std::getline(got_lines, g);
  std::getline(want_lines, w);
  EXPECT_EQ(strip_timing(g), strip_timing(w));
}

TEST(Cli, BenchSweepAndPower) {
  auto s = run({"bench-sweep", "--b", "1", "--l", "0-2", "--m", "32", "--restarts", "2", "--nodes", "2001"});
  ASSERT_EQ(s.code, 0) << s.err;
  EXPECT_EQ(std::count(s.out.begin(), s.out.end(), '\n'), 4);
  auto p = run({"bench-power", "--scheme", "uncompressed", "--n", "2", "--d", "32", "--rounds", "3"});
  ASSERT_EQ(p.code, 0) << p.err;
  EXPECT_EQ(p.out, "round,l2_error\n1,0\n2,0\n3,0\n");
}

TEST(Cli, ExitCodes) {
  EXPECT_EQ(run({}).code, cli::kExitUsage);
  auto unknown = run({"solve", "--b", "1", "--l", "1", "--frobnicate"});
  EXPECT_EQ(unknown.code, cli::kExitUsage);
  EXPECT_NE(unknown.err.find("--restarts"), std::string::npos);  // flag documentation
  EXPECT_EQ(run({"nonsense"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--b", "1"}).code, cli::kExitUsage);
  EXPECT_EQ(run({"solve", "--b", "1", "--l", "1", "--p", "3/2"}).code, cli::kExitDomain);
  EXPECT_EQ(run({"solve", "--b", "1", "--l", "1", "--p", "x"}).code, cli::kExitDomain);
  EXPECT_EQ(run({"validate", "/nonexistent/t.qfl"}).code, cli::kExitDomain);
  EXPECT_EQ(run({"bench-nmse", "--scheme", "topk"}).code, cli::kExitDomain);
  EXPECT_EQ(run({"--help"}).code, cli::kExitOk);
}

TEST(Cli, ValidateRejectsBrokenTable) {
  test::TempDir dir("cli_bad");
  auto cfg = QuantConfig::make(1, 1, 16);
  QuantTable bad(cfg, {-1.0, 2.0, -2.0, 1.0});
  save_table(bad, dir / "bad.qfl");
  auto r = run({"validate", (dir / "bad.qfl").string()});
  EXPECT_EQ(r.code, cli::kExitDomain);
}
