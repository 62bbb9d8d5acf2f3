#include "quicfl/harness.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <thread>

#include "quicfl/baselines.hpp"
#include "quicfl/error.hpp"
#include "quicfl/normal.hpp"
#include "quicfl/prf.hpp"
#include "quicfl/quicfl_codec.hpp"
#include "quicfl/table_store.hpp"
#include "quicfl/transform.hpp"

namespace quicfl {

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

double sqnorm(std::span<const double> v) {
  double s = 0;
  for (double x : v) s += x * x;
  return s;
}

double sqdist(std::span<const double> a, std::span<const double> b) {
  double s = 0;
  for (std::size_t i = 0; i < a.size(); ++i) s += (a[i] - b[i]) * (a[i] - b[i]);
  return s;
}

std::string fmt9(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.9g", v);
  return buf;
}

bool uses_table(Scheme s) { return s == Scheme::kQuicfl || s == Scheme::kQuicflAlg1; }

std::shared_ptr<const QuantTable> resolve_table(const std::shared_ptr<const QuantTable>& given,
                                                Scheme scheme, int b, int ell, int m,
                                                const Rational& p) {
  if (!uses_table(scheme)) return nullptr;
  const bool need_s = scheme == Scheme::kQuicflAlg1;
  if (given) {
    const auto& c = given->config();
    if (c.b != b || c.ell != ell || !(c.p == p)) {
      throw DomainError("config/table mismatch: table has b=" + std::to_string(c.b) +
                        " l=" + std::to_string(c.ell) + " p=" + c.p.str());
    }
    if (need_s && !given->has_s()) return std::make_shared<const QuantTable>(attach_sender(*given));
    return given;
  }
  return std::make_shared<const QuantTable>(load_default_table(b, ell, m, p, need_s));
}

template <class Body>
void parallel_for(int count, int threads, Body&& body) {
  threads = std::clamp(threads, 1, std::max(1, count));
  if (threads == 1) {
    for (int i = 0; i < count; ++i) body(i);
    return;
  }
  std::atomic<int> next{0};
  std::vector<std::thread> pool;
  for (int t = 0; t < threads; ++t)
    pool.emplace_back([&] {
      for (int i; (i = next.fetch_add(1)) < count;) body(i);
    });
  for (auto& th : pool) th.join();
}

struct TrialResult {
  double nmse = 0;
  std::vector<double> vnmse;
  double bits = 0;
  double coords = 0;
  double outliers = 0;
  double encode_s = 0;
  double decode_s = 0;
};

// Seeds for one client in one trial.
struct ClientSeeds {
  std::uint64_t client, priv;
};
ClientSeeds client_seeds(std::uint64_t trial_seed, int c) {
  return {derive_seed(trial_seed, 2, static_cast<std::uint64_t>(c)),
          derive_seed(trial_seed, 3, static_cast<std::uint64_t>(c))};
}

// Compresses every client vector with `scheme` and returns the per-client
// estimates and their average. For QUIC-FL the average comes from a single
// decode_aggregate call.
struct RoundOutput {
  std::vector<std::vector<double>> per_client;
  std::vector<double> average;
  double bits = 0;
  double coords = 0;
  double outliers = 0;
  double encode_s = 0;
  double decode_s = 0;
};

RoundOutput compress_round(Scheme scheme, const std::vector<std::vector<double>>& xs,
                           const QuantTable* table, int b, double p, std::uint64_t trial_seed,
                           bool want_per_client) {
  RoundOutput out;
  const int n = static_cast<int>(xs.size());
  const std::size_t d = xs.front().size();
  const std::uint64_t global_seed = derive_seed(trial_seed, 1);
  out.average.assign(d, 0.0);
  if (uses_table(scheme)) {
    std::vector<EncodedVector> msgs;
    auto t0 = Clock::now();
    for (int c = 0; c < n; ++c) {
      auto s = client_seeds(trial_seed, c);
      msgs.push_back(scheme == Scheme::kQuicfl
                         ? encode_quicfl(xs[c], *table, global_seed, s.client, s.priv)
                         : encode_alg1(xs[c], *table, global_seed, s.client, s.priv));
    }
    out.encode_s = seconds_since(t0);
    for (const auto& m : msgs) {
      out.bits += 8.0 * static_cast<double>(wire_size(m));
      out.coords += static_cast<double>(m.d_pad);
      out.outliers += static_cast<double>(m.outliers.size());
    }
    t0 = Clock::now();
    out.average = decode_aggregate(msgs, *table, global_seed);
    out.decode_s = seconds_since(t0);
    if (want_per_client) {
      for (const auto& m : msgs) out.per_client.push_back(decode_aggregate(std::span(&m, 1), *table, global_seed));
    }
    return out;
  }
  for (int c = 0; c < n; ++c) {
    auto s = client_seeds(trial_seed, c);
    std::vector<double> est;
    auto t0 = Clock::now();
    switch (scheme) {
      case Scheme::kBsq: {
        auto msg = bsq_encode(xs[c], p, b, s.priv);
        out.encode_s += seconds_since(t0);
        t0 = Clock::now();
        est = bsq_decode(msg);
        out.bits += static_cast<double>(msg.bits());
        out.coords += static_cast<double>(d);
        out.outliers += static_cast<double>(msg.outliers.size());
        break;
      }
      case Scheme::kQsgd: {
        auto msg = qsgd_encode(xs[c], b, s.priv);
        out.encode_s += seconds_since(t0);
        t0 = Clock::now();
        est = qsgd_decode(msg);
        out.bits += static_cast<double>(msg.bits());
        out.coords += static_cast<double>(d);
        break;
      }
      case Scheme::kMinmaxHadamard: {
        auto msg = minmax_hadamard_encode(xs[c], b, s.client, s.priv);
        out.encode_s += seconds_since(t0);
        t0 = Clock::now();
        est = minmax_hadamard_decode(msg);
        out.bits += static_cast<double>(msg.bits());
        out.coords += static_cast<double>(msg.d_pad);
        break;
      }
      default:
        est = xs[c];
        out.bits += 64.0 * static_cast<double>(d);
        out.coords += static_cast<double>(d);
        break;
    }
    for (std::size_t i = 0; i < d; ++i) out.average[i] += est[i] / n;
    out.decode_s += seconds_since(t0);
    if (want_per_client) out.per_client.push_back(std::move(est));
  }
  return out;
}

}  // namespace

Scheme parse_scheme(std::string_view s) {
  if (s == "quicfl") return Scheme::kQuicfl;
  if (s == "quicfl_alg1") return Scheme::kQuicflAlg1;
  if (s == "bsq") return Scheme::kBsq;
  if (s == "qsgd") return Scheme::kQsgd;
  if (s == "minmax_hadamard") return Scheme::kMinmaxHadamard;
  if (s == "uncompressed") return Scheme::kUncompressed;
  throw DomainError("unknown scheme '" + std::string(s) + "'");
}

Distribution parse_distribution(std::string_view s) {
  if (s == "lognormal") return Distribution::kLognormal;
  if (s == "normal") return Distribution::kNormal;
  if (s == "identical_lognormal") return Distribution::kIdenticalLognormal;
  if (s == "sparse_spike") return Distribution::kSparseSpike;
  throw DomainError("unknown distribution '" + std::string(s) + "'");
}

std::string to_string(Scheme s) {
  switch (s) {
    case Scheme::kQuicfl: return "quicfl";
    case Scheme::kQuicflAlg1: return "quicfl_alg1";
    case Scheme::kBsq: return "bsq";
    case Scheme::kQsgd: return "qsgd";
    case Scheme::kMinmaxHadamard: return "minmax_hadamard";
    case Scheme::kUncompressed: return "uncompressed";
  }
  return "?";
}

std::string to_string(Distribution d) {
  switch (d) {
    case Distribution::kLognormal: return "lognormal";
    case Distribution::kNormal: return "normal";
    case Distribution::kIdenticalLognormal: return "identical_lognormal";
    case Distribution::kSparseSpike: return "sparse_spike";
  }
  return "?";
}

double prf_gaussian(std::uint64_t seed, std::uint64_t i) noexcept {
  const double u1 = 1.0 - prf_uniform(seed, 2 * i, PrfDomain::kGeneric);
  const double u2 = prf_uniform(seed, 2 * i + 1, PrfDomain::kGeneric);
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2 * std::numbers::pi * u2);
}

std::vector<std::vector<double>> generate_inputs(Distribution dist, std::size_t d, int n,
                                                 std::uint64_t seed, std::size_t spike_k) {
  if (d == 0) throw DomainError("dimension must be at least 1");
  if (n < 1) throw DomainError("need at least one client");
  std::vector<std::vector<double>> out(n, std::vector<double>(d, 0.0));
  for (int c = 0; c < n; ++c) {
    const std::uint64_t s = derive_seed(seed, static_cast<std::uint64_t>(c));
    auto& v = out[c];
    switch (dist) {
      case Distribution::kNormal:
        for (std::size_t i = 0; i < d; ++i) v[i] = prf_gaussian(s, i);
        break;
      case Distribution::kLognormal:
        for (std::size_t i = 0; i < d; ++i) v[i] = std::exp(prf_gaussian(s, i));
        break;
      case Distribution::kIdenticalLognormal:
        if (c == 0) {
          for (std::size_t i = 0; i < d; ++i) v[i] = std::exp(prf_gaussian(seed, i));
        } else {
          v = out[0];
        }
        break;
      case Distribution::kSparseSpike: {
        const std::size_t k = std::clamp<std::size_t>(spike_k, 1, d);
        // Partial Fisher-Yates over the index range.
        std::map<std::size_t, std::size_t> swapped;
        auto at = [&](std::size_t i) {
          auto it = swapped.find(i);
          return it == swapped.end() ? i : it->second;
        };
        for (std::size_t j = 0; j < k; ++j) {
          const std::size_t pick = j + static_cast<std::size_t>(prf(s, j) % (d - j));
          const std::size_t a = at(j), b = at(pick);
          swapped[j] = b;
          swapped[pick] = a;
          v[b] = (prf(s, j + d) & 1) ? -1.0 : 1.0;
        }
        break;
      }
    }
  }
  return out;
}

DmeReport run_dme(const ExperimentConfig& cfg) {
  if (cfg.n < 1) throw DomainError("n must be at least 1");
  if (cfg.trials < 1) throw DomainError("trials must be at least 1");
  if (cfg.d < 1) throw DomainError("d must be at least 1");
  if (cfg.b < 1 || cfg.b > 8) throw DomainError("b must lie in 1..8");
  const int ell = cfg.ell >= 0 ? cfg.ell : (cfg.table ? cfg.table->config().ell : default_ell(cfg.b));
  const auto table = resolve_table(cfg.table, cfg.scheme, cfg.b, ell, cfg.m, cfg.p);
  const double p = cfg.p.value();

  std::vector<TrialResult> results(cfg.trials);
  parallel_for(cfg.trials, cfg.threads, [&](int trial) {
    const std::uint64_t ts = derive_seed(cfg.seed, static_cast<std::uint64_t>(trial));
    const auto xs = generate_inputs(cfg.dist, cfg.d, cfg.n, derive_seed(ts, 0), cfg.spike_k);
    std::vector<double> mean(cfg.d, 0.0);
    double energy = 0;
    for (const auto& x : xs) {
      for (std::size_t i = 0; i < cfg.d; ++i) mean[i] += x[i] / cfg.n;
      energy += sqnorm(x) / cfg.n;
    }
    RoundOutput round = compress_round(cfg.scheme, xs, table.get(), cfg.b, p, ts, true);
    TrialResult& r = results[trial];
    r.nmse = energy > 0 ? sqdist(round.average, mean) / energy : 0.0;
    r.vnmse.resize(cfg.n);
    for (int c = 0; c < cfg.n; ++c) {
      const double e = sqnorm(xs[c]);
      r.vnmse[c] = e > 0 ? sqdist(round.per_client[c], xs[c]) / e
                         : std::numeric_limits<double>::quiet_NaN();
    }
    r.bits = round.bits;
    r.coords = round.coords;
    r.outliers = round.outliers;
    r.encode_s = round.encode_s;
    r.decode_s = round.decode_s;
  });

  DmeReport rep;
  rep.vnmse_per_client.assign(cfg.n, 0.0);
  double sum = 0, sum2 = 0, bits = 0, coords = 0, outliers = 0;
  for (const auto& r : results) {
    sum += r.nmse;
    sum2 += r.nmse * r.nmse;
    for (int c = 0; c < cfg.n; ++c) rep.vnmse_per_client[c] += r.vnmse[c] / cfg.trials;
    bits += r.bits;
    coords += r.coords;
    outliers += r.outliers;
    rep.encode_seconds += r.encode_s;
    rep.decode_seconds += r.decode_s;
  }
  const double k = cfg.trials;
  rep.nmse = sum / k;
  rep.nmse_stderr = k > 1 ? std::sqrt(std::max(0.0, (sum2 - sum * sum / k) / (k - 1)) / k) : 0.0;
  for (double v : rep.vnmse_per_client) rep.vnmse_mean += v / cfg.n;
  rep.bits_per_coord = bits / coords;
  rep.outlier_fraction = outliers / coords;
  rep.chi_estimate = table ? estimate_quantizer_mse(*table) : std::numeric_limits<double>::quiet_NaN();
  return rep;
}

double estimate_quantizer_mse(const QuantTable& t, int nodes) {
  if (nodes < 3) throw DomainError("need at least 3 integration nodes");
  const double T = t.config().threshold;
  const double h = 2 * T / (nodes - 1);
  double total = 0;
  for (int i = 0; i < nodes; ++i) {
    const double z = i == nodes - 1 ? T : -T + i * h;
    const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    total += w * quantizer_mse_at(z, t) * normal_pdf(z);
  }
  return total * h / (normal_cdf(T) - normal_cdf(-T));
}

double estimate_quantizer_mse(const QuantTable& t, std::span<const double> z,
                              std::span<const double> weight) {
  if (z.size() != weight.size() || z.empty()) throw DomainError("need matching nonempty z and weight");
  double total = 0, mass = 0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    total += weight[i] * quantizer_mse_at(z[i], t);
    mass += weight[i];
  }
  if (!(mass > 0)) throw DomainError("weights must have positive mass");
  return total / mass;
}

double one_bit_reference_integrated_mse(int nodes) {
  if (nodes < 3) throw DomainError("need at least 3 integration nodes");
  const double T = compute_threshold(Rational{1, 512});
  const double h = 2 * T / (nodes - 1);
  double total = 0;
  for (int i = 0; i < nodes; ++i) {
    const double z = i == nodes - 1 ? T : -T + i * h;
    const double w = (i == 0 || i == nodes - 1) ? 0.5 : 1.0;
    total += w * one_bit_reference_mse(z) * normal_pdf(z);
  }
  return total * h / (normal_cdf(T) - normal_cdf(-T));
}

SweepReport sweep(std::span<const int> bs, std::span<const int> ells, std::span<const Rational> ps,
                  int m, const SolverOptions& opts, int integration_nodes) {
  SweepReport rep;
  if (ells.empty()) return rep;
  const int ell_max = *std::max_element(ells.begin(), ells.end());
  for (const Rational& p : ps) {
    for (int b : bs) {
      // Solve the whole ladder 0..ell_max so every level can start from the
      // level below; report the requested levels.
      std::optional<QuantTable> prev;
      double prev_chi = 0, prev_obj = 0;
      std::string failure;
      for (int ell = 0; ell <= ell_max; ++ell) {
        SweepRow row{b, ell, p, m, std::numeric_limits<double>::quiet_NaN(),
                     std::numeric_limits<double>::quiet_NaN(), "solved", "ok"};
        if (!failure.empty()) {
          row.status = "failed: " + failure;
        } else {
          try {
            QuantConfig cfg = QuantConfig::make(b, ell, m, p);
            SolverOptions o = opts;
            if (prev) o.warm_start = embed_shared_bit(prev->r_values(), b, ell - 1);
            SolverResult res = solve_table(cfg, o);
            row.chi = estimate_quantizer_mse(res.table, integration_nodes);
            row.objective = res.objective;
            if (prev && row.chi > prev_chi) {
              // The embedded table realizes exactly the ell-1 scheme.
              row.chi = prev_chi;
              row.objective = prev_obj;
              row.source = "embedded";
              prev = QuantTable(cfg, embed_shared_bit(prev->r_values(), b, ell - 1));
            } else {
              prev = res.table.without_s();
            }
            prev_chi = row.chi;
            prev_obj = row.objective;
          } catch (const Error& e) {
            failure = e.what();
            row.status = "failed: " + failure;
          }
        }
        if (std::find(ells.begin(), ells.end(), ell) != ells.end()) rep.rows.push_back(row);
      }
    }
  }
  // Report the monotonicity properties over the rows that succeeded.
  for (const auto& a : rep.rows) {
    for (const auto& c : rep.rows) {
      if (a.status != "ok" || c.status != "ok" || !(a.p == c.p)) continue;
      if (a.b == c.b && c.ell > a.ell && c.chi > a.chi) rep.monotone_in_ell = false;
      if (a.ell == c.ell && c.b > a.b && c.chi > a.chi) rep.monotone_in_b = false;
    }
  }
  return rep;
}

void write_sweep_csv(std::ostream& out, const SweepReport& report) {
  out << "b,ell,p,p_value,m,chi,objective,source,status\n";
  for (const auto& r : report.rows) {
    out << r.b << ',' << r.ell << ',' << r.p.str() << ',' << fmt9(r.p.value()) << ',' << r.m << ','
        << fmt9(r.chi) << ',' << fmt9(r.objective) << ',' << r.source << ',' << r.status << '\n';
  }
}

void write_dme_csv_header(std::ostream& out) {
  out << "scheme,dist,n,d,b,ell,p,trials,seed,nmse,nmse_stderr,nmse_times_n,vnmse_mean,chi,"
         "bits_per_coord,outlier_fraction,encode_seconds,decode_seconds\n";
}

void write_dme_csv_row(std::ostream& out, const ExperimentConfig& cfg, const DmeReport& r) {
  const int ell = cfg.ell >= 0 ? cfg.ell : (cfg.table ? cfg.table->config().ell : default_ell(cfg.b));
  out << to_string(cfg.scheme) << ',' << to_string(cfg.dist) << ',' << cfg.n << ',' << cfg.d << ','
      << cfg.b << ',' << ell << ',' << cfg.p.str() << ',' << cfg.trials << ',' << cfg.seed << ','
      << fmt9(r.nmse) << ',' << fmt9(r.nmse_stderr) << ',' << fmt9(r.nmse * cfg.n) << ','
      << fmt9(r.vnmse_mean) << ',' << fmt9(r.chi_estimate) << ',' << fmt9(r.bits_per_coord) << ','
      << fmt9(r.outlier_fraction) << ',' << fmt9(r.encode_seconds) << ',' << fmt9(r.decode_seconds)
      << '\n';
}

PowerReport power_iteration(const PowerConfig& cfg) {
  if (cfg.n < 1) throw DomainError("n must be at least 1");
  if (cfg.d < 1) throw DomainError("d must be at least 1");
  if (cfg.rows_per_client < 1) throw DomainError("each client needs at least one matrix row");
  if (cfg.rounds < 0) throw DomainError("rounds must be nonnegative");
  if (cfg.scheme != Scheme::kQuicfl && cfg.scheme != Scheme::kUncompressed) {
    throw DomainError("power iteration supports the quicfl and uncompressed schemes");
  }
  const int ell = cfg.ell >= 0 ? cfg.ell : (cfg.table ? cfg.table->config().ell : default_ell(cfg.b));
  const auto table = resolve_table(cfg.table, cfg.scheme, cfg.b, ell, cfg.m, cfg.p);
  const std::size_t d = cfg.d;

  // Rows a = Q (sqrt(lambda) .* g) with a fixed RHT basis Q, so the
  // covariance has eigenvalues lambda: a leading 1, then 0.5 decaying.
  const RotationSpec basis = RotationSpec::make(d, derive_seed(cfg.seed, 11));
  std::vector<double> sqrt_lambda(d);
  for (std::size_t k = 0; k < d; ++k)
    sqrt_lambda[k] = std::sqrt(k == 0 ? 1.0 : 0.5 * std::exp(-4.0 * k / d));
  std::vector<std::vector<std::vector<double>>> rows(cfg.n);
  for (int c = 0; c < cfg.n; ++c) {
    for (int j = 0; j < cfg.rows_per_client; ++j) {
      const std::uint64_t s = derive_seed(cfg.seed, 12, static_cast<std::uint64_t>(c) * 1000003ULL + j);
      std::vector<double> g(d);
      for (std::size_t k = 0; k < d; ++k) g[k] = sqrt_lambda[k] * prf_gaussian(s, k);
      auto y = rht_forward(g, basis);
      y.resize(d);
      rows[c].push_back(std::move(y));
    }
  }

  auto normalize = [](std::vector<double>& v) {
    const double nrm = std::sqrt(sqnorm(v));
    if (nrm > 0)
      for (double& x : v) x /= nrm;
    return nrm;
  };
  // One local power step: u = normalize(A^T A v).
  auto local_step = [&](int c, const std::vector<double>& v) {
    std::vector<double> u(d, 0.0);
    for (const auto& a : rows[c]) {
      double dot = 0;
      for (std::size_t k = 0; k < d; ++k) dot += a[k] * v[k];
      for (std::size_t k = 0; k < d; ++k) u[k] += dot * a[k];
    }
    if (normalize(u) == 0) throw DomainError("client matrix has rank 0");
    return u;
  };

  std::vector<double> v0(d);
  for (std::size_t k = 0; k < d; ++k) v0[k] = prf_gaussian(derive_seed(cfg.seed, 13), k);
  normalize(v0);
  std::vector<double> v = v0, ref = v0;
  PowerReport rep;
  for (int round = 0; round < cfg.rounds; ++round) {
    auto step = [&](std::vector<double>& est, Scheme scheme) {
      std::vector<std::vector<double>> diffs(cfg.n);
      for (int c = 0; c < cfg.n; ++c) {
        diffs[c] = local_step(c, est);
        for (std::size_t k = 0; k < d; ++k) diffs[c][k] -= est[k];
      }
      const std::uint64_t ts = derive_seed(cfg.seed, 14, static_cast<std::uint64_t>(round));
      RoundOutput out = compress_round(scheme, diffs, table.get(), cfg.b, cfg.p.value(), ts, false);
      for (std::size_t k = 0; k < d; ++k) est[k] += cfg.learning_rate * out.average[k];
      normalize(est);
    };
    step(v, cfg.scheme);
    step(ref, Scheme::kUncompressed);
    rep.error_per_round.push_back(std::sqrt(sqdist(v, ref)));
  }
  rep.estimate = v;
  rep.reference = ref;
  return rep;
}

}  // namespace quicfl
