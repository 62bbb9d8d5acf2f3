#include "quicfl/solver.hpp"

#include <Eigen/Dense>
#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <thread>

#include "quicfl/normal.hpp"
#include "quicfl/prf.hpp"

namespace quicfl {

namespace {

using Eigen::MatrixXd;
using Eigen::VectorXd;

// Lower convex hull of every row of r, merged across rows in slope order.
// The slope of the segment between sorted neighbours a < b at quantile q is
// a + b - 2q, so the order does not depend on q and one sort serves all m
// quantiles.
struct Hull {
  struct Segment {
    double key;
    int k;  // segment joins sorted positions k and k+1 of its row
    int h;
    double len;
  };
  int H = 0, X = 0;
  std::vector<int> order;  // order[h*X + k] = column of the k-th smallest
  std::vector<Segment> segs;
  double base = 0;  // sum of the row minima

  Hull(std::span<const double> r, int rows, int cols) : H(rows), X(cols), order(r.size()) {
    for (int h = 0; h < H; ++h) {
      int* o = order.data() + h * X;
      for (int x = 0; x < X; ++x) o[x] = x;
      std::stable_sort(o, o + X, [&](int a, int b) { return r[h * X + a] < r[h * X + b]; });
      base += r[h * X + o[0]];
      for (int k = 0; k + 1 < X; ++k) {
        double a = r[h * X + o[k]], b = r[h * X + o[k + 1]];
        if (b > a) segs.push_back({a + b, k, h, b - a});
      }
    }
    std::sort(segs.begin(), segs.end(), [](const Segment& s, const Segment& t) {
      if (s.key != t.key) return s.key < t.key;
      if (s.k != t.k) return s.k < t.k;
      return s.h < t.h;
    });
  }

  int cell(int h, int k) const { return h * X + order[h * X + k]; }
};

// Per-quantile optimum: rows other than `hstar` sit deterministically at
// sorted position pos[h]; row hstar mixes cells A and B with weight t on B.
struct LpPoint {
  int hstar = -1;
  int a = -1, b = -1;
  double t = 0;
};

// Visits the LP optimum for each quantile in ascending order. Throws
// InfeasibleStep naming the first quantile out of reach.
template <class Visit>
void walk(const Hull& hull, std::span<const double> r, std::span<const double> qs,
          Visit&& visit) {
  const int H = hull.H;
  std::vector<int> pos(H, 0);
  std::size_t j = 0;
  double cum = hull.base;
  double top = hull.base;
  for (const auto& s : hull.segs) top += s.len;
  double prev_q = -std::numeric_limits<double>::infinity();
  for (std::size_t qi = 0; qi < qs.size(); ++qi) {
    const double q = qs[qi];
    if (q < prev_q) throw DomainError("quantiles must be ascending");
    prev_q = q;
    const double target = H * q;
    const double slack = 1e-9 * (1.0 + std::abs(target));
    if (target < hull.base - slack || target > top + slack) {
      throw InfeasibleStep("quantile " + std::to_string(qi) + " (q=" + std::to_string(q) +
                           ") lies outside the reachable mean range; the boundary "
                           "invariant is violated");
    }
    while (j < hull.segs.size() && cum + hull.segs[j].len < target) {
      cum += hull.segs[j].len;
      pos[hull.segs[j].h] = hull.segs[j].k + 1;
      ++j;
    }
    LpPoint pt;
    if (hull.segs.empty()) {
      // Every row constant: nothing to mix.
    } else if (j == hull.segs.size()) {
      const auto& s = hull.segs.back();
      pt = {s.h, hull.cell(s.h, s.k), hull.cell(s.h, s.k + 1), 1.0};
    } else {
      const auto& s = hull.segs[j];
      double t = std::clamp((target - cum) / s.len, 0.0, 1.0);
      pt = {s.h, hull.cell(s.h, s.k), hull.cell(s.h, s.k + 1), t};
    }
    visit(qi, q, pos, pt);
  }
  (void)r;
}

void check_r(std::span<const double> r, const QuantConfig& cfg) {
  check_shapes(cfg, r, nullptr);
}

// ---------------------------------------------------------------------------
// Parametrization and constraints of the Newton driver.

struct Problem {
  const QuantConfig* cfg = nullptr;
  int H = 0, X = 0, n = 0, nt = 0;
  std::vector<int> var;     // r index -> theta index
  std::vector<double> sgn;  // r index -> sign
  MatrixXd eq;              // eq * theta = eq_rhs
  VectorXd eq_rhs;
  MatrixXd G;               // G * theta >= 0

  std::vector<double> to_r(const VectorXd& th) const {
    std::vector<double> r(n);
    for (int i = 0; i < n; ++i) r[i] = sgn[i] * th[var[i]];
    return r;
  }
  VectorXd to_theta(std::span<const double> r) const {
    VectorXd th = VectorXd::Zero(nt);
    std::vector<int> seen(nt, 0);
    for (int i = 0; i < n; ++i) {
      th[var[i]] += sgn[i] * r[i];
      seen[var[i]]++;
    }
    for (int j = 0; j < nt; ++j) th[j] /= seen[j];
    return th;
  }
  double value(const VectorXd& th) const {
    try {
      return lp_value(to_r(th), *cfg);
    } catch (const InfeasibleStep&) {
      return std::numeric_limits<double>::infinity();
    }
  }
};

Problem build_problem(const QuantConfig& cfg, const SolverOptions& opts) {
  Problem P;
  P.cfg = &cfg;
  P.H = cfg.rows();
  P.X = cfg.cols();
  P.n = P.H * P.X;
  P.var.resize(P.n);
  P.sgn.assign(P.n, 1.0);
  const int H = P.H, X = P.X;
  if (opts.enforce_symmetry) {
    const int half = X / 2;
    P.nt = H * half;
    for (int h = 0; h < H; ++h) {
      for (int x = 0; x < half; ++x) {
        int j = h * half + x;
        P.var[h * X + x] = j;
        P.var[(H - 1 - h) * X + (X - 1 - x)] = j;
        P.sgn[(H - 1 - h) * X + (X - 1 - x)] = -1.0;
      }
    }
  } else {
    P.nt = P.n;
    for (int i = 0; i < P.n; ++i) P.var[i] = i;
  }
  auto to_theta_row = [&](const std::vector<std::pair<int, double>>& terms) {
    VectorXd row = VectorXd::Zero(P.nt);
    for (auto [i, c] : terms) row[P.var[i]] += c * P.sgn[i];
    return row;
  };

  std::vector<VectorXd> eqs;
  std::vector<double> rhs;
  if (opts.enforce_boundary) {
    std::vector<std::pair<int, double>> lo, hi;
    for (int h = 0; h < H; ++h) {
      lo.push_back({h * X, 1.0});
      hi.push_back({h * X + X - 1, 1.0});
    }
    eqs.push_back(to_theta_row(lo));
    rhs.push_back(-H * cfg.threshold);
    if (!opts.enforce_symmetry) {
      eqs.push_back(to_theta_row(hi));
      rhs.push_back(H * cfg.threshold);
    }
  }
  P.eq.resize(static_cast<Eigen::Index>(eqs.size()), P.nt);
  P.eq_rhs.resize(static_cast<Eigen::Index>(eqs.size()));
  for (std::size_t k = 0; k < eqs.size(); ++k) {
    P.eq.row(k) = eqs[k].transpose();
    P.eq_rhs[k] = rhs[k];
  }

  std::vector<VectorXd> rows;
  if (opts.enforce_monotone) {
    auto idx = [X](int h, int x) { return h * X + x; };
    for (int h = 0; h < H; ++h)
      for (int x = 0; x + 1 < X; ++x)
        rows.push_back(to_theta_row({{idx(h, x + 1), 1.0}, {idx(h, x), -1.0}}));
    for (int h = 0; h + 1 < H; ++h)
      for (int x = 0; x < X; ++x)
        rows.push_back(to_theta_row({{idx(h + 1, x), 1.0}, {idx(h, x), -1.0}}));
    // The interpolated encoder walks column pairs in x-major order; this keeps
    // that order consistent with the LP's slope order so both agree.
    for (int x = 0; x + 2 < X; ++x)
      rows.push_back(to_theta_row({{idx(0, x + 1), 1.0},
                                   {idx(0, x + 2), 1.0},
                                   {idx(H - 1, x), -1.0},
                                   {idx(H - 1, x + 1), -1.0}}));
  }
  // Symmetry maps many rows onto the same theta row; keep the first copy.
  std::map<std::vector<double>, int> unique;
  std::vector<VectorXd> kept;
  for (auto& row : rows) {
    if (row.cwiseAbs().sum() == 0) continue;
    std::vector<double> key(row.data(), row.data() + row.size());
    if (unique.emplace(std::move(key), static_cast<int>(kept.size())).second) kept.push_back(row);
  }
  P.G.resize(static_cast<Eigen::Index>(kept.size()), P.nt);
  for (std::size_t k = 0; k < kept.size(); ++k) P.G.row(k) = kept[k].transpose();
  return P;
}

// Gradient and Hessian of lp_value in theta, with the LP structure frozen at
// the current point. For a frozen structure the per-quantile cost is
//   sum_D (q - r_d)^2 + (q - mu)^2 + (mu - r_A)(r_B - mu),  mu = H q - sum_D r_d,
// a quadratic in r.
void grad_hess(const Problem& P, const VectorXd& th, VectorXd& g, MatrixXd& Hs) {
  const auto r = P.to_r(th);
  const int H = P.H;
  g = VectorXd::Zero(P.nt);
  Hs = MatrixXd::Zero(P.nt, P.nt);
  Hull hull(r, H, P.X);
  std::vector<int> D;
  D.reserve(H);
  auto addg = [&](int i, double v) { g[P.var[i]] += P.sgn[i] * v; };
  auto addh = [&](int i, int k, double v) {
    Hs(P.var[i], P.var[k]) += P.sgn[i] * P.sgn[k] * v;
  };
  walk(hull, r, P.cfg->quantiles, [&](std::size_t, double q, const std::vector<int>& pos,
                                      const LpPoint& pt) {
    D.clear();
    for (int h = 0; h < H; ++h)
      if (h != pt.hstar) D.push_back(hull.cell(h, pos[h]));
    if (pt.hstar < 0) {
      for (int d : D) {
        addg(d, -2 * (q - r[d]));
        addh(d, d, 2);
      }
      return;
    }
    const double a = r[pt.a], b = r[pt.b];
    double mu = H * q;
    for (int d : D) mu -= r[d];
    for (int d : D) {
      addg(d, 2 * r[d] - a - b);
      addh(d, d, 2);
      addh(d, pt.a, -1);
      addh(pt.a, d, -1);
      addh(d, pt.b, -1);
      addh(pt.b, d, -1);
    }
    addg(pt.a, -(b - mu));
    addg(pt.b, mu - a);
    addh(pt.a, pt.b, -1);
    addh(pt.b, pt.a, -1);
  });
  const double scale = 1.0 / (static_cast<double>(P.cfg->m) * H);
  g *= scale;
  Hs *= scale;
}

MatrixXd null_space(const MatrixXd& A, int n) {
  if (A.rows() == 0) return MatrixXd::Identity(n, n);
  Eigen::ColPivHouseholderQR<MatrixXd> qr(A.transpose());
  qr.setThreshold(1e-10);
  const int rank = static_cast<int>(qr.rank());
  MatrixXd Q = qr.householderQ() * MatrixXd::Identity(n, n);
  return Q.rightCols(n - rank);
}

struct Attempt {
  std::vector<double> r;
  double value = std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::vector<double> history;
};

Attempt newton_descent(const Problem& P, VectorXd th, const SolverOptions& opts) {
  constexpr double kActive = 1e-9;
  const int nc = static_cast<int>(P.G.rows());
  const int ne = static_cast<int>(P.eq.rows());
  Attempt out;
  double f = P.value(th);
  out.history.push_back(f);
  int small = 0;
  int it = 0;
  VectorXd g;
  MatrixXd Hs;
  for (; it < opts.max_iters; ++it) {
    grad_hess(P, th, g, Hs);
    const VectorXd slack = P.G * th;
    std::vector<int> act;
    for (int i = 0; i < nc; ++i)
      if (slack[i] <= kActive) act.push_back(i);

    auto stacked = [&](const std::vector<int>& a) {
      MatrixXd A(ne + static_cast<int>(a.size()), P.nt);
      if (ne) A.topRows(ne) = P.eq;
      for (std::size_t k = 0; k < a.size(); ++k) A.row(ne + k) = P.G.row(a[k]);
      return A;
    };
    auto multipliers = [&](const MatrixXd& A) -> VectorXd {
      Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A.transpose());
      VectorXd coef = cod.solve(g);
      return coef.tail(coef.size() - ne);
    };
    if (!act.empty()) {
      VectorXd lam = multipliers(stacked(act));
      std::vector<int> keep;
      for (std::size_t k = 0; k < act.size(); ++k)
        if (lam[k] >= -1e-12) keep.push_back(act[k]);
      act.swap(keep);
    }

    bool moved = false;
    double improvement = 0;
    for (int attempt = 0; attempt < 2 * nc + 2; ++attempt) {
      const MatrixXd A = stacked(act);
      const MatrixXd N = null_space(A, P.nt);
      if (N.cols() == 0) break;
      VectorXd lam;
      if (!act.empty()) lam = multipliers(A);
      const VectorXd gr = N.transpose() * g;
      const MatrixXd Hr = N.transpose() * Hs * N;
      Eigen::SelfAdjointEigenSolver<MatrixXd> eig(Hr);
      VectorXd w = eig.eigenvalues().cwiseAbs();
      const double wmax = w.size() ? w.maxCoeff() : 0.0;
      const double floor = 1e-6 * std::max(1.0, wmax);
      for (Eigen::Index k = 0; k < w.size(); ++k) w[k] = std::max(w[k], floor);
      const MatrixXd& U = eig.eigenvectors();

      std::vector<char> in_act(nc, 0);
      for (int a : act) in_act[a] = 1;
      bool ok = false;
      VectorXd next;
      double fn = f;
      for (int kind = 0; kind < 2 && !ok; ++kind) {
        VectorXd step = kind == 0
                            ? VectorXd(-(U * ((U.transpose() * gr).cwiseQuotient(w))))
                            : VectorXd(-gr / std::max(wmax, floor));
        const VectorXd d = N * step;
        const VectorXd Gd = P.G * d;
        double amax = 1.0;
        for (int i = 0; i < nc; ++i) {
          if (!in_act[i] && Gd[i] < -1e-15) amax = std::min(amax, std::max(0.0, slack[i]) / -Gd[i]);
        }
        for (double al = amax; al > 1e-12; al *= 0.5) {
          next = th + al * d;
          fn = P.value(next);
          if (fn < f) {
            ok = true;
            break;
          }
        }
      }
      if (ok) {
        improvement = f - fn;
        th = next;
        f = fn;
        out.history.push_back(f);
        moved = true;
        break;
      }
      if (act.empty() || lam.minCoeff() >= 0) break;
      Eigen::Index worst;
      lam.minCoeff(&worst);
      act.erase(act.begin() + worst);
    }
    if (!moved) break;
    small = improvement < opts.tol ? small + 1 : 0;
    if (small >= 3) {
      ++it;
      break;
    }
  }
  out.r = P.to_r(th);
  out.value = f;
  out.iterations = it;
  return out;
}

// Sorted truncated-normal samples laid out column-major, so every row and
// column is increasing and the x-major ordering constraint holds. Then
// symmetrized and shifted onto the boundary means.
std::vector<double> initial_r(const QuantConfig& cfg, const SolverOptions& opts, int k) {
  const int H = cfg.rows(), X = cfg.cols(), n = H * X;
  std::vector<double> u(n);
  if (k == 0) {
    for (int i = 0; i < n; ++i) u[i] = (i + 0.5) / n;
  } else {
    const std::uint64_t stream = derive_seed(opts.seed, static_cast<std::uint64_t>(k));
    for (int i = 0; i < n; ++i) u[i] = prf_uniform(stream, i, PrfDomain::kGeneric);
    std::sort(u.begin(), u.end());
  }
  const double lo = normal_cdf(-cfg.threshold);
  const double span = normal_cdf(cfg.threshold) - lo;
  std::vector<double> r(n);
  for (int x = 0; x < X; ++x)
    for (int h = 0; h < H; ++h) r[h * X + x] = normal_quantile(lo + u[x * H + h] * span);
  if (opts.enforce_symmetry) {
    std::vector<double> s(n);
    for (int h = 0; h < H; ++h)
      for (int x = 0; x < X; ++x)
        s[h * X + x] = 0.5 * (r[h * X + x] - r[(H - 1 - h) * X + (X - 1 - x)]);
    r = s;
  }
  if (opts.enforce_boundary) {
    double m0 = 0, m1 = 0;
    for (int h = 0; h < H; ++h) {
      m0 += r[h * X];
      m1 += r[h * X + X - 1];
    }
    for (int h = 0; h < H; ++h) {
      r[h * X] += -cfg.threshold - m0 / H;
      r[h * X + X - 1] += cfg.threshold - m1 / H;
    }
  }
  return r;
}

bool feasible(const Problem& P, const VectorXd& th) {
  if (P.G.rows() && (P.G * th).minCoeff() < -1e-9) return false;
  if (P.eq.rows() && (P.eq * th - P.eq_rhs).cwiseAbs().maxCoeff() > 1e-9) return false;
  return true;
}

std::vector<double> start_for(const QuantConfig& cfg, const SolverOptions& opts, int k) {
  if (!opts.warm_start) return initial_r(cfg, opts, k);
  if (k == 0) return *opts.warm_start;
  auto fresh = initial_r(cfg, opts, k - 1);
  std::vector<double> r(fresh.size());
  for (std::size_t i = 0; i < r.size(); ++i) r[i] = 0.7 * (*opts.warm_start)[i] + 0.3 * fresh[i];
  return r;
}

}  // namespace

std::vector<double> s_step(std::span<const double> r, const QuantConfig& cfg) {
  check_r(r, cfg);
  const int H = cfg.rows(), X = cfg.cols(), m = cfg.m;
  std::vector<double> s(static_cast<std::size_t>(H) * m * X, 0.0);
  Hull hull(r, H, X);
  walk(hull, r, cfg.quantiles, [&](std::size_t qi, double, const std::vector<int>& pos,
                                   const LpPoint& pt) {
    for (int h = 0; h < H; ++h) {
      double* row = s.data() + (static_cast<std::size_t>(h) * m + qi) * X;
      if (h == pt.hstar) {
        row[pt.a - h * X] += 1.0 - pt.t;
        row[pt.b - h * X] += pt.t;
      } else {
        row[hull.cell(h, pos[h]) - h * X] = 1.0;
      }
    }
  });
  return s;
}

double lp_value(std::span<const double> r, const QuantConfig& cfg) {
  check_r(r, cfg);
  const int H = cfg.rows();
  Hull hull(r, H, cfg.cols());
  double total = 0;
  try {
    walk(hull, r, cfg.quantiles, [&](std::size_t, double q, const std::vector<int>& pos,
                                     const LpPoint& pt) {
      double c = 0;
      for (int h = 0; h < H; ++h) {
        if (h == pt.hstar) continue;
        double e = q - r[hull.cell(h, pos[h])];
        c += e * e;
      }
      if (pt.hstar >= 0) {
        double ea = q - r[pt.a], eb = q - r[pt.b];
        c += (1 - pt.t) * ea * ea + pt.t * eb * eb;
      }
      total += c;
    });
  } catch (const InfeasibleStep&) {
    return std::numeric_limits<double>::infinity();
  }
  return total / (static_cast<double>(cfg.m) * H);
}

double objective(std::span<const double> s, std::span<const double> r, const QuantConfig& cfg) {
  check_r(r, cfg);
  const int H = cfg.rows(), X = cfg.cols(), m = cfg.m;
  if (s.size() != static_cast<std::size_t>(H) * m * X) throw StructuralError("s has the wrong size");
  double total = 0;
  for (int h = 0; h < H; ++h)
    for (int q = 0; q < m; ++q)
      for (int x = 0; x < X; ++x) {
        double e = cfg.quantiles[q] - r[h * X + x];
        total += s[(static_cast<std::size_t>(h) * m + q) * X + x] * e * e;
      }
  return total / (static_cast<double>(m) * H);
}

double max_unbias_violation(std::span<const double> s, std::span<const double> r,
                            const QuantConfig& cfg) {
  const int H = cfg.rows(), X = cfg.cols(), m = cfg.m;
  double worst = 0;
  for (int q = 0; q < m; ++q) {
    double mean = 0;
    for (int h = 0; h < H; ++h)
      for (int x = 0; x < X; ++x) mean += s[(static_cast<std::size_t>(h) * m + q) * X + x] * r[h * X + x];
    worst = std::max(worst, std::abs(mean / H - cfg.quantiles[q]));
  }
  return worst;
}

RStepResult r_step(std::span<const double> s, const QuantConfig& cfg, const RStepOptions& opts) {
  return r_step(s, cfg.quantiles, cfg.b, cfg.ell, cfg.threshold, opts);
}

RStepResult r_step(std::span<const double> s, std::span<const double> quantiles, int b, int ell,
                   double threshold, const RStepOptions& opts) {
  const int H = 1 << ell, X = 1 << b, n = H * X;
  const int m = static_cast<int>(quantiles.size());
  if (s.size() != static_cast<std::size_t>(n) * m) throw StructuralError("s has the wrong size");
  auto sv = [&](int h, int q, int x) { return s[(static_cast<std::size_t>(h) * m + q) * X + x]; };

  // Objective: sum_i w_i r_i^2 - 2 c_i r_i + const.
  VectorXd w = VectorXd::Zero(n), c = VectorXd::Zero(n);
  for (int h = 0; h < H; ++h)
    for (int q = 0; q < m; ++q)
      for (int x = 0; x < X; ++x) {
        w[h * X + x] += sv(h, q, x);
        c[h * X + x] += sv(h, q, x) * quantiles[q];
      }

  std::vector<VectorXd> rows;
  std::vector<double> rhs;
  for (int q = 0; q < m; ++q) {
    VectorXd row(n);
    for (int h = 0; h < H; ++h)
      for (int x = 0; x < X; ++x) row[h * X + x] = sv(h, q, x) / H;
    rows.push_back(row);
    rhs.push_back(quantiles[q]);
  }
  if (opts.enforce_symmetry) {
    for (int h = 0; h < H; ++h)
      for (int x = 0; x < X; ++x) {
        int i = h * X + x, k = (H - 1 - h) * X + (X - 1 - x);
        if (i >= k) continue;
        VectorXd row = VectorXd::Zero(n);
        row[i] = 1;
        row[k] = 1;
        rows.push_back(row);
        rhs.push_back(0);
      }
  }
  if (opts.enforce_boundary) {
    VectorXd lo = VectorXd::Zero(n), hi = VectorXd::Zero(n);
    for (int h = 0; h < H; ++h) {
      lo[h * X] = 1;
      hi[h * X + X - 1] = 1;
    }
    rows.push_back(lo);
    rhs.push_back(-H * threshold);
    rows.push_back(hi);
    rhs.push_back(H * threshold);
  }
  MatrixXd A(static_cast<Eigen::Index>(rows.size()), n);
  VectorXd bvec(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) {
    A.row(k) = rows[k].transpose();
    bvec[k] = rhs[k];
  }

  // Null-space method: particular min-norm solution plus the best move
  // inside null(A), itself min-norm where the reduced Hessian is singular.
  Eigen::CompleteOrthogonalDecomposition<MatrixXd> cod(A);
  cod.setThreshold(1e-12);
  VectorXd rp = cod.solve(bvec);
  double resid = (A * rp - bvec).cwiseAbs().maxCoeff();
  if (resid > 1e-8) {
    throw InfeasibleStep("unbiasedness equalities are inconsistent for this s (residual " +
                         std::to_string(resid) + ")");
  }
  MatrixXd N = null_space(A, n);
  RStepResult out;
  VectorXd r = rp;
  if (N.cols() > 0) {
    MatrixXd R = N.transpose() * w.asDiagonal() * N;
    VectorXd rhs_z = N.transpose() * (c - w.cwiseProduct(rp));
    Eigen::CompleteOrthogonalDecomposition<MatrixXd> red(R);
    red.setThreshold(1e-12);
    VectorXd z = red.solve(rhs_z);
    out.rank_deficiency = static_cast<int>(N.cols() - red.rank());
    r += N * z;
  }
  out.r.assign(r.data(), r.data() + n);
  out.max_unbias_violation = 0;
  for (int q = 0; q < m; ++q) out.max_unbias_violation = std::max(out.max_unbias_violation, std::abs(rows[q].dot(r) - quantiles[q]));
  return out;
}

SolverResult solve_table(const QuantConfig& cfg, const SolverOptions& opts) {
  if (opts.restarts < 1) throw DomainError("restarts must be at least 1");
  if (opts.max_iters < 1) throw DomainError("max_iters must be at least 1");
  if (!(opts.tol > 0)) throw DomainError("tol must be positive");
  const int n = cfg.rows() * cfg.cols();
  if (n > kMaxSolverCells) {
    throw DomainError("2^(b+ell) = " + std::to_string(n) + " exceeds the dense solver limit of " +
                      std::to_string(kMaxSolverCells));
  }
  if (opts.warm_start && opts.warm_start->size() != static_cast<std::size_t>(n)) {
    throw StructuralError("warm start has the wrong size");
  }
  const Problem P = build_problem(cfg, opts);

  std::vector<std::optional<Attempt>> attempts(opts.restarts);
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int k; (k = next.fetch_add(1)) < opts.restarts;) {
      VectorXd th = P.to_theta(start_for(cfg, opts, k));
      if (!feasible(P, th)) continue;
      attempts[k] = newton_descent(P, th, opts);
    }
  };
  const int nthreads = std::clamp(opts.threads, 1, opts.restarts);
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int i = 0; i < nthreads; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }

  std::optional<SolverResult> best, best_infeasible;
  for (int k = 0; k < opts.restarts; ++k) {
    if (!attempts[k] || !std::isfinite(attempts[k]->value)) continue;
    const Attempt& a = *attempts[k];
    std::vector<double> s = s_step(a.r, cfg);
    SolverResult res{QuantTable(cfg, a.r, s), objective(s, a.r, cfg),
                     max_unbias_violation(s, a.r, cfg), a.iterations, k, a.history};
    auto& slot = res.max_unbias_violation <= 1e-6 ? best : best_infeasible;
    if (!slot || res.objective < slot->objective) slot = std::move(res);
  }
  if (!best) {
    throw SolverInfeasible("no restart reached a feasible table", std::move(best_infeasible));
  }
  return std::move(*best);
}

std::vector<SolverResult> solve_ladder(int b, int ell_max, int m, Rational p,
                                       const SolverOptions& opts) {
  std::vector<SolverResult> out;
  for (int ell = 0; ell <= ell_max; ++ell) {
    QuantConfig cfg = QuantConfig::make(b, ell, m, p);
    SolverOptions o = opts;
    if (ell > 0) o.warm_start = embed_shared_bit(out.back().table.r_values(), b, ell - 1);
    out.push_back(solve_table(cfg, o));
  }
  return out;
}

QuantTable attach_sender(const QuantTable& t) {
  return t.with_s(s_step(t.r_values(), t.config()));
}

std::vector<double> embed_shared_bit(std::span<const double> r, int b, int ell) {
  const int H = 1 << ell, X = 1 << b;
  if (r.size() != static_cast<std::size_t>(H) * X) throw StructuralError("r has the wrong size");
  if (ell >= 8) throw DomainError("ell cannot exceed 8");
  std::vector<double> out(2 * r.size());
  for (int h = 0; h < H; ++h)
    for (int x = 0; x < X; ++x) {
      out[(2 * h) * X + x] = r[h * X + x];
      out[(2 * h + 1) * X + x] = r[h * X + x];
    }
  return out;
}

}  // namespace quicfl
