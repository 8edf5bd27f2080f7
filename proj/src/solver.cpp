#include "abstention/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <random>
#include <utility>

namespace abst {
namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

// ---------------------------------------------------------------------------
// Tridiagonal kernels.  d holds the diagonal, w the couplings (w[i] links
// i and i+1); a zero coupling cleanly decouples the blocks on either side.

void matvec_into(std::span<const double> d, std::span<const double> w,
                 std::span<const double> x, std::vector<double>& y) {
  const int m = static_cast<int>(d.size());
  y.resize(m);
  for (int i = 0; i < m; ++i) {
    double v = d[i] * x[i];
    if (i > 0) v += w[i - 1] * x[i - 1];
    if (i + 1 < m) v += w[i] * x[i + 1];
    y[i] = v;
  }
}

std::vector<double> matvec(std::span<const double> d, std::span<const double> w,
                           std::span<const double> x) {
  std::vector<double> y;
  matvec_into(d, w, x, y);
  return y;
}

// Sturm sequence: number of eigenvalues strictly below x.
int count_below(std::span<const double> d, std::span<const double> w,
                double x) {
  const int m = static_cast<int>(d.size());
  int cnt = 0;
  double q = 1.0;
  for (int i = 0; i < m; ++i) {
    const double e2 = (i > 0) ? w[i - 1] * w[i - 1] : 0.0;
    q = d[i] - x - ((i > 0) ? e2 / q : 0.0);
    if (q < 0.0) {
      ++cnt;
    } else if (q == 0.0) {
      q = -1e-300;
      ++cnt;
    }
  }
  return cnt;
}

// Largest eigenvalue by bisection on the Sturm count, 1e-12 absolute.
double lambda_max_tri(std::span<const double> d, std::span<const double> w) {
  const int m = static_cast<int>(d.size());
  if (m == 1) return d[0];
  double lo = kInf, hi = -kInf;
  for (int i = 0; i < m; ++i) {
    const double r = ((i > 0) ? std::abs(w[i - 1]) : 0.0) +
                     ((i + 1 < m) ? std::abs(w[i]) : 0.0);
    lo = std::min(lo, d[i] - r);
    hi = std::max(hi, d[i] + r);
  }
  hi = hi + 1e-10 + 1e-12 * std::abs(hi);
  while (hi - lo > 0.1 * tolerance::bisection) {
    const double mid = 0.5 * (lo + hi);
    if (count_below(d, w, mid) >= m)
      hi = mid;
    else
      lo = mid;
  }
  return 0.5 * (lo + hi);
}

// Tridiagonal solve with partial pivoting (one fill-in superdiagonal);
// near-singular pivots are floored so inverse iteration can blow up
// along the eigenvector as intended.
std::vector<double> tridiag_solve_pivot(std::vector<double> dl,
                                        std::vector<double> dd,
                                        std::vector<double> du,
                                        std::vector<double> b) {
  const int m = static_cast<int>(dd.size());
  std::vector<double> du2(m, 0.0), x(m, 0.0);
  for (int i = 0; i + 1 < m; ++i) {
    if (std::abs(dd[i]) >= std::abs(dl[i])) {
      if (dd[i] == 0.0) dd[i] = 1e-300;
      const double f = dl[i] / dd[i];
      dd[i + 1] -= f * du[i];
      b[i + 1] -= f * b[i];
    } else {
      const double f = dd[i] / dl[i];
      const double tmp_d = dd[i + 1];
      const double tmp_u = (i + 2 < m) ? du[i + 1] : 0.0;
      dd[i] = dl[i];
      dd[i + 1] = du[i] - f * tmp_d;
      du[i] = tmp_d;
      if (i + 2 < m) {
        du2[i] = tmp_u;
        du[i + 1] = -f * tmp_u;
      }
      std::swap(b[i], b[i + 1]);
      b[i + 1] -= f * b[i];
    }
  }
  if (dd[m - 1] == 0.0) dd[m - 1] = 1e-300;
  x[m - 1] = b[m - 1] / dd[m - 1];
  if (m >= 2) x[m - 2] = (b[m - 2] - du[m - 2] * x[m - 1]) / dd[m - 2];
  for (int i = m - 3; i >= 0; --i)
    x[i] = (b[i] - du[i] * x[i + 1] - du2[i] * x[i + 2]) / dd[i];
  return x;
}

double norm2_vec(std::span<const double> v) { return norm_squared(v); }

// Inverse iteration at the converged Sturm value; the sign is fixed so
// the dominant entry is positive (Perron after shifting).
std::vector<double> top_eigvec(std::span<const double> d,
                               std::span<const double> w, double lam) {
  const int m = static_cast<int>(d.size());
  std::vector<double> v(m, 1.0 / std::sqrt(static_cast<double>(m)));
  if (m == 1) return {1.0};
  double shift = lam;
  for (int it = 0; it < 12; ++it) {
    std::vector<double> dl(w.begin(), w.end());
    std::vector<double> du(w.begin(), w.end());
    std::vector<double> dd(m);
    for (int i = 0; i < m; ++i) dd[i] = d[i] - shift;
    std::vector<double> x = tridiag_solve_pivot(std::move(dl), std::move(dd),
                                                std::move(du), v);
    const double nx = std::sqrt(norm2_vec(x));
    if (!(nx > 0.0) || !std::isfinite(nx)) {
      shift += 1e-13;
      continue;
    }
    for (double& t : x) t /= nx;
    v = std::move(x);
    const std::vector<double> tv = matvec(d, w, v);
    double ray = 0.0;
    for (int i = 0; i < m; ++i) ray += v[i] * tv[i];
    double res = 0.0;
    for (int i = 0; i < m; ++i)
      res = std::max(res, std::abs(tv[i] - ray * v[i]));
    if (res <= 1e-11) break;
  }
  int imax = 0;
  for (int i = 1; i < m; ++i)
    if (std::abs(v[i]) > std::abs(v[imax])) imax = i;
  if (v[imax] < 0.0)
    for (double& t : v) t = -t;
  return v;
}

// ---------------------------------------------------------------------------
// Compacted problem: indices with c_j = 0 are forced to xi_j = 0 and
// removed; a removed interior index leaves a zero coupling behind.  The
// diagonal is shifted by eta = max(0, -min h) so the matrix is entrywise
// non-negative (Perron sign arguments and the ascent step rely on it).

struct Compact {
  std::vector<double> d;    // shifted diagonal
  std::vector<double> w;    // couplings, zero across removed indices
  std::vector<double> u;    // box bounds lambda c_j
  std::vector<int> orig;    // original index of each slot
  std::vector<int> forced;  // original indices pinned to zero
  double eta = 0.0;

  int m() const { return static_cast<int>(d.size()); }
};

Compact make_compact(const CostMatrix& mat, const FiducialState& c,
                     const AbstentionBudget& budget) {
  const int order = mat.order();
  Compact p;
  p.eta = 0.0;
  for (double h : mat.diag) p.eta = std::max(p.eta, -h);
  int last = -2;
  for (int j = 0; j < order; ++j) {
    if (c.coeffs[j] <= 0.0) {
      p.forced.push_back(j);
      continue;
    }
    if (!p.orig.empty())
      p.w.push_back(last == j - 1 ? mat.coupling[j - 1] : 0.0);
    p.d.push_back(mat.diag[j] + p.eta);
    p.u.push_back(budget.lambda * c.coeffs[j]);
    p.orig.push_back(j);
    last = j;
  }
  return p;
}

struct SecularOut {
  std::vector<double> xi;  // full compacted vector (u on C, solved on F)
  double b2 = 0.0;
  bool ok = false;
};

// Stationary point for a fixed coincidence set: on the free set F,
// (b^2 I - M_FF) xi_F = M_FC u_C with |xi_F|^2 = rho^2, b^2 sought on
// the maximizing branch b^2 > lambda_max(M_FF) by bisection.  When the
// right-hand side misses the pole eigenvector the norm never reaches
// rho (hard case); the deficit then rides on that eigenvector.
SecularOut secular_solve(const Compact& p, const std::vector<char>& in_c,
                         double rho2, double lam_all) {
  const int mc = p.m();
  std::vector<std::pair<int, int>> runs;
  for (int i = 0; i < mc;) {
    if (in_c[i]) {
      ++i;
      continue;
    }
    int j = i;
    while (j + 1 < mc && !in_c[j + 1]) ++j;
    runs.emplace_back(i, j);
    i = j + 1;
  }
  if (runs.empty()) return {};

  const auto nrun = static_cast<int>(runs.size());
  std::vector<std::vector<double>> rhs(nrun);
  std::vector<double> lam_run(nrun);
  double lam_ff = -kInf;
  int pole = 0;
  for (int k = 0; k < nrun; ++k) {
    const auto [a, b] = runs[k];
    rhs[k].assign(b - a + 1, 0.0);
    if (a > 0) rhs[k][0] += p.w[a - 1] * p.u[a - 1];
    if (b + 1 < mc) rhs[k][b - a] += p.w[b] * p.u[b + 1];
    lam_run[k] = lambda_max_tri(std::span(p.d).subspan(a, b - a + 1),
                                std::span(p.w).subspan(a, b - a));
    if (lam_run[k] > lam_ff) {
      lam_ff = lam_run[k];
      pole = k;
    }
  }

  // (b2 I - A) y = r per run; false once a pivot closes (b2 at or below
  // the run's top eigenvalue).
  auto run_solve = [&](int k, double b2, std::vector<double>& y) -> bool {
    const auto [a, b] = runs[k];
    const int len = b - a + 1;
    y.assign(len, 0.0);
    std::vector<double> piv(len), fwd(len);
    piv[0] = b2 - p.d[a];
    if (piv[0] <= 0.0) return false;
    fwd[0] = rhs[k][0];
    for (int i = 1; i < len; ++i) {
      const double wk = p.w[a + i - 1];
      piv[i] = (b2 - p.d[a + i]) - wk * wk / piv[i - 1];
      if (piv[i] <= 0.0) return false;
      fwd[i] = rhs[k][i] + wk * fwd[i - 1] / piv[i - 1];
    }
    y[len - 1] = fwd[len - 1] / piv[len - 1];
    for (int i = len - 2; i >= 0; --i)
      y[i] = (fwd[i] + p.w[a + i] * y[i + 1]) / piv[i];
    return true;
  };

  std::vector<std::vector<double>> ys(nrun);
  auto eval = [&](double b2, bool keep) -> double {
    double g = 0.0;
    std::vector<double> y;
    for (int k = 0; k < nrun; ++k) {
      if (!run_solve(k, b2, y)) return kInf;
      g += norm2_vec(y);
      if (keep) ys[k] = y;
    }
    return g;
  };

  const double delta0 = std::max(1e-13, 1e-13 * std::abs(lam_ff));
  double b2 = 0.0;
  const double g_lo = eval(lam_ff + delta0, false);
  if (g_lo <= rho2) {
    b2 = lam_ff + delta0;
    eval(b2, true);
    double have = 0.0;
    for (const auto& y : ys) have += norm2_vec(y);
    const double theta = std::sqrt(std::max(0.0, rho2 - have));
    const auto [a, b] = runs[pole];
    const std::vector<double> v =
        top_eigvec(std::span(p.d).subspan(a, b - a + 1),
                   std::span(p.w).subspan(a, b - a), lam_run[pole]);
    for (int i = 0; i <= b - a; ++i) ys[pole][i] += theta * v[i];
  } else {
    double lo = lam_ff + delta0;
    double hi = std::max(lam_all + 1.0, lo + 1.0);
    int guard = 0;
    while (eval(hi, false) > rho2) {
      hi = lo + 2.0 * (hi - lo);
      if (++guard > 200) return {};
    }
    while (hi - lo > tolerance::bisection) {
      const double mid = 0.5 * (lo + hi);
      if (eval(mid, false) > rho2)
        lo = mid;
      else
        hi = mid;
    }
    b2 = 0.5 * (lo + hi);
    if (eval(b2, true) == kInf) {
      b2 = hi;
      eval(b2, true);
    }
  }

  double free2 = 0.0;
  for (const auto& y : ys) free2 += norm2_vec(y);
  const double scale = (free2 > 0.0) ? std::sqrt(rho2 / free2) : 0.0;

  SecularOut out;
  out.xi.assign(mc, 0.0);
  for (int i = 0; i < mc; ++i)
    if (in_c[i]) out.xi[i] = p.u[i];
  for (int k = 0; k < nrun; ++k) {
    const auto [a, b] = runs[k];
    for (int i = 0; i <= b - a; ++i)
      out.xi[a + i] = std::max(0.0, scale * ys[k][i]);
  }
  // Re-fit the multiplier to the rescaled point (least-squares over F).
  const std::vector<double> y = matvec(p.d, p.w, out.xi);
  double num = 0.0;
  for (int i = 0; i < mc; ++i)
    if (!in_c[i]) num += out.xi[i] * y[i];
  out.b2 = (rho2 > 0.0) ? num / rho2 : b2;
  out.ok = true;
  return out;
}

// Multiplier making every dual non-negative when the whole box binds.
double full_box_multiplier(const Compact& p) {
  const std::vector<double> y = matvec(p.d, p.w, p.u);
  double b2 = kInf;
  for (int i = 0; i < p.m(); ++i)
    if (p.u[i] > 0.0) b2 = std::min(b2, y[i] / p.u[i]);
  return b2;
}

SolveResult assemble(const CostMatrix& mat, const FiducialState& c,
                     const AbstentionBudget& budget, const Compact& p,
                     const std::vector<double>& xi_c,
                     const std::vector<char>& in_c, double b2_shifted,
                     int iterations, SolveMethod method) {
  const int order = mat.order();
  SolveResult out;
  out.xi.xi.assign(order, 0.0);
  out.duals.assign(order, 0.0);
  for (int i = 0; i < p.m(); ++i) out.xi.xi[p.orig[i]] = xi_c[i];

  const std::vector<double> y = matvec(p.d, p.w, xi_c);
  for (int i = 0; i < p.m(); ++i) {
    if (!in_c[i]) continue;
    out.coincidence_set.push_back(p.orig[i]);
    out.duals[p.orig[i]] = std::max(0.0, 2.0 * (y[i] - b2_shifted * xi_c[i]));
  }
  for (int j : p.forced) out.coincidence_set.push_back(j);
  std::sort(out.coincidence_set.begin(), out.coincidence_set.end());

  out.delta = quadratic_form(mat, out.xi.xi);
  out.fidelity = 0.5 * (1.0 + out.delta);
  out.multiplier_b2 = b2_shifted - p.eta;
  out.iterations = iterations;
  out.method = method;
  out.kkt_residual = kkt_residual(mat, c, budget, out);
  out.converged = out.kkt_residual <= tolerance::kkt_accept;
  return out;
}

double uniform01(std::mt19937_64& rng) {
  return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

// Projection workhorse; assumes x entrywise non-negative and finite.
// Writes the projected point into xi (also used as scratch).
void project_core(std::span<const double> x, std::span<const double> u,
                  std::vector<double>& xi) {
  if (norm_squared(u) < 1.0 - 1e-12)
    throw std::invalid_argument("project_box_sphere: box cannot reach the sphere");
  double lim2 = 0.0;
  for (std::size_t j = 0; j < x.size(); ++j)
    if (x[j] > 0.0) lim2 += u[j] * u[j];
  if (lim2 < 1.0 - 1e-12)
    throw std::invalid_argument(
        "project_box_sphere: no scaling of x reaches the sphere inside the box");

  const int m = static_cast<int>(x.size());
  xi.resize(m);
  auto fill = [&](double t) {
    for (int j = 0; j < m; ++j) xi[j] = std::min(x[j] / t, u[j]);
  };
  auto h = [&](double t) {
    fill(t);
    return norm_squared(xi) - 1.0;
  };
  // h decreases in t = 1 + mu; bracket then bisect with Newton steps.
  double t_hi = std::max(std::sqrt(norm_squared(x)), 1e-30);
  double t_lo = t_hi;
  double h_lo = h(t_lo);
  int guard = 0;
  while (h_lo < 0.0 && guard++ < 240) {
    t_lo *= 0.5;
    h_lo = h(t_lo);
  }
  if (h_lo < 0.0) {
    // Entire reachable norm sits at 1 within roundoff; take the clamp limit.
    fill(t_lo);
  } else {
    double hi = t_hi, lo = t_lo;
    if (h(hi) > 0.0) {
      // x itself already outside: extend upward (rare, x norm ~ 1).
      while (h(hi) > 0.0 && guard++ < 240) hi *= 2.0;
    }
    double t = 0.5 * (lo + hi);
    for (int it = 0; it < 200; ++it) {
      const double ht = h(t);
      if (std::abs(ht) <= 1e-14 || (hi - lo) <= 1e-16 * hi) break;
      if (ht > 0.0)
        lo = t;
      else
        hi = t;
      // Newton on the free set, safeguarded by the bracket.
      double slope = 0.0;
      for (int j = 0; j < m; ++j) {
        const double s = x[j] / t;
        if (s < u[j] && x[j] > 0.0) slope += s * s;
      }
      slope *= -2.0 / t;
      double tn = (slope < 0.0) ? t - ht / slope : 0.5 * (lo + hi);
      if (!(tn > lo && tn < hi)) tn = 0.5 * (lo + hi);
      t = tn;
    }
    fill(t);
  }
  const double nr = std::sqrt(norm_squared(xi));
  if (nr > 0.0)
    for (double& v : xi) v /= nr;
}

}  // namespace

// ---------------------------------------------------------------------------

EigenPair top_eigenpair(const CostMatrix& m) {
  require(m.order() >= 1 && m.order() == static_cast<int>(m.coupling.size()) + 1,
          "top_eigenpair: malformed matrix");
  double eta = 0.0;
  for (double h : m.diag) eta = std::max(eta, -h);
  std::vector<double> d(m.diag);
  for (double& x : d) x += eta;
  const double lam = lambda_max_tri(d, m.coupling);
  EigenPair out;
  out.vector = top_eigvec(d, m.coupling, lam);
  out.value = lam - eta;
  return out;
}

CriticalRate critical_abstention(const FiducialState& c, const EigenPair& star) {
  require(c.coeffs.size() == star.vector.size(),
          "critical_abstention: dimension mismatch");
  double min_ratio = kInf;
  for (std::size_t j = 0; j < c.coeffs.size(); ++j) {
    const double xj = star.vector[j];
    if (xj <= tolerance::support_cutoff) continue;
    if (c.coeffs[j] <= 0.0) return {1.0, false};
    const double r = c.coeffs[j] / xj;
    min_ratio = std::min(min_ratio, r * r);
  }
  if (!std::isfinite(min_ratio)) return {0.0, true};
  return {std::max(0.0, 1.0 - std::min(1.0, min_ratio)), true};
}

TransformedState project_box_sphere(std::span<const double> x,
                                    std::span<const double> u) {
  require(x.size() == u.size() && !x.empty(),
          "project_box_sphere: dimension mismatch");
  for (std::size_t j = 0; j < x.size(); ++j)
    require(x[j] >= 0.0 && u[j] >= 0.0 && std::isfinite(x[j]) &&
                std::isfinite(u[j]),
            "project_box_sphere: inputs must be finite and non-negative");
  std::vector<double> xi;
  project_core(x, u, xi);
  return {std::move(xi)};
}

SolveResult solve_abstention(const CostMatrix& m, const FiducialState& c,
                             const AbstentionBudget& budget,
                             std::uint64_t seed) {
  require(static_cast<int>(c.coeffs.size()) == m.order(),
          "solve_abstention: dimension mismatch");
  const int n = m.n();
  const Compact p = make_compact(m, c, budget);
  require(p.m() >= 1, "solve_abstention: empty support");
  const int mc = p.m();

  if (budget.q == 0.0) {
    // The box pins xi = c; only the multipliers need choosing.
    std::vector<char> in_c(mc, 1);
    return assemble(m, c, budget, p, p.u, in_c, full_box_multiplier(p), 0,
                    SolveMethod::active_set);
  }

  const double lam_all = lambda_max_tri(p.d, p.w);
  const std::vector<double> v_all = top_eigvec(p.d, p.w, lam_all);

  std::vector<char> in_c(mc, 0);
  std::vector<double> xi = v_all;
  for (double& t : xi) t = std::max(0.0, t);
  double b2 = lam_all;
  const int max_outer = 10 * (n + 1);
  int iters = 0;
  bool stuck = false;

  auto c_norm2 = [&]() {
    double s = 0.0;
    for (int i = 0; i < mc; ++i)
      if (in_c[i]) s += p.u[i] * p.u[i];
    return s;
  };

  while (true) {
    if (++iters > max_outer) {
      stuck = true;
      break;
    }
    // Most-violated bound over the free set (ties admitted together).
    double maxv = 0.0;
    for (int i = 0; i < mc; ++i)
      if (!in_c[i]) maxv = std::max(maxv, xi[i] - p.u[i]);
    if (maxv > 1e-12) {
      std::vector<int> added;
      for (int i = 0; i < mc; ++i)
        if (!in_c[i] && xi[i] - p.u[i] >= maxv - 1e-15) {
          in_c[i] = 1;
          added.push_back(i);
        }
      double rho2 = 1.0 - c_norm2();
      if (rho2 <= 1e-14 && added.size() > 1) {
        for (std::size_t k = 1; k < added.size(); ++k) in_c[added[k]] = 0;
        rho2 = 1.0 - c_norm2();
      }
      if (rho2 <= 1e-14) {
        stuck = true;
        break;
      }
      const SecularOut sec = secular_solve(p, in_c, rho2, lam_all);
      if (!sec.ok) {
        stuck = true;
        break;
      }
      xi = sec.xi;
      b2 = sec.b2;
      continue;
    }
    // Dual screen on the coincidence set.
    const std::vector<double> y = matvec(p.d, p.w, xi);
    bool released = false;
    for (int i = 0; i < mc; ++i) {
      if (!in_c[i]) continue;
      if (2.0 * (y[i] - b2 * xi[i]) < -tolerance::dual_release) {
        in_c[i] = 0;
        released = true;
      }
    }
    if (!released) break;
    if (std::none_of(in_c.begin(), in_c.end(), [](char f) { return f; })) {
      xi = v_all;
      for (double& t : xi) t = std::max(0.0, t);
      b2 = lam_all;
      continue;
    }
    const double rho2 = 1.0 - c_norm2();
    if (rho2 <= 1e-14) {
      stuck = true;
      break;
    }
    const SecularOut sec = secular_solve(p, in_c, rho2, lam_all);
    if (!sec.ok) {
      stuck = true;
      break;
    }
    xi = sec.xi;
    b2 = sec.b2;
  }

  if (stuck) return oracle_projected_gradient(m, c, budget, 6, seed);
  return assemble(m, c, budget, p, xi, in_c, b2, iters, SolveMethod::active_set);
}

SolveResult oracle_projected_gradient(const CostMatrix& m,
                                      const FiducialState& c,
                                      const AbstentionBudget& budget,
                                      int restarts, std::uint64_t seed) {
  require(static_cast<int>(c.coeffs.size()) == m.order(),
          "oracle_projected_gradient: dimension mismatch");
  require(restarts >= 1, "oracle_projected_gradient: restarts must be >= 1");
  const Compact p = make_compact(m, c, budget);
  const int mc = p.m();
  require(mc >= 1, "oracle_projected_gradient: empty support");

  double row_max = 0.0;
  for (int i = 0; i < mc; ++i) {
    double r = std::abs(p.d[i]);
    if (i > 0) r += std::abs(p.w[i - 1]);
    if (i + 1 < mc) r += std::abs(p.w[i]);
    row_max = std::max(row_max, r);
  }
  const double step = 0.5 / std::max(row_max, 1e-30);

  std::vector<std::vector<double>> starts;
  {
    std::vector<double> s0(mc);
    for (int i = 0; i < mc; ++i) s0[i] = p.u[i] / budget.lambda;  // = c
    starts.push_back(std::move(s0));
    const double lam = lambda_max_tri(p.d, p.w);
    std::vector<double> ve = top_eigvec(p.d, p.w, lam);
    // Floor keeps the projection feasible even when the eigenvector has
    // dead entries (decoupled blocks of a custom fiducial).
    for (double& t : ve) t = std::max(1e-300, t);
    std::vector<double> pe;
    project_core(ve, p.u, pe);
    starts.push_back(std::move(pe));
    std::mt19937_64 rng(seed);
    const double floor_u = 1.0 / std::sqrt(static_cast<double>(mc));
    for (int r = 0; r < restarts; ++r) {
      std::vector<double> y(mc);
      for (int i = 0; i < mc; ++i)
        y[i] = (0.01 + 0.99 * uniform01(rng)) * std::max(p.u[i], floor_u);
      std::vector<double> py;
      project_core(y, p.u, py);
      starts.push_back(std::move(py));
    }
  }

  std::vector<double> best;
  double best_delta = -kInf;
  int best_iters = 0;
  std::vector<double> mv(mc), y(mc), next(mc);
  for (auto& start : starts) {
    std::vector<double> xi = start;
    int it = 0;
    for (; it < 100000; ++it) {
      matvec_into(p.d, p.w, xi, mv);
      // Ascent step stays non-negative (shifted matrix is entrywise >= 0);
      // the floor keeps untouched dead blocks projectable.
      for (int i = 0; i < mc; ++i)
        y[i] = std::max(xi[i] + step * mv[i], 1e-300);
      project_core(y, p.u, next);
      double move = 0.0;
      for (int i = 0; i < mc; ++i)
        move = std::max(move, std::abs(next[i] - xi[i]));
      xi.swap(next);
      if (move < 1e-12) break;
    }
    matvec_into(p.d, p.w, xi, mv);
    double delta_s = 0.0;  // shifted objective, monotone in the real one
    for (int i = 0; i < mc; ++i) delta_s += xi[i] * mv[i];
    if (delta_s > best_delta) {
      best_delta = delta_s;
      best = xi;
      best_iters = it;
    }
  }

  // Multipliers read off the final point.
  std::vector<char> in_c(mc, 0);
  for (int i = 0; i < mc; ++i)
    if (p.u[i] - best[i] <= 1e-9) in_c[i] = 1;
  double b2;
  if (std::all_of(in_c.begin(), in_c.end(), [](char f) { return f; })) {
    b2 = full_box_multiplier(p);
  } else {
    const std::vector<double> y = matvec(p.d, p.w, best);
    double num = 0.0, den = 0.0;
    for (int i = 0; i < mc; ++i) {
      if (in_c[i]) continue;
      num += best[i] * y[i];
      den += best[i] * best[i];
    }
    b2 = (den > 0.0) ? num / den : lambda_max_tri(p.d, p.w);
  }
  SolveResult out = assemble(m, c, budget, p, best, in_c, b2, best_iters,
                             SolveMethod::projected_gradient);
  return out;
}

SolveResult oracle_enumerate(const CostMatrix& m, const FiducialState& c,
                             const AbstentionBudget& budget) {
  require(static_cast<int>(c.coeffs.size()) == m.order(),
          "oracle_enumerate: dimension mismatch");
  require(m.n() <= 12, "oracle_enumerate: refuses n > 12");
  const Compact p = make_compact(m, c, budget);
  const int mc = p.m();
  require(mc >= 1, "oracle_enumerate: empty support");
  const double lam_all = lambda_max_tri(p.d, p.w);

  double best_delta = -kInf;
  std::vector<double> best_xi;
  std::vector<char> best_in_c;
  double best_b2 = 0.0;
  int evaluated = 0;

  std::vector<char> in_c(mc, 0);
  for (std::uint32_t mask = 0; mask < (1u << mc); ++mask) {
    double cn2 = 0.0;
    for (int i = 0; i < mc; ++i) {
      in_c[i] = (mask >> i) & 1u;
      if (in_c[i]) cn2 += p.u[i] * p.u[i];
    }
    const double rho2 = 1.0 - cn2;
    std::vector<double> xi;
    double b2;
    if (mask + 1 == (1u << mc)) {  // whole box
      if (std::abs(rho2) > 1e-9) continue;
      xi = p.u;
      b2 = full_box_multiplier(p);
    } else {
      if (mask != 0 && rho2 <= 1e-12) continue;
      const SecularOut sec = secular_solve(p, in_c, std::max(rho2, 0.0), lam_all);
      if (!sec.ok) continue;
      xi = sec.xi;
      b2 = sec.b2;
      bool feasible = true;
      for (int i = 0; i < mc && feasible; ++i)
        if (!in_c[i] && xi[i] > p.u[i] + 1e-9) feasible = false;
      if (!feasible) continue;
      const std::vector<double> y = matvec(p.d, p.w, xi);
      for (int i = 0; i < mc && feasible; ++i)
        if (in_c[i] && 2.0 * (y[i] - b2 * xi[i]) < -1e-9) feasible = false;
      if (!feasible) continue;
    }
    ++evaluated;
    const std::vector<double> y = matvec(p.d, p.w, xi);
    double delta_s = 0.0;
    for (int i = 0; i < mc; ++i) delta_s += xi[i] * y[i];
    if (delta_s > best_delta) {
      best_delta = delta_s;
      best_xi = xi;
      best_in_c = in_c;
      best_b2 = b2;
    }
  }
  require(!best_xi.empty(), "oracle_enumerate: no feasible candidate");
  return assemble(m, c, budget, p, best_xi, best_in_c, best_b2, evaluated,
                  SolveMethod::enumeration);
}

double kkt_residual(const CostMatrix& m, const FiducialState& c,
                    const AbstentionBudget& budget, const SolveResult& r) {
  const int order = m.order();
  require(static_cast<int>(r.xi.xi.size()) == order &&
              static_cast<int>(c.coeffs.size()) == order &&
              static_cast<int>(r.duals.size()) == order,
          "kkt_residual: dimension mismatch");
  const auto& xi = r.xi.xi;
  std::vector<char> in_c(order, 0);
  for (int j : r.coincidence_set) in_c[j] = 1;

  double res = std::abs(norm_squared(xi) - 1.0);
  for (int j = 0; j < order; ++j) {
    const double uj = budget.lambda * c.coeffs[j];
    res = std::max(res, xi[j] - uj);
    res = std::max(res, -xi[j]);
    res = std::max(res, -r.duals[j]);
    res = std::max(res, std::abs(r.duals[j] * (uj - xi[j])));
  }
  // Free-set stationarity.
  for (int j = 0; j < order; ++j) {
    if (in_c[j]) continue;
    double mv = m.diag[j] * xi[j];
    if (j > 0) mv += m.coupling[j - 1] * xi[j - 1];
    if (j + 1 < order) mv += m.coupling[j] * xi[j + 1];
    res = std::max(res, std::abs(mv - r.multiplier_b2 * xi[j]));
  }
  return res;
}

}  // namespace abst
