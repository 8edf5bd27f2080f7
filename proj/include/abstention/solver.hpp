#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "abstention/model.hpp"

// Maximizes Delta = <xi|M|xi> over unit vectors confined to the box
// 0 <= xi_j <= lambda c_j.  The equality-constrained subproblems are
// rank-one tight, so an active-set loop over coincidence sets with a
// secular-equation bisection for the sphere multiplier finds the
// global optimum; two independent oracles (projected gradient,
// exhaustive coincidence-set enumeration) guard it.

namespace abst {

namespace tolerance {
inline constexpr double bisection = 1e-12;     // eigen/secular bisections
inline constexpr double kkt_accept = 1e-8;     // converged iff residual below
inline constexpr double primal = 1e-9;         // allowed bound overshoot
inline constexpr double dual_release = 1e-10;  // negative-dual release cut
inline constexpr double support_cutoff = 1e-14;  // "xi_j > 0" in ratios
}  // namespace tolerance

struct EigenPair {
  double value;
  std::vector<double> vector;  // unit norm, entrywise >= -1e-12
};

// Top eigenpair of the tridiagonal matrix: Sturm-count bisection to
// 1e-12 absolute for the value, inverse iteration for the vector,
// sign fixed by the Perron property after a diagonal shift.
EigenPair top_eigenpair(const CostMatrix& m);

struct CriticalRate {
  double q_star;   // smallest q whose box admits the top eigenvector
  bool reachable;  // false iff some c_j = 0 meets xi*_j > 0 (then q_star = 1)
};

CriticalRate critical_abstention(const FiducialState& c, const EigenPair& star);

enum class SolveMethod { active_set, projected_gradient, enumeration };

struct SolveResult {
  TransformedState xi;
  double delta = 0.0;
  double fidelity = 0.0;
  double multiplier_b2 = 0.0;        // sphere multiplier at the solution
  std::vector<double> duals;         // box multipliers s_j >= 0, 0 off the set
  std::vector<int> coincidence_set;  // indices with xi_j = lambda c_j
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
  SolveMethod method = SolveMethod::active_set;
};

// Active-set solve; falls back to multi-start projected gradient if the
// set update cycles.  The seed only feeds that fallback.
SolveResult solve_abstention(const CostMatrix& m, const FiducialState& c,
                             const AbstentionBudget& budget,
                             std::uint64_t seed = 0x9e3779b97f4a7c15ull);

// Nearest point of {0 <= xi <= u, |xi| = 1} to x (x entrywise >= 0):
// xi_j(mu) = clamp(x_j/(1+mu), 0, u_j) with mu > -1 located by a
// safeguarded bisection on the norm.
TransformedState project_box_sphere(std::span<const double> x,
                                    std::span<const double> u);

// Projected gradient ascent with fixed step 1/(2 |M|_inf), at most 1e5
// iterations per start, stopping when the iterate moves < 1e-12.
// Starts: c, the clipped top eigenvector, and `restarts` seeded random
// feasible points; returns the best.
SolveResult oracle_projected_gradient(const CostMatrix& m,
                                      const FiducialState& c,
                                      const AbstentionBudget& budget,
                                      int restarts, std::uint64_t seed);

// Exhaustive enumeration of coincidence sets (n <= 12): every subset's
// secular stationary point is checked for primal and dual feasibility
// and the best Delta wins.
SolveResult oracle_enumerate(const CostMatrix& m, const FiducialState& c,
                             const AbstentionBudget& budget);

// max of: | |xi|^2 - 1 |, bound/positivity violations, negative-dual
// magnitudes, complementary-slackness products, and the free-set
// stationarity norm |(M xi - b^2 xi)_F|_inf.
double kkt_residual(const CostMatrix& m, const FiducialState& c,
                    const AbstentionBudget& budget, const SolveResult& r);

}  // namespace abst
