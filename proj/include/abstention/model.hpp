#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

// Problem data for covariant estimation with a fixed abstention rate:
// the estimation task fixes a symmetric tridiagonal payoff matrix, the
// probe family fixes the coefficient vector the accepted state is
// filtered from, and the abstention budget fixes the box the filtered
// vector must stay inside.

namespace abst {

// Thrown when a solution fed back into a consistency check (filter
// reconstruction, budget accounting) is not realizable.
class InconsistentSolution : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

enum class Task { phase, direction, frame_degenerate, frame_rydberg };

// Number of estimated parameters d: 1 for phase, 2 for direction,
// 3 for either frame task.
int param_dimension(Task t);

// Physical resource count N for index cutoff n: N = n for phase,
// N = 2n otherwise.
int qubit_count(Task t, int n);

std::string_view to_string(Task t);
Task task_from_string(std::string_view s);

// Symmetric tridiagonal payoff matrix of order n+1: diagonal h_0..h_n
// and couplings w_1..w_n, where w_k (stored at coupling[k-1]) links
// indices k-1 and k.  Delta = <xi|M|xi> on unit vectors.
struct CostMatrix {
  std::vector<double> diag;
  std::vector<double> coupling;

  int order() const { return static_cast<int>(diag.size()); }
  int n() const { return order() - 1; }
};

CostMatrix build_cost_matrix(Task kind, int n);

enum class Family {
  flat_phase,
  equator,
  povm_seed_direction,
  antiparallel,
  linear_ramp,
  custom
};

std::string_view to_string(Family f);
Family family_from_string(std::string_view s);

// Unit-norm, entrywise non-negative coefficient vector c_0..c_n.
struct FiducialState {
  std::vector<double> coeffs;

  int n() const { return static_cast<int>(coeffs.size()) - 1; }
};

// Named families; binomial-type entries are accumulated in log space
// so n up to 1e4 stays finite, then renormalized.
FiducialState make_fiducial(Family family, int n);

// Arbitrary non-negative coefficients, renormalized to unit norm.  If
// norm_deviation is given it receives |sum c_j^2 - 1| of the input.
FiducialState make_custom_fiducial(std::vector<double> coeffs,
                                   double* norm_deviation = nullptr);

// Plain text, one non-negative coefficient per line; blank lines and
// '#' comments are ignored.
FiducialState read_coefficient_file(const std::string& path);

// Abstention rate q in [0,1); acceptance qbar = 1-q; box scale
// lambda = (1-q)^{-1/2}.  qbar and lambda are derived from q so the
// triple can never drift apart.
struct AbstentionBudget {
  double q;
  double qbar;
  double lambda;

  double lambda_sq() const { return 1.0 / qbar; }
};

AbstentionBudget make_budget(double q);

// Filtered state coefficients xi_0..xi_n (unit norm at a solution).
struct TransformedState {
  std::vector<double> xi;
};

// Delta = sum_j h_j xi_j^2 + 2 sum_k w_k xi_{k-1} xi_k.
double quadratic_form(const CostMatrix& m, std::span<const double> xi);

struct FidelityRecord {
  double fidelity;        // F = (1 + Delta)/2
  double one_minus_f;     // 1 - F
  double error_per_axis;  // 4(1-F) for d in {1,2}, 8(1-F) for d = 3
  double smin;            // S = 1 - Delta
};

// Requires -1 <= delta <= 1 and d in {1,2,3}; out-of-range values are
// rejected, never clamped.
FidelityRecord fidelity_conversions(double delta, int d);

// Per-index acceptance filter f_j = 1 - qbar xi_j^2 / c_j^2 (f_j = 1
// where c_j = 0).  Requires xi_j = 0 wherever c_j = 0.  Each f_j must
// land in [-1e-9, 1+1e-9] and sum c_j^2 f_j must equal q to 1e-9, else
// InconsistentSolution; the returned values are clamped to [0,1].
std::vector<double> filter_coefficients(const FiducialState& c,
                                        const TransformedState& state,
                                        const AbstentionBudget& budget);

// Compensated sum of squares, stable for long vectors.
double norm_squared(std::span<const double> v);

}  // namespace abst
