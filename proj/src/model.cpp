#include "abstention/model.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

namespace abst {
namespace {

constexpr double kLn2 = 0.69314718055994530942;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

void normalize(std::vector<double>& c) {
  const double n2 = norm_squared(c);
  require(n2 > 0.0, "fiducial state: all coefficients vanish");
  const double inv = 1.0 / std::sqrt(n2);
  for (double& x : c) x *= inv;
}

}  // namespace

double norm_squared(std::span<const double> v) {
  double sum = 0.0, comp = 0.0;
  for (double x : v) {
    const double y = x * x - comp;
    const double t = sum + y;
    comp = (t - sum) - y;
    sum = t;
  }
  return sum;
}

int param_dimension(Task t) {
  switch (t) {
    case Task::phase:
      return 1;
    case Task::direction:
      return 2;
    case Task::frame_degenerate:
    case Task::frame_rydberg:
      return 3;
  }
  throw std::invalid_argument("param_dimension: unknown task");
}

int qubit_count(Task t, int n) {
  require(n >= 1, "qubit_count: n must be >= 1");
  return (t == Task::phase) ? n : 2 * n;
}

std::string_view to_string(Task t) {
  switch (t) {
    case Task::phase:
      return "phase";
    case Task::direction:
      return "direction";
    case Task::frame_degenerate:
      return "frame_degenerate";
    case Task::frame_rydberg:
      return "frame_rydberg";
  }
  return "?";
}

Task task_from_string(std::string_view s) {
  if (s == "phase") return Task::phase;
  if (s == "direction") return Task::direction;
  if (s == "frame_degenerate") return Task::frame_degenerate;
  if (s == "frame_rydberg") return Task::frame_rydberg;
  throw std::invalid_argument("unknown task: " + std::string(s));
}

std::string_view to_string(Family f) {
  switch (f) {
    case Family::flat_phase:
      return "flat";
    case Family::equator:
      return "equator";
    case Family::povm_seed_direction:
      return "povm_seed";
    case Family::antiparallel:
      return "antiparallel";
    case Family::linear_ramp:
      return "linear_ramp";
    case Family::custom:
      return "custom";
  }
  return "?";
}

Family family_from_string(std::string_view s) {
  if (s == "flat" || s == "flat_phase") return Family::flat_phase;
  if (s == "equator") return Family::equator;
  if (s == "povm_seed" || s == "povm_seed_direction" || s == "povm")
    return Family::povm_seed_direction;
  if (s == "antiparallel") return Family::antiparallel;
  if (s == "linear_ramp" || s == "ramp") return Family::linear_ramp;
  if (s == "custom") return Family::custom;
  throw std::invalid_argument("unknown family: " + std::string(s));
}

CostMatrix build_cost_matrix(Task kind, int n) {
  require(n >= 1, "build_cost_matrix: n must be >= 1");
  CostMatrix m;
  m.diag.assign(n + 1, 0.0);
  m.coupling.assign(n, 0.0);
  switch (kind) {
    case Task::phase:
      for (int k = 1; k <= n; ++k) m.coupling[k - 1] = 0.5;
      break;
    case Task::direction:
      for (int k = 1; k <= n; ++k)
        m.coupling[k - 1] = k / std::sqrt(4.0 * k * k - 1.0);
      break;
    case Task::frame_rydberg:
      for (int j = 0; j <= n; ++j) m.diag[j] = -0.5 / (j + 1.0);
      for (int k = 1; k <= n; ++k)
        m.coupling[k - 1] = 0.5 * std::sqrt((2.0 * k - 1.0) / (2.0 * k + 1.0));
      break;
    case Task::frame_degenerate:
      // Phase matrix except for the four boundary entries.
      m.diag[0] = -0.5;
      m.diag[n] = -0.5 / (n + 1.0);
      for (int k = 1; k <= n; ++k) m.coupling[k - 1] = 0.5;
      m.coupling[n - 1] = 0.5 / std::sqrt(2.0 * n + 1.0);
      break;
  }
  return m;
}

FiducialState make_fiducial(Family family, int n) {
  require(n >= 1, "make_fiducial: n must be >= 1");
  std::vector<double> c(n + 1, 0.0);
  switch (family) {
    case Family::flat_phase: {
      const double v = 1.0 / std::sqrt(n + 1.0);
      for (double& x : c) x = v;
      break;
    }
    case Family::equator: {
      // c_j = 2^{-n/2} sqrt(binom(n, j))
      for (int j = 0; j <= n; ++j) {
        const double lg = 0.5 * (std::lgamma(n + 1.0) - std::lgamma(j + 1.0) -
                                 std::lgamma(n - j + 1.0)) -
                          0.5 * n * kLn2;
        c[j] = std::exp(lg);
      }
      break;
    }
    case Family::povm_seed_direction: {
      for (int j = 0; j <= n; ++j) c[j] = std::sqrt(2.0 * j + 1.0) / (n + 1.0);
      break;
    }
    case Family::antiparallel: {
      // c_j = n! sqrt((2j+1) / ((n-j)! (n+j+1)!))
      for (int j = 0; j <= n; ++j) {
        const double lg = std::lgamma(n + 1.0) +
                          0.5 * (std::log(2.0 * j + 1.0) -
                                 std::lgamma(n - j + 1.0) -
                                 std::lgamma(n + j + 2.0));
        c[j] = std::exp(lg);
      }
      break;
    }
    case Family::linear_ramp: {
      const double norm =
          std::sqrt(n * (n + 1.0) * (2.0 * n + 1.0) / 6.0);
      for (int j = 0; j <= n; ++j) c[j] = (n - j) / norm;
      break;
    }
    case Family::custom:
      throw std::invalid_argument(
          "make_fiducial: custom family needs explicit coefficients");
  }
  normalize(c);
  return {std::move(c)};
}

FiducialState make_custom_fiducial(std::vector<double> coeffs,
                                   double* norm_deviation) {
  require(coeffs.size() >= 2, "custom fiducial: need at least two entries");
  for (double x : coeffs)
    require(x >= 0.0 && std::isfinite(x),
            "custom fiducial: coefficients must be finite and non-negative");
  if (norm_deviation) *norm_deviation = std::abs(norm_squared(coeffs) - 1.0);
  normalize(coeffs);
  return {std::move(coeffs)};
}

FiducialState read_coefficient_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::invalid_argument("cannot open coefficient file: " + path);
  std::vector<double> c;
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (const auto hash = line.find('#'); hash != std::string::npos)
      line.erase(hash);
    std::istringstream ls(line);
    std::string tok;
    if (!(ls >> tok)) continue;  // blank or comment-only line
    std::string rest;
    if (ls >> rest)
      throw std::invalid_argument("coefficient file: one value per line (line " +
                                  std::to_string(lineno) + ")");
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(tok, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used != tok.size())
      throw std::invalid_argument("coefficient file: bad number at line " +
                                  std::to_string(lineno));
    c.push_back(v);
  }
  return make_custom_fiducial(std::move(c));
}

AbstentionBudget make_budget(double q) {
  require(q >= 0.0 && q < 1.0, "abstention rate must satisfy 0 <= q < 1");
  const double qbar = 1.0 - q;
  return {q, qbar, 1.0 / std::sqrt(qbar)};
}

double quadratic_form(const CostMatrix& m, std::span<const double> xi) {
  require(static_cast<int>(xi.size()) == m.order(),
          "quadratic_form: dimension mismatch");
  require(static_cast<int>(m.coupling.size()) == m.order() - 1,
          "quadratic_form: malformed matrix");
  double sum = 0.0;
  for (std::size_t j = 0; j < xi.size(); ++j) sum += m.diag[j] * xi[j] * xi[j];
  for (std::size_t k = 0; k + 1 < xi.size(); ++k)
    sum += 2.0 * m.coupling[k] * xi[k] * xi[k + 1];
  return sum;
}

FidelityRecord fidelity_conversions(double delta, int d) {
  require(delta >= -1.0 && delta <= 1.0,
          "fidelity_conversions: delta outside [-1, 1]");
  require(d >= 1 && d <= 3, "fidelity_conversions: d must be 1, 2 or 3");
  const double f = 0.5 * (1.0 + delta);
  const double omf = 0.5 * (1.0 - delta);
  const double e = (d == 3 ? 8.0 : 4.0) * omf;
  return {f, omf, e, 1.0 - delta};
}

std::vector<double> filter_coefficients(const FiducialState& c,
                                        const TransformedState& state,
                                        const AbstentionBudget& budget) {
  const auto& cc = c.coeffs;
  const auto& xi = state.xi;
  require(cc.size() == xi.size(), "filter_coefficients: dimension mismatch");
  std::vector<double> f(cc.size(), 1.0);
  for (std::size_t j = 0; j < cc.size(); ++j) {
    if (cc[j] == 0.0) {
      require(std::abs(xi[j]) <= 1e-12,
              "filter_coefficients: xi must vanish where c does");
      continue;  // f_j = 1 carries no weight
    }
    const double r = xi[j] / cc[j];
    const double fj = 1.0 - budget.qbar * r * r;
    if (fj < -1e-9 || fj > 1.0 + 1e-9)
      throw InconsistentSolution(
          "filter_coefficients: reconstructed filter outside [0, 1]");
    f[j] = std::min(1.0, std::max(0.0, fj));
  }
  double acc = 0.0;
  for (std::size_t j = 0; j < cc.size(); ++j) acc += cc[j] * cc[j] * f[j];
  if (std::abs(acc - budget.q) > 1e-9)
    throw InconsistentSolution(
        "filter_coefficients: filtered weight does not match the budget");
  return f;
}

}  // namespace abst
