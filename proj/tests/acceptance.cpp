// Acceptance gate: twelve numbered criteria covering the solver, the
// closed-form laws, and the special-function layer.  Each criterion
// prints exactly one PASS/FAIL line with its measured margin; the exit
// code is the number of failures.  All tolerances are pinned here.

#include <algorithm>
#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <numbers>
#include <random>
#include <string>
#include <vector>

#include "abstention/asymptotics.hpp"
#include "abstention/model.hpp"
#include "abstention/solver.hpp"
#include "abstention/specfun.hpp"

using namespace abst;

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, ...) {
  char buf[512];
  va_list ap;
  va_start(ap, f);
  vsnprintf(buf, sizeof buf, f, ap);
  va_end(ap);
  return buf;
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

double rel_dev(double value, double target) {
  return std::abs(value - target) / std::abs(target);
}

std::vector<Family> families_for(Task t) {
  switch (t) {
    case Task::phase:
      return {Family::flat_phase, Family::equator};
    case Task::direction:
      return {Family::povm_seed_direction, Family::antiparallel};
    case Task::frame_degenerate:
      return {Family::flat_phase};
    case Task::frame_rydberg:
      return {Family::linear_ramp};
  }
  return {};
}

constexpr Task kTasks[] = {Task::phase, Task::direction,
                           Task::frame_degenerate, Task::frame_rydberg};

// Random instance used by the randomized criteria: a task, a fiducial
// (named family or custom coefficients), and the matching cost matrix.
struct Instance {
  Task task;
  CostMatrix m;
  FiducialState c;
};

Instance random_instance(std::mt19937_64& rng, int max_n) {
  std::uniform_real_distribution<double> ud(0.05, 1.0);
  const Task t = kTasks[rng() % 4];
  const auto fams = families_for(t);
  const int pick = static_cast<int>(rng() % (fams.size() + 1));
  const int n = 1 + static_cast<int>(rng() % max_n);
  FiducialState c;
  if (pick == static_cast<int>(fams.size())) {
    std::vector<double> raw(n + 1);
    for (auto& v : raw) v = ud(rng);
    if (rng() % 3 == 0) raw[rng() % (n + 1)] = 0.0;
    c = make_custom_fiducial(std::move(raw));
  } else {
    c = make_fiducial(fams[pick], n);
  }
  return {t, build_cost_matrix(t, n), std::move(c)};
}

// --- criteria ---------------------------------------------------------------

// 1. Flat-family phase estimation without abstention obeys the exact
//    finite-size law F = 1 - 1/(2n+2) for every n up to 200.
Outcome criterion_1() {
  double worst = 0.0;
  for (int n = 1; n <= 200; ++n) {
    const auto r = solve_abstention(build_cost_matrix(Task::phase, n),
                                    make_fiducial(Family::flat_phase, n),
                                    make_budget(0.0));
    if (!r.converged) return {false, fmt("solver failed at n = %d", n)};
    worst = std::max(worst, std::abs(r.fidelity - (1.0 - 0.5 / (n + 1))));
  }
  return {worst < 1e-10,
          fmt("exact flat-family law, n = 1..200: max dev %.2e (bound 1e-10)",
              worst)};
}

// 2. The n = 200 optimal phase fidelity matches its closed form to
//    1e-12 and its quadratic asymptote to 2.5%.
Outcome criterion_2() {
  const int n = 200;
  const auto e = top_eigenpair(build_cost_matrix(Task::phase, n));
  const double f_star = 0.5 * (1.0 + e.value);
  const double exact = 0.5 * (1.0 + std::cos(kPi / (n + 2)));
  const double d_exact = std::abs(f_star - exact);
  const double asy = kPi * kPi / (4.0 * double(n) * double(n));
  const double d_asy = rel_dev(1.0 - f_star, asy);
  return {d_exact < 1e-12 && d_asy < 0.025,
          fmt("optimal phase point, n = 200: closed form dev %.2e "
              "(bound 1e-12), asymptote dev %.3f%% (bound 2.5%%)",
              d_exact, 100.0 * d_asy)};
}

// 3. Flat family at n = 220, q = 0.17: the scaled error n^2 S matches
//    pi^2 / (8 q (1-q)) to 5%.
Outcome criterion_3() {
  const int n = 220;
  const double q = 0.17;
  const auto r = solve_abstention(build_cost_matrix(Task::phase, n),
                                  make_fiducial(Family::flat_phase, n),
                                  make_budget(q));
  if (!r.converged) return {false, "solver failed"};
  const double scaled = double(n) * double(n) * (1.0 - r.delta);
  const double target = kPi * kPi / (8.0 * q * (1.0 - q));
  const double d = rel_dev(scaled, target);
  return {d < 0.05, fmt("flat family n = 220, q = 0.17: n^2 S = %.4f vs "
                        "%.4f, dev %.2f%% (bound 5%%)",
                        scaled, target, 100.0 * d)};
}

// 4. Equatorial family at n = 100 follows the parametric shot-noise
//    curve across q = 0.1..0.9 to 5%.
Outcome criterion_4() {
  const int n = 100;
  const auto m = build_cost_matrix(Task::phase, n);
  const auto c = make_fiducial(Family::equator, n);
  double worst = 0.0;
  for (int i = 1; i <= 9; ++i) {
    const double q = 0.1 * i;
    const auto r = solve_abstention(m, c, make_budget(q));
    if (!r.converged) return {false, fmt("solver failed at q = %.1f", q)};
    const double scaled = double(n) * (1.0 - r.delta);
    worst = std::max(
        worst, rel_dev(scaled, phase_equator_curve_at(q, n).scaled_smin));
  }
  return {worst < 0.05, fmt("equatorial family n = 100, q = 0.1..0.9: "
                            "max curve dev %.2f%% (bound 5%%)",
                            100.0 * worst)};
}

// 5. The n = 200 optimal direction fidelity matches 1 - gamma1^2/(2n)^2
//    to 3%.
Outcome criterion_5() {
  const int n = 200;
  const auto e = top_eigenpair(build_cost_matrix(Task::direction, n));
  const double one_minus_f = 0.5 * (1.0 - e.value);
  const double g = 2.404825557695773;
  const double asy = g * g / (4.0 * double(n) * double(n));
  const double d = rel_dev(one_minus_f, asy);
  return {d < 0.03, fmt("optimal direction point, n = 200: asymptote dev "
                        "%.3f%% (bound 3%%)",
                        100.0 * d)};
}

// 6. Seed-family direction estimation: n^2 S tracks pi^2/(8q) at
//    n = 120, q = 0.1 (10%) and gamma1^2/2 at n = 50, q = 0.73 (5%).
Outcome criterion_6() {
  const auto run = [](int n, double q) {
    const auto r = solve_abstention(build_cost_matrix(Task::direction, n),
                                    make_fiducial(Family::povm_seed_direction, n),
                                    make_budget(q));
    return double(n) * double(n) * (1.0 - r.delta);
  };
  const double g = 2.404825557695773;
  const double da = rel_dev(run(120, 0.1), kPi * kPi / 0.8);
  const double db = rel_dev(run(50, 0.73), 0.5 * g * g);
  return {da < 0.10 && db < 0.05,
          fmt("seed family: n = 120, q = 0.1 dev %.2f%% (bound 10%%); "
              "n = 50, q = 0.73 dev %.2f%% (bound 5%%) "
              "[plateau approaches gamma1^2/2 only as (1 + 3/(2n))^-2, "
              "which sits below the bound at n = 50]",
              100.0 * da, 100.0 * db)};
}

// 7. Antiparallel family: (a) n = 100 follows the parametric curve on
//    q = 0.2..0.9 to 5%; (b) the ln(acceptance) decay per system at the
//    half-way operating point matches -2[ln 2 - H(1/4)] to 2% once the
//    cubic prefactor is removed (prefactors are derived, rates are the
//    contract).
Outcome criterion_7() {
  const int n = 100;
  const auto m = build_cost_matrix(Task::direction, n);
  const auto c = make_fiducial(Family::antiparallel, n);
  double worst = 0.0;
  for (int i = 0; i <= 14; ++i) {
    const double q = 0.20 + 0.05 * i;
    const auto r = solve_abstention(m, c, make_budget(q));
    if (!r.converged) return {false, fmt("solver failed at q = %.2f", q)};
    const double scaled = double(n) * (1.0 - r.delta);
    worst = std::max(
        worst,
        rel_dev(scaled, direction_antiparallel_curve_at(q, n).scaled_smin));
  }

  const double rate = -2.0 * (std::numbers::ln2 - binary_entropy(0.25));
  const int ns[] = {50, 100, 200};
  double lnq[3];
  for (int i = 0; i < 3; ++i)
    lnq[i] = std::log(
        direction_antiparallel_heisenberg(2 * ns[i], 0.5).qbar);
  double worst_rate = 0.0;
  for (int i = 0; i < 2; ++i) {
    const double slope =
        (lnq[i + 1] - lnq[i] - 3.0 * std::log(double(ns[i + 1]) / ns[i])) /
        (ns[i + 1] - ns[i]);
    worst_rate = std::max(worst_rate, rel_dev(slope, rate));
  }
  return {worst < 0.05 && worst_rate < 0.02,
          fmt("antiparallel family: max curve dev %.2f%% (bound 5%%); "
              "acceptance decay rate dev %.2e (bound 2%%)",
              100.0 * worst, worst_rate)};
}

// 8. The n = 1000 frame-estimation ground error matches the three-term
//    Airy series to 1%.
Outcome criterion_8() {
  const int n = 1000;
  const auto e = top_eigenpair(build_cost_matrix(Task::frame_rydberg, n));
  const double s_eig = 1.0 - e.value;
  const double s_ser = frame_rydberg_optimal(n, true).s_star;
  const double d = rel_dev(s_eig, s_ser);
  return {d < 0.01, fmt("frame ground error, n = 1000: eigenvalue %.6e vs "
                        "series %.6e, dev %.3f%% (bound 1%%)",
                        s_eig, s_ser, 100.0 * d)};
}

// 9. Linear-ramp family at n = 90 follows the implicit limited-abstention
//    curve across q = 0.2..0.8 to 5%.
Outcome criterion_9() {
  const int n = 90;
  const auto m = build_cost_matrix(Task::frame_rydberg, n);
  const auto c = make_fiducial(Family::linear_ramp, n);
  double worst = 0.0;
  for (int i = 0; i <= 12; ++i) {
    const double q = 0.20 + 0.05 * i;
    const auto r = solve_abstention(m, c, make_budget(q));
    if (!r.converged) return {false, fmt("solver failed at q = %.2f", q)};
    const double scaled = double(n) * (1.0 - r.delta);
    worst = std::max(
        worst,
        rel_dev(scaled,
                frame_rydberg_limited(n, q, FrameCurveMode::implicit)
                    .scaled_smin));
  }
  return {worst < 0.05, fmt("linear-ramp family n = 90, q = 0.2..0.8: "
                            "max curve dev %.2f%% (bound 5%%)",
                            100.0 * worst)};
}

// 10. Special functions: the J/Y Wronskian holds to 1e-8 on [0.1, 20],
//     the three named zeros are accurate to 1e-10, and Ai solves its ODE
//     to 1e-6 under a finite-difference probe.
Outcome criterion_10() {
  double worst_w = 0.0;
  for (int i = 0; i < 100; ++i) {
    const double z = 0.1 + (20.0 - 0.1) * i / 99.0;
    const double w = bessel_j1(z) * bessel_y0(z) -
                     bessel_y1(z) * bessel_j0(z) - 2.0 / (kPi * z);
    worst_w = std::max(worst_w, std::abs(w));
  }

  const double dz =
      std::max({std::abs(j0_zero1() - 2.404825557695773),
                std::abs(ai_zero1() - (-2.338107410459767)),
                std::abs(ai_prime_zero1() - (-1.018792971647471))});

  double worst_ode = 0.0;
  const double h = 2e-3;
  for (int i = 0; i <= 110; ++i) {
    const double x = -8.0 + 0.1 * i;
    const double ym2 = airy_ai(x - 2.0 * h), ym1 = airy_ai(x - h);
    const double y0 = airy_ai(x);
    const double yp1 = airy_ai(x + h), yp2 = airy_ai(x + 2.0 * h);
    const double y2 =
        (-ym2 + 16.0 * ym1 - 30.0 * y0 + 16.0 * yp1 - yp2) / (12.0 * h * h);
    worst_ode = std::max(worst_ode, std::abs(y2 - x * y0));
  }
  return {worst_w < 1e-8 && dz < 1e-10 && worst_ode < 1e-6,
          fmt("special functions: Wronskian dev %.2e (bound 1e-8), zero dev "
              "%.2e (bound 1e-10), ODE residual %.2e (bound 1e-6)",
              worst_w, dz, worst_ode)};
}

// 11. The production solver agrees with exhaustive enumeration on 200
//     randomized small instances (1e-8) and with projected gradient on
//     20 instances at n = 200 (1e-7).
Outcome criterion_11() {
  std::mt19937_64 rng(20240819);
  double worst_small = 0.0;
  for (int rep = 0; rep < 200; ++rep) {
    auto ins = random_instance(rng, 10);
    const double q = 0.1 * static_cast<double>(rng() % 10);
    const auto budget = make_budget(q);
    const auto a = solve_abstention(ins.m, ins.c, budget, rng());
    const auto e = oracle_enumerate(ins.m, ins.c, budget);
    if (!a.converged) return {false, fmt("solver failed on case %d", rep)};
    worst_small = std::max(worst_small, std::abs(a.delta - e.delta));
  }
  double worst_large = 0.0;
  for (int rep = 0; rep < 20; ++rep) {
    const Task t = kTasks[rng() % 4];
    const auto fams = families_for(t);
    const Family f = fams[rng() % fams.size()];
    const int n = 200;
    const double q = 0.1 * static_cast<double>(1 + rng() % 9);
    const auto m = build_cost_matrix(t, n);
    const auto c = make_fiducial(f, n);
    const auto budget = make_budget(q);
    const auto a = solve_abstention(m, c, budget, rng());
    const auto g = oracle_projected_gradient(m, c, budget, 1, rng());
    if (!a.converged) return {false, fmt("solver failed on large case %d", rep)};
    worst_large = std::max(worst_large, std::abs(a.delta - g.delta));
  }
  return {worst_small < 1e-8 && worst_large < 1e-7,
          fmt("oracle agreement: 200 enumerated cases max dev %.2e "
              "(bound 1e-8); 20 projected-gradient cases at n = 200 "
              "max dev %.2e (bound 1e-7)",
              worst_small, worst_large)};
}

// 12. Structural properties over at least 500 randomized solves:
//     fidelity is monotone in q, the plateau holds beyond the critical
//     rate, the acceptance filter reproduces q to 1e-9, and the
//     fidelity/error identities hold to 1e-12.
Outcome criterion_12() {
  std::mt19937_64 rng(814);
  std::uniform_real_distribution<double> qd(0.0, 0.9);
  int solves = 0;
  double worst_mono = -1e300, worst_filter = 0.0, worst_ident = 0.0,
         worst_plateau = 0.0;
  for (int rep = 0; rep < 260; ++rep) {
    auto ins = random_instance(rng, 40);
    const double q1 = qd(rng);
    const double q2 = std::min(0.95, q1 + 0.01 + 0.5 * qd(rng));
    const auto b1 = make_budget(q1);
    const auto r1 = solve_abstention(ins.m, ins.c, b1, rng());
    const auto r2 = solve_abstention(ins.m, ins.c, make_budget(q2), rng());
    solves += 2;
    if (!r1.converged || !r2.converged)
      return {false, fmt("solver failed on instance %d", rep)};
    worst_mono = std::max(worst_mono, r1.fidelity - r2.fidelity);

    try {
      const auto f = filter_coefficients(ins.c, r1.xi, b1);
      double back = 0.0;
      for (std::size_t j = 0; j < f.size(); ++j)
        back += ins.c.coeffs[j] * ins.c.coeffs[j] * f[j];
      worst_filter = std::max(worst_filter, std::abs(back - q1));
    } catch (const std::exception& ex) {
      return {false, fmt("filter rejected instance %d: %s", rep, ex.what())};
    }

    worst_ident = std::max(
        {worst_ident, std::abs(r1.fidelity - 0.5 * (1.0 + r1.delta)),
         std::abs(quadratic_form(ins.m, r1.xi.xi) - r1.delta),
         std::abs(norm_squared(r1.xi.xi) - 1.0)});

    const auto star = top_eigenpair(ins.m);
    const auto cr = critical_abstention(ins.c, star);
    if (cr.reachable && cr.q_star <= 0.93) {
      const auto rp = solve_abstention(
          ins.m, ins.c, make_budget(std::min(0.95, cr.q_star + 0.02)), rng());
      solves += 1;
      if (!rp.converged) return {false, fmt("plateau solve failed: %d", rep)};
      worst_plateau =
          std::max(worst_plateau, std::abs(rp.delta - star.value));
    }
  }
  return {worst_mono < 1e-9 && worst_filter < 1e-9 && worst_ident < 1e-12 &&
              worst_plateau < 1e-9,
          fmt("structural properties over %d solves: monotonicity slack "
              "%.2e, filter round-trip %.2e (bound 1e-9), identities %.2e "
              "(bound 1e-12), plateau dev %.2e (bound 1e-9)",
              solves, std::max(0.0, worst_mono), worst_filter, worst_ident,
              worst_plateau)};
}

}  // namespace

int main() {
  using Criterion = Outcome (*)();
  const Criterion all[] = {criterion_1, criterion_2,  criterion_3,
                           criterion_4, criterion_5,  criterion_6,
                           criterion_7, criterion_8,  criterion_9,
                           criterion_10, criterion_11, criterion_12};
  int failures = 0;
  for (int i = 0; i < 12; ++i) {
    Outcome o;
    try {
      o = all[i]();
    } catch (const std::exception& ex) {
      o = {false, fmt("unexpected exception: %s", ex.what())};
    }
    if (!o.pass) ++failures;
    std::printf("%s  criterion %2d  %s\n", o.pass ? "PASS" : "FAIL", i + 1,
                o.detail.c_str());
    std::fflush(stdout);
  }
  if (failures > 0)
    std::printf("%d of 12 criteria failed\n", failures);
  else
    std::printf("all 12 criteria passed\n");
  return failures;
}
