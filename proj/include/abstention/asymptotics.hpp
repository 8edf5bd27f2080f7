#pragma once

// Closed-form large-n laws for the abstention-assisted estimation tasks:
// optimal fidelities, shot-noise parametric curves, Heisenberg-regime
// acceptance rates, and the limiting continuum state profiles.  Everything
// here is analytic; the solver provides the finite-n numbers these laws
// are compared against.

#include <vector>

namespace abst {

enum class RegimeTag { shot_noise, heisenberg, optimal };

// One point of a scaled-error curve: scaled_smin = n^power * S_min with
// S_min = 1 - Delta = 2(1 - F).  The scaled form is what the parametric
// curves pin down; fidelity_at undoes the scaling for a concrete n.
struct CurvePoint {
  double q = 0.0;
  double scaled_smin = 0.0;
  int power = 1;  // 1 or 2
  RegimeTag regime = RegimeTag::shot_noise;
  bool reduced_accuracy = false;  // asymptotics strained at this q

  double smin_at(double n) const;
  double fidelity_at(double n) const;  // 1 - S_min/2
};

// Heisenberg-regime operating point: fidelity together with the acceptance
// rate it costs.  qbar_log_rate is d(ln qbar)/dn, the exponential decay per
// added system; prefactors are reliable only where derived_prefactor is
// false, so rate comparisons should use qbar_log_rate.
struct HeisenbergPoint {
  double fidelity = 0.0;
  double qbar = 0.0;
  double qbar_log_rate = 0.0;
  bool derived_prefactor = false;
};

struct ProfileSample {
  double t = 0.0;
  double phi = 0.0;
};

// Binary Shannon entropy in nats; H(0) = H(1) = 0.
double binary_entropy(double p);

// --- Phase interferometry (N = n) -----------------------------------------

// F* = 1 - pi^2/(4 N^2); no abstention needed once the state is optimal.
double phase_optimal_fidelity(int N);

// Flat fiducial: F = 1 - pi^2/(16 q(1-q) N^2) for q in (0, 1/2], plateau at
// F* beyond.  q = 0 is refused: the exact finite-N law there is
// F = 1 - 1/(2N+2), produced by the solver, not by this asymptote.
double phase_flat_fidelity(int N, double q);

// Equatorial fiducial, shot-noise branch, parametrised by omega in
// (0, pi/2): returns (q(omega), n*S_min(omega)); the scaled value is
// n-independent.  q -> 0 recovers n*S_min = 1/2.
CurvePoint phase_equator_shot_curve(double omega, int n);

// Same curve addressed by abstention rate (root-solve for omega).
CurvePoint phase_equator_curve_at(double q, int n);

// Equatorial fiducial, Heisenberg branch: alpha in (0, 1/2] selects the
// operating point; alpha = 1/2 reaches F* at acceptance qbar = 2^-n.
HeisenbergPoint phase_equator_heisenberg(int N, double alpha);

// --- Direction estimation (N = 2n) -----------------------------------------

// F* = 1 - gamma1^2 / N^2 with gamma1 the first zero of J0.
double direction_optimal_fidelity(int N);

// Seed-state family: n^2 * S_min as a function of q; pi^2/(8q) until the
// branches meet, gamma1^2/2 beyond.
double direction_povm_smin(double q);
double direction_povm_crossover();  // pi^2 / (4 gamma1^2)
double direction_povm_qstar();      // 1 - J1(gamma1)^2

// Antiparallel-spins family, shot-noise branch, parametrised by omega in
// (0, gamma1).
CurvePoint direction_antiparallel_shot_curve(double omega, int n);
CurvePoint direction_antiparallel_curve_at(double q, int n);

// Antiparallel Heisenberg branch: alpha in (0, 1]; alpha = 1 reaches F*.
// The prefactor of qbar is reconstructed rather than quoted, hence
// derived_prefactor = true and qbar = NaN at the singular endpoint alpha=1
// (the decay rate is still reported there).
HeisenbergPoint direction_antiparallel_heisenberg(int N, double alpha);

// --- Reference-frame estimation (N = 2n) -----------------------------------

enum class FrameScenario { optimal, flat, heisenberg };

// Degenerate-seed frame estimation maps onto phase estimation with
// N -> N/2; alpha is used by the heisenberg scenario only.
double frame_degenerate_fidelity(int N, double q, FrameScenario scenario,
                                 double alpha = 0.0);

struct RydbergOptimum {
  double s_star = 0.0;  // 1/n - g/(2^(1/3) n^(4/3)) [+ 2^(7/3) g^2/(15 n^(5/3))]
  double f_star = 0.0;  // 1 - s_star/2
  double f_form = 0.0;  // same value written in N = 2n powers (cross-check)
};

// Optimal frame fidelity series; g is the first (negative) zero of Ai.
RydbergOptimum frame_rydberg_optimal(int n, bool with_correction);

enum class FrameCurveMode { leading, implicit };

// Linear-ramp family under limited abstention.  `leading` is the explicit
// 1/n law; `implicit` carries the n^(-1/3) corrections (parameter alpha
// recovered from q by root-solving) and flags reduced accuracy as q -> 1.
CurvePoint frame_rydberg_limited(int n, double q, FrameCurveMode mode);

// --- Continuum profiles ------------------------------------------------------

enum class ProfileScenario { phase_optimal, phase_flat, direction_optimal, frame_airy };

// Uniform samples of the limiting amplitude profile phi(t) on [0, 1].
// phase_flat needs q in [0, 1/2]; frame_airy needs n >= 1 (its shape
// depends on n and is normalized numerically); the others ignore q/n.
std::vector<ProfileSample> profile_sample(ProfileScenario scenario, double q,
                                          int resolution, int n = 0);

// Composite-Simpson value of the profile's squared norm (the quadrature
// used for normalization; handy for checking the unit-norm invariant).
double profile_norm_squared(const std::vector<ProfileSample>& samples);

}  // namespace abst
