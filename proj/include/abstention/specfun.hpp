#pragma once

#include <functional>

// Self-contained special functions: Bessel J0/J1/Y0/Y1, Airy Ai/Ai',
// erf/erfc, and a bracketed root finder.  Small arguments use power
// series, large arguments phase-amplitude (Hankel) or exponential
// asymptotic expansions.  Accuracy targets: 1e-8 absolute on the
// supported ranges, one order below the solver tolerances they feed.

namespace abst {

enum class BesselKind { J0, J1, Y0, Y1 };

// z >= 0 for J kinds, z > 0 for Y kinds.
double bessel(BesselKind kind, double z);

double bessel_j0(double z);
double bessel_j1(double z);
double bessel_y0(double z);
double bessel_y1(double z);

enum class AiryKind { Ai, AiPrime };

// Supported range x in [-15, 15].
double airy(AiryKind kind, double x);

double airy_ai(double x);
double airy_ai_prime(double x);

struct ErfPair {
  double erf;
  double erfc;  // always exactly 1 - erf as computed
};

ErfPair erf_pair(double z);

// exp(z^2) * erfc(z) for z >= 0, stable for large z.
double erfcx(double z);

// Bracketed bisection with a final secant polish.  Requires a sign
// change on [lo, hi]; the returned location is accurate to tol.
double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol);

// Named constants, derived once by root-finding on the functions above.
double j0_zero1();        //  2.404825557695773  (first zero of J0)
double ai_zero1();        // -2.338107410459767  (first zero of Ai)
double ai_prime_zero1();  // -1.018792971647471  (first zero of Ai')

}  // namespace abst
