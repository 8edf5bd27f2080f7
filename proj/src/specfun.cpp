#include "abstention/specfun.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace abst {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kEulerGamma = 0.57721566490153286061;
constexpr double kTwoOverSqrtPi = 1.12837916709551257390;
constexpr double kSqrtPi = 1.77245385090551602730;

// Crossover between the power series and the Hankel expansion.  At 9 both
// sides carry roughly 1e-12 absolute error; at the conventional 8 the
// truncated asymptotic series bottoms out near 3e-8, too close to the
// 1e-8 budget.
constexpr double kBesselCross = 9.0;

double j0_series(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= -q / (static_cast<double>(k) * k);
    sum += term;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1.0)) break;
  }
  return sum;
}

double j1_series(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0, sum = 1.0;
  for (int k = 1; k < 64; ++k) {
    term *= -q / (static_cast<double>(k) * (k + 1));
    sum += term;
    if (std::abs(term) < 1e-18 * (std::abs(sum) + 1.0)) break;
  }
  return 0.5 * z * sum;
}

double y0_series(double z) {
  const double q = 0.25 * z * z;
  double term = 1.0, harmonic = 0.0, sum = 0.0;
  for (int k = 1; k < 64; ++k) {
    term *= q / (static_cast<double>(k) * k);
    harmonic += 1.0 / k;
    const double add = ((k & 1) ? 1.0 : -1.0) * harmonic * term;
    sum += add;
    if (std::abs(add) < 1e-18 * (std::abs(sum) + 1.0)) break;
  }
  return (2.0 / kPi) *
         ((std::log(0.5 * z) + kEulerGamma) * j0_series(z) + sum);
}

double y1_series(double z) {
  const double q = 0.25 * z * z;
  // sum_{k>=0} (-1)^k (H_k + H_{k+1}) q^k / (k! (k+1)!)
  double term = 1.0, hk = 0.0, hk1 = 1.0;
  double sum = hk1;
  for (int k = 1; k < 64; ++k) {
    term *= -q / (static_cast<double>(k) * (k + 1));
    hk += 1.0 / k;
    hk1 += 1.0 / (k + 1);
    const double add = (hk + hk1) * term;
    sum += add;
    if (std::abs(add) < 1e-18 * (std::abs(sum) + 1.0)) break;
  }
  return (2.0 / kPi) * ((std::log(0.5 * z) + kEulerGamma) * j1_series(z) -
                        1.0 / z - 0.25 * z * sum);
}

struct PhaseAmp {
  double p, q;
};

// P/Q amplitudes of the large-argument form
//   C_nu(z) = sqrt(2/(pi z)) [P cos(chi) -/+ Q sin(chi)].
// a_k = (mu-1)(mu-9)...(mu-(2k-1)^2) / (k! 8^k), mu = 4 nu^2; the series is
// truncated at its smallest term.
PhaseAmp hankel_pq(int nu, double z) {
  const double mu = 4.0 * nu * nu;
  const double zinv = 1.0 / z;
  double p = 1.0, q = 0.0;
  double ak = 1.0, zk = 1.0, prev = std::numeric_limits<double>::max();
  for (int k = 1; k <= 17; ++k) {
    const double odd = 2.0 * k - 1.0;
    ak *= (mu - odd * odd) / (8.0 * k);
    zk *= zinv;
    const double t = ak * zk;
    if (std::abs(t) > prev) break;
    prev = std::abs(t);
    const int m = k / 2;
    const double s = (m % 2) ? -1.0 : 1.0;
    if (k % 2 == 0)
      p += s * t;
    else
      q += s * t;
    if (std::abs(t) < 1e-18) break;
  }
  return {p, q};
}

double bessel_asym(BesselKind kind, double z) {
  const int nu = (kind == BesselKind::J0 || kind == BesselKind::Y0) ? 0 : 1;
  const auto [p, q] = hankel_pq(nu, z);
  const double chi = z - (nu ? 0.75 : 0.25) * kPi;
  const double amp = std::sqrt(2.0 / (kPi * z));
  const double c = std::cos(chi), s = std::sin(chi);
  if (kind == BesselKind::J0 || kind == BesselKind::J1)
    return amp * (p * c - q * s);
  return amp * (p * s + q * c);
}

// Airy asymptotic coefficients u_k and v_k (v_k for the derivative).
constexpr int kAiryTerms = 26;

const std::array<double, kAiryTerms>& airy_u() {
  static const std::array<double, kAiryTerms> table = [] {
    std::array<double, kAiryTerms> u{};
    u[0] = 1.0;
    for (int k = 0; k + 1 < kAiryTerms; ++k) {
      u[k + 1] = u[k] * (6.0 * k + 5.0) * (6.0 * k + 3.0) * (6.0 * k + 1.0) /
                 (216.0 * (k + 1.0) * (2.0 * k + 1.0));
    }
    return u;
  }();
  return table;
}

const std::array<double, kAiryTerms>& airy_v() {
  static const std::array<double, kAiryTerms> table = [] {
    std::array<double, kAiryTerms> v{};
    const auto& u = airy_u();
    for (int k = 0; k < kAiryTerms; ++k)
      v[k] = u[k] * (6.0 * k + 1.0) / (1.0 - 6.0 * k);
    return v;
  }();
  return table;
}

struct AiryPair {
  double ai, aip;
};

// Maclaurin series Ai = c1 f - c2 g, valid for |x| <= 5.
AiryPair airy_series(double x) {
  static const double c1 = std::pow(3.0, -2.0 / 3.0) / std::tgamma(2.0 / 3.0);
  static const double c2 = std::pow(3.0, -1.0 / 3.0) / std::tgamma(1.0 / 3.0);
  if (x == 0.0) return {c1, -c2};
  const double x3 = x * x * x;
  double a = 1.0, b = 1.0, xf = 1.0, xg = x;
  double f = 1.0, g = x, fp = 0.0, gp = 1.0;
  for (int k = 1; k < 64; ++k) {
    a /= static_cast<double>(3 * k) * (3 * k - 1);
    b /= static_cast<double>(3 * k) * (3 * k + 1);
    xf *= x3;
    xg *= x3;
    const double tf = a * xf, tg = b * xg;
    f += tf;
    g += tg;
    fp += tf * (3.0 * k) / x;
    gp += tg * (3.0 * k + 1.0) / x;
    if (std::abs(tf) + std::abs(tg) < 1e-20 * (std::abs(f) + std::abs(g)))
      break;
  }
  return {c1 * f - c2 * g, c1 * fp - c2 * gp};
}

// Truncated asymptotic sum  sum_k (-1)^k coef[k] / zeta^k.
double asym_sum(const std::array<double, kAiryTerms>& coef, double zeta) {
  double sum = coef[0], zk = 1.0, prev = std::numeric_limits<double>::max();
  for (int k = 1; k < kAiryTerms; ++k) {
    zk /= zeta;
    const double t = coef[k] * zk;
    if (std::abs(t) > prev) break;
    prev = std::abs(t);
    sum += (k % 2) ? -t : t;
    if (std::abs(t) < 1e-18) break;
  }
  return sum;
}

// Even/odd split of the same sum, used on the oscillatory side.
double asym_sum_even(const std::array<double, kAiryTerms>& coef, double zeta) {
  const double z2 = zeta * zeta;
  double sum = coef[0], zk = 1.0, prev = std::numeric_limits<double>::max();
  for (int k = 1; 2 * k < kAiryTerms; ++k) {
    zk /= z2;
    const double t = coef[2 * k] * zk;
    if (std::abs(t) > prev) break;
    prev = std::abs(t);
    sum += (k % 2) ? -t : t;
    if (std::abs(t) < 1e-18) break;
  }
  return sum;
}

double asym_sum_odd(const std::array<double, kAiryTerms>& coef, double zeta) {
  const double z2 = zeta * zeta;
  double sum = coef[1] / zeta, zk = 1.0 / zeta,
         prev = std::numeric_limits<double>::max();
  for (int k = 1; 2 * k + 1 < kAiryTerms; ++k) {
    zk /= z2;
    const double t = coef[2 * k + 1] * zk;
    if (std::abs(t) > prev) break;
    prev = std::abs(t);
    sum += (k % 2) ? -t : t;
    if (std::abs(t) < 1e-18) break;
  }
  return sum;
}

AiryPair airy_asym_pos(double x) {
  const double zeta = (2.0 / 3.0) * x * std::sqrt(x);
  const double root4 = std::pow(x, 0.25);
  const double damp = std::exp(-zeta) / (2.0 * kSqrtPi);
  const double ai = damp / root4 * asym_sum(airy_u(), zeta);
  const double aip = -damp * root4 * asym_sum(airy_v(), zeta);
  return {ai, aip};
}

AiryPair airy_asym_neg(double x) {
  const double z = -x;
  const double zeta = (2.0 / 3.0) * z * std::sqrt(z);
  const double root4 = std::pow(z, 0.25);
  const double c = std::cos(zeta - 0.25 * kPi);
  const double s = std::sin(zeta - 0.25 * kPi);
  const double ai =
      (c * asym_sum_even(airy_u(), zeta) + s * asym_sum_odd(airy_u(), zeta)) /
      (kSqrtPi * root4);
  const double aip =
      (s * asym_sum_even(airy_v(), zeta) - c * asym_sum_odd(airy_v(), zeta)) *
      root4 / kSqrtPi;
  return {ai, aip};
}

// Taylor step for y'' = x y: from (ai, aip) at x0, coefficients obey
// (k+2)(k+1) t_{k+2} = x0 t_k + t_{k-1}, radius of convergence infinite.
AiryPair airy_taylor_step(double x0, AiryPair at, double h) {
  double t0 = at.ai, t1 = at.aip;
  double tm1 = 0.0;  // t_{k-1} shifted in below
  double hk = 1.0, sum = t0, dsum = 0.0;
  for (int k = 0; k < 30; ++k) {
    const double t2 = (x0 * t0 + tm1) / ((k + 2.0) * (k + 1.0));
    dsum += (k + 1.0) * t1 * hk;
    hk *= h;
    sum += t1 * hk;
    tm1 = t0;
    t0 = t1;
    t1 = t2;
  }
  return {sum, dsum};
}

// The oscillatory asymptotic expansion only reaches ~5e-9 near
// zeta(-5) = 7.45, so the stretch (-10, -5) is bridged by marching the
// ODE from the series anchor at -5 in Taylor steps; anchors are spaced
// 0.5 apart so an evaluation needs one step of at most 0.25.
AiryPair airy_mid_neg(double x) {
  constexpr int kAnchors = 11;  // -5.0, -5.5, ..., -10.0
  static const std::array<AiryPair, kAnchors> anchors = [] {
    std::array<AiryPair, kAnchors> a{};
    a[0] = airy_series(-5.0);
    double xcur = -5.0;
    AiryPair cur = a[0];
    for (int i = 1; i < kAnchors; ++i) {
      for (int s = 0; s < 5; ++s) {
        cur = airy_taylor_step(xcur, cur, -0.1);
        xcur -= 0.1;
      }
      a[i] = cur;
    }
    return a;
  }();
  int idx = static_cast<int>(std::floor((-5.0 - x) / 0.5 + 0.5));
  if (idx < 0) idx = 0;
  if (idx >= kAnchors) idx = kAnchors - 1;
  const double xa = -5.0 - 0.5 * idx;
  return airy_taylor_step(xa, anchors[idx], x - xa);
}

AiryPair airy_pair(double x) {
  if (!(std::abs(x) <= 15.0))
    throw std::invalid_argument("airy: |x| must not exceed 15");
  if (std::abs(x) <= 5.0) return airy_series(x);
  if (x < 0.0) return (x > -10.0) ? airy_mid_neg(x) : airy_asym_neg(x);
  return airy_asym_pos(x);
}

double erf_series(double z) {
  const double z2 = z * z;
  double term = z, sum = z;
  for (int k = 1; k < 80; ++k) {
    term *= -z2 / k;
    const double add = term / (2 * k + 1);
    sum += add;
    if (std::abs(add) < 1e-20 * std::abs(sum)) break;
  }
  return kTwoOverSqrtPi * sum;
}

// Continued fraction for sqrt(pi) exp(z^2) erfc(z), z >= 1:
//   F = 1/(z +) (1/2)/(z +) (1)/(z +) (3/2)/(z +) ...
double erfc_cf(double z) {
  const double tiny = 1e-300;
  double fv = tiny, c = tiny, d = 0.0;
  for (int k = 1; k <= 400; ++k) {
    const double a = (k == 1) ? 1.0 : 0.5 * (k - 1);
    d = z + a * d;
    if (d == 0.0) d = tiny;
    d = 1.0 / d;
    c = z + a / c;
    if (c == 0.0) c = tiny;
    const double delta = c * d;
    fv *= delta;
    if (std::abs(delta - 1.0) < 1e-17) break;
  }
  return fv;
}

}  // namespace

double bessel(BesselKind kind, double z) {
  const bool y_kind = (kind == BesselKind::Y0 || kind == BesselKind::Y1);
  if (!(z >= 0.0) || (y_kind && z == 0.0))
    throw std::invalid_argument("bessel: argument out of domain");
  if (z >= kBesselCross) return bessel_asym(kind, z);
  switch (kind) {
    case BesselKind::J0:
      return j0_series(z);
    case BesselKind::J1:
      return j1_series(z);
    case BesselKind::Y0:
      return y0_series(z);
    case BesselKind::Y1:
      return y1_series(z);
  }
  throw std::invalid_argument("bessel: unknown kind");
}

double bessel_j0(double z) { return bessel(BesselKind::J0, z); }
double bessel_j1(double z) { return bessel(BesselKind::J1, z); }
double bessel_y0(double z) { return bessel(BesselKind::Y0, z); }
double bessel_y1(double z) { return bessel(BesselKind::Y1, z); }

double airy(AiryKind kind, double x) {
  const AiryPair p = airy_pair(x);
  return (kind == AiryKind::Ai) ? p.ai : p.aip;
}

double airy_ai(double x) { return airy_pair(x).ai; }
double airy_ai_prime(double x) { return airy_pair(x).aip; }

ErfPair erf_pair(double z) {
  const double az = std::abs(z);
  if (az <= 1.0) {
    const double e = erf_series(z);
    return {e, 1.0 - e};
  }
  const double cfc = std::exp(-az * az) / kSqrtPi * erfc_cf(az);
  const double ea = 1.0 - cfc;
  if (z > 0.0) return {ea, cfc};
  return {-ea, 1.0 + ea};
}

double erfcx(double z) {
  if (!(z >= 0.0)) throw std::invalid_argument("erfcx: requires z >= 0");
  if (z <= 1.0) return std::exp(z * z) * (1.0 - erf_series(z));
  return erfc_cf(z) / kSqrtPi;
}

double find_root(const std::function<double(double)>& f, double lo, double hi,
                 double tol) {
  if (!(lo < hi) || !(tol > 0.0))
    throw std::invalid_argument("find_root: bad bracket or tolerance");
  double flo = f(lo), fhi = f(hi);
  if (flo == 0.0) return lo;
  if (fhi == 0.0) return hi;
  if ((flo < 0.0) == (fhi < 0.0))
    throw std::invalid_argument("find_root: no sign change on bracket");
  for (int i = 0; i < 200 && (hi - lo) > tol; ++i) {
    const double mid = 0.5 * (lo + hi);
    const double fm = f(mid);
    if (fm == 0.0) return mid;
    if ((fm < 0.0) == (flo < 0.0)) {
      lo = mid;
      flo = fm;
    } else {
      hi = mid;
      fhi = fm;
    }
  }
  // Secant polish, kept inside the final bracket.
  double best = 0.5 * (lo + hi);
  if (fhi != flo) {
    const double s = hi - fhi * (hi - lo) / (fhi - flo);
    if (s > lo && s < hi) best = s;
  }
  return best;
}

double j0_zero1() {
  static const double z =
      find_root([](double x) { return bessel_j0(x); }, 2.0, 3.0, 1e-14);
  return z;
}

double ai_zero1() {
  static const double z =
      find_root([](double x) { return airy_ai(x); }, -3.0, -2.0, 1e-14);
  return z;
}

double ai_prime_zero1() {
  static const double z = find_root(
      [](double x) { return airy_ai_prime(x); }, -2.0, -0.5, 1e-14);
  return z;
}

}  // namespace abst
