#include "abstention/asymptotics.hpp"

#include <cmath>
#include <limits>
#include <numbers>
#include <stdexcept>

#include "abstention/specfun.hpp"

namespace abst {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kLn2 = std::numbers::ln2;

void require(bool ok, const char* msg) {
  if (!ok) throw std::invalid_argument(msg);
}

double clamp01(double x) { return std::min(1.0, std::max(0.0, x)); }

}  // namespace

double CurvePoint::smin_at(double n) const {
  return scaled_smin / std::pow(n, power);
}

double CurvePoint::fidelity_at(double n) const {
  return 1.0 - 0.5 * smin_at(n);
}

double binary_entropy(double p) {
  require(p >= 0.0 && p <= 1.0, "binary_entropy: p must lie in [0, 1]");
  if (p <= 0.0 || p >= 1.0) return 0.0;
  return -p * std::log(p) - (1.0 - p) * std::log(1.0 - p);
}

// --- Phase -------------------------------------------------------------------

double phase_optimal_fidelity(int N) {
  require(N >= 1, "phase_optimal_fidelity: N must be >= 1");
  return 1.0 - kPi * kPi / (4.0 * double(N) * double(N));
}

double phase_flat_fidelity(int N, double q) {
  require(N >= 1, "phase_flat_fidelity: N must be >= 1");
  require(q > 0.0 && q < 1.0,
          "phase_flat_fidelity: q must lie in (0, 1); the q = 0 law is exact "
          "finite-N and lives in the solver");
  if (q > 0.5) return phase_optimal_fidelity(N);
  return 1.0 - kPi * kPi / (16.0 * q * (1.0 - q) * double(N) * double(N));
}

CurvePoint phase_equator_shot_curve(double omega, int n) {
  require(n >= 1, "phase_equator_shot_curve: n must be >= 1");
  require(omega > 0.0 && omega < 0.5 * kPi,
          "phase_equator_shot_curve: omega must lie in (0, pi/2)");
  const double tn = std::tan(omega);
  const double x2 = omega * tn;
  const double x = std::sqrt(x2);
  const double sec2 = 1.0 + tn * tn;

  const double q = erf_pair(x).erf -
                   (omega * sec2 + tn) * std::sqrt(tn / (kPi * omega)) *
                       std::exp(-x2);
  // sqrt(pi*x2) * Erfc(x) * e^(x2) written through the scaled complement,
  // which stays representable for all omega.
  const double tail = std::sqrt(kPi) * x * erfcx(x);
  const double numer = tn * tn - omega * (2.0 * omega - tn) * sec2;
  const double denom = 2.0 * omega * omega * sec2 + tail;
  const double smin = (0.5 / double(n)) / (1.0 + numer / denom);

  CurvePoint cp;
  cp.q = clamp01(q);
  cp.scaled_smin = double(n) * smin;
  cp.power = 1;
  cp.regime = RegimeTag::shot_noise;
  return cp;
}

CurvePoint phase_equator_curve_at(double q, int n) {
  require(q > 0.0 && q < 1.0, "phase_equator_curve_at: q must lie in (0, 1)");
  const double omega = find_root(
      [&](double w) { return phase_equator_shot_curve(w, n).q - q; }, 1e-8,
      0.5 * kPi - 1e-12, 1e-13);
  return phase_equator_shot_curve(omega, n);
}

HeisenbergPoint phase_equator_heisenberg(int N, double alpha) {
  require(N >= 1, "phase_equator_heisenberg: N must be >= 1");
  require(alpha > 0.0 && alpha <= 0.5,
          "phase_equator_heisenberg: alpha must lie in (0, 1/2]");
  const double n = double(N);
  HeisenbergPoint hp;
  hp.fidelity = 1.0 - kPi * kPi / (16.0 * n * n * alpha * alpha);
  hp.qbar_log_rate = -(kLn2 - binary_entropy(alpha + 0.5));
  if (alpha == 0.5) {
    hp.qbar = std::exp2(-n);  // limit value; the prefactor is singular here
  } else {
    const double at = std::atanh(2.0 * alpha);
    hp.qbar = std::pow(2.0 * n / kPi, 2.5) * alpha * alpha * alpha * at * at /
              std::sqrt(1.0 - 4.0 * alpha * alpha) *
              std::exp(n * hp.qbar_log_rate);
  }
  hp.derived_prefactor = false;
  return hp;
}

// --- Direction ---------------------------------------------------------------

double direction_optimal_fidelity(int N) {
  require(N >= 2 && N % 2 == 0,
          "direction_optimal_fidelity: N must be even and >= 2");
  const double g = j0_zero1();
  return 1.0 - g * g / (double(N) * double(N));
}

double direction_povm_crossover() {
  const double g = j0_zero1();
  return kPi * kPi / (4.0 * g * g);
}

double direction_povm_qstar() {
  const double j1 = bessel_j1(j0_zero1());
  return 1.0 - j1 * j1;
}

double direction_povm_smin(double q) {
  require(q > 0.0 && q < 1.0,
          "direction_povm_smin: q must lie in (0, 1); without abstention this "
          "family is shot-noise limited");
  const double g = j0_zero1();
  if (q <= direction_povm_crossover()) return kPi * kPi / (8.0 * q);
  return 0.5 * g * g;
}

CurvePoint direction_antiparallel_shot_curve(double omega, int n) {
  require(n >= 1, "direction_antiparallel_shot_curve: n must be >= 1");
  require(omega > 0.0 && omega < j0_zero1(),
          "direction_antiparallel_shot_curve: omega must lie in (0, gamma1)");
  const double a2 = omega * bessel_j1(omega) / bessel_j0(omega);
  const double qbar = (1.0 + a2 + a2 * a2 * a2 / (omega * omega)) *
                      std::exp(-a2);
  const double smin = (omega * omega / (2.0 * double(n))) *
                      (1.0 - a2 + a2 * a2 + omega * omega) /
                      (a2 * a2 * a2 + (1.0 + a2) * omega * omega);
  CurvePoint cp;
  cp.q = clamp01(1.0 - qbar);
  cp.scaled_smin = double(n) * smin;
  cp.power = 1;
  cp.regime = RegimeTag::shot_noise;
  return cp;
}

CurvePoint direction_antiparallel_curve_at(double q, int n) {
  require(q > 0.0 && q < 1.0,
          "direction_antiparallel_curve_at: q must lie in (0, 1)");
  const double omega = find_root(
      [&](double w) { return direction_antiparallel_shot_curve(w, n).q - q; },
      1e-8, j0_zero1() - 1e-12, 1e-13);
  return direction_antiparallel_shot_curve(omega, n);
}

HeisenbergPoint direction_antiparallel_heisenberg(int N, double alpha) {
  require(N >= 2 && N % 2 == 0,
          "direction_antiparallel_heisenberg: N must be even and >= 2");
  require(alpha > 0.0 && alpha <= 1.0,
          "direction_antiparallel_heisenberg: alpha must lie in (0, 1]");
  const double n = 0.5 * double(N);
  const double g = j0_zero1();
  HeisenbergPoint hp;
  hp.fidelity = 1.0 - g * g / (double(N) * double(N) * alpha * alpha);
  hp.qbar_log_rate = -2.0 * (kLn2 - binary_entropy(0.5 * (1.0 - alpha)));
  if (alpha == 1.0) {
    // Prefactor singular at the endpoint; only the rate is meaningful.
    hp.qbar = std::numeric_limits<double>::quiet_NaN();
  } else {
    const double at = std::atanh(alpha);
    const double pref = n * n * n * std::pow(alpha, 4.0) * at * at /
                        (std::sqrt(1.0 - alpha) * std::pow(1.0 + alpha, 1.5) *
                         g * g);
    hp.qbar = pref * std::exp(n * hp.qbar_log_rate);
  }
  hp.derived_prefactor = true;
  return hp;
}

// --- Frame -------------------------------------------------------------------

double frame_degenerate_fidelity(int N, double q, FrameScenario scenario,
                                 double alpha) {
  require(N >= 2 && N % 2 == 0,
          "frame_degenerate_fidelity: N must be even and >= 2");
  switch (scenario) {
    case FrameScenario::optimal:
      return phase_optimal_fidelity(N / 2);
    case FrameScenario::flat:
      return phase_flat_fidelity(N / 2, q);
    case FrameScenario::heisenberg:
      return phase_equator_heisenberg(N / 2, alpha).fidelity;
  }
  throw std::invalid_argument("frame_degenerate_fidelity: unknown scenario");
}

RydbergOptimum frame_rydberg_optimal(int n, bool with_correction) {
  require(n >= 1, "frame_rydberg_optimal: n must be >= 1");
  const double g = ai_zero1();  // negative
  const double nn = double(n);
  double s = 1.0 / nn - g / (std::cbrt(2.0) * std::pow(nn, 4.0 / 3.0));
  if (with_correction)
    s += std::pow(2.0, 7.0 / 3.0) * g * g / (15.0 * std::pow(nn, 5.0 / 3.0));

  RydbergOptimum out;
  out.s_star = s;
  out.f_star = 1.0 - 0.5 * s;

  const double N = 2.0 * nn;
  double f = 1.0 - 1.0 / N + g / std::pow(N, 4.0 / 3.0);
  if (with_correction)
    f -= 8.0 * g * g / (15.0 * std::pow(N, 5.0 / 3.0));
  out.f_form = f;
  if (std::abs(out.f_star - out.f_form) > 1e-13)
    throw std::logic_error(
        "frame_rydberg_optimal: S-form and F-form series disagree");
  return out;
}

namespace {

// Implicit linear-ramp curve machinery (parameter alpha in (0, 1)).
double frame_omega2(double n, double alpha, double gp) {
  const double an = 2.0 * alpha * n;
  const double gp3 = gp * gp * gp;
  const double coef = ((8.0 * gp3 - 3.0) - 4.0 * alpha * (2.0 * gp3 + 3.0)) /
                      (15.0 * alpha * alpha * (1.0 - alpha) * gp);
  return 2.0 * n / alpha - std::pow(an, 2.0 / 3.0) * gp / (alpha * alpha) +
         coef * std::cbrt(an);
}

double frame_qbar(double n, double alpha, double gp) {
  const double om2 = frame_omega2(n, alpha, gp);
  const double one_m = 1.0 - alpha;
  return one_m * one_m * one_m -
         3.0 * alpha * one_m * one_m *
             ((1.0 - alpha * om2 / (2.0 * n)) -
              alpha / (2.0 * n * one_m * one_m));
}

}  // namespace

CurvePoint frame_rydberg_limited(int n, double q, FrameCurveMode mode) {
  require(n >= 1, "frame_rydberg_limited: n must be >= 1");
  require(q > 0.0 && q < 1.0,
          "frame_rydberg_limited: q must lie in (0, 1); the q = 0 error "
          "scales as log(n)/n, outside these formulas");
  const double qbar = 1.0 - q;
  CurvePoint cp;
  cp.q = q;
  cp.power = 1;
  cp.regime = RegimeTag::shot_noise;

  if (mode == FrameCurveMode::leading) {
    const double x = std::cbrt(qbar);
    const double smin = -(3.0 / (2.0 * double(n) * qbar)) *
                        (2.0 * std::log1p(-x) + 2.0 * x + x * x);
    cp.scaled_smin = double(n) * smin;
    return cp;
  }

  const double gp = ai_prime_zero1();  // negative
  const double nn = double(n);
  const double alpha = find_root(
      [&](double a) { return frame_qbar(nn, a, gp) - qbar; }, 1e-6, 1.0 - 1e-6,
      1e-13);
  const double om2 = frame_omega2(nn, alpha, gp);
  const double qb = frame_qbar(nn, alpha, gp);
  const double lam2 = 1.0 / qb;
  const double one_m = 1.0 - alpha;
  const double smin =
      -(3.0 * lam2 / nn) *
          (std::log(alpha) + 2.0 - 2.0 * alpha - 0.5 * (1.0 - alpha * alpha)) +
      (om2 / (2.0 * nn * nn)) * (1.0 - lam2 * one_m * one_m * one_m);
  cp.scaled_smin = nn * smin;
  cp.reduced_accuracy = (q > 0.9);
  return cp;
}

// --- Profiles ----------------------------------------------------------------

double profile_norm_squared(const std::vector<ProfileSample>& samples) {
  const int m = static_cast<int>(samples.size()) - 1;  // intervals
  require(m >= 1, "profile_norm_squared: need at least two samples");
  auto f = [&](int i) { return samples[i].phi * samples[i].phi; };
  const double h = (samples[m].t - samples[0].t) / m;
  if (m == 1) return 0.5 * h * (f(0) + f(1));
  if (m == 2) return (h / 3.0) * (f(0) + 4.0 * f(1) + f(2));
  double s = 0.0;
  const int even_end = (m % 2 == 0) ? m : m - 3;
  for (int i = 0; i + 2 <= even_end; i += 2)
    s += (h / 3.0) * (f(i) + 4.0 * f(i + 1) + f(i + 2));
  if (m % 2 == 1)  // 3/8 rule closes the odd tail
    s += (3.0 * h / 8.0) *
         (f(m - 3) + 3.0 * f(m - 2) + 3.0 * f(m - 1) + f(m));
  return s;
}

std::vector<ProfileSample> profile_sample(ProfileScenario scenario, double q,
                                          int resolution, int n) {
  require(resolution >= 2, "profile_sample: resolution must be >= 2");
  std::vector<ProfileSample> out(resolution);
  for (int i = 0; i < resolution; ++i)
    out[i].t = double(i) / double(resolution - 1);

  switch (scenario) {
    case ProfileScenario::phase_optimal: {
      const double r2 = std::sqrt(2.0);
      for (auto& s : out) s.phi = r2 * std::sin(kPi * s.t);
      return out;
    }
    case ProfileScenario::phase_flat: {
      require(q >= 0.0 && q <= 0.5,
              "profile_sample: phase_flat needs q in [0, 1/2]");
      const double qbar = 1.0 - q;
      const double amp = 1.0 / std::sqrt(qbar);
      for (auto& s : out) {
        if (s.t < q)
          s.phi = amp * std::sin(kPi * s.t / (2.0 * q));
        else if (s.t <= qbar)
          s.phi = amp;
        else
          s.phi = amp * std::sin(kPi * (1.0 - s.t) / (2.0 * q));
      }
      return out;
    }
    case ProfileScenario::direction_optimal: {
      const double g = j0_zero1();
      const double denom = bessel_j1(g);
      for (auto& s : out)
        s.phi = std::sqrt(2.0 * s.t) * bessel_j0(g * s.t) / denom;
      return out;
    }
    case ProfileScenario::frame_airy: {
      require(n >= 1, "profile_sample: frame_airy needs n >= 1");
      const double g = ai_zero1();
      const double scale = std::cbrt(2.0 * double(n));
      for (auto& s : out) {
        const double x = scale * (1.0 - s.t) + g;
        s.phi = (x <= 15.0) ? airy_ai(x) : 0.0;  // Ai(15) < 1e-19
      }
      const double nrm = std::sqrt(profile_norm_squared(out));
      require(nrm > 0.0, "profile_sample: degenerate frame profile");
      for (auto& s : out) s.phi /= nrm;
      return out;
    }
  }
  throw std::invalid_argument("profile_sample: unknown scenario");
}

}  // namespace abst
