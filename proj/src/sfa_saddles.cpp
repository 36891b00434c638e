#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>

#include <Eigen/LU>

#include "qholo/errors.hpp"
#include "qholo/sfa.hpp"

namespace qholo {
namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kTwoPi = 2.0 * std::numbers::pi;
constexpr int kSeedPhases = 64;
constexpr double kMergeDistance = 1e-6;

double wrap_phase(double u) {
  double w = std::fmod(u + kPi, kTwoPi);
  if (w < 0.0) w += kTwoPi;
  return w - kPi;
}

// Phases u with Im u > 0 and Re u in [-pi, pi) solving
// (pz + a0 sin u)^2 = -kappa^2.
std::array<Complex, 2> ionization_phases(Complex pz, double kappa, double a0) {
  const Complex z = (-pz + Complex(0.0, kappa)) / a0;
  const Complex first = std::asin(z);
  const Complex second = kPi - std::asin((-pz - Complex(0.0, kappa)) / a0);
  return {Complex(wrap_phase(first.real()), first.imag()),
          Complex(wrap_phase(second.real()), second.imag())};
}

// Excursion in units of a0/w for birth phase u0 and zero initial velocity.
double excursion(double u0, double u) { return std::sin(u0) * (u - u0) + std::cos(u) - std::cos(u0); }

struct SeedTable {
  std::array<double, kSeedPhases> birth{};
  std::array<std::optional<double>, kSeedPhases> ret{};
};

const SeedTable& seed_table() {
  static const SeedTable table = [] {
    SeedTable t;
    for (int j = 0; j < kSeedPhases; ++j) {
      t.birth[j] = -kPi + kTwoPi * j / kSeedPhases;
      t.ret[j] = classical_return_phase(t.birth[j]);
    }
    return t;
  }();
  return table;
}

double norm_inf(const Eigen::Vector3cd& v) {
  return std::max({std::abs(v(0)), std::abs(v(1)), std::abs(v(2))});
}

}  // namespace

Complex action_longitudinal(Complex k, Complex t, const FieldRealization& f, double ip) {
  return detail::action_antiderivative(k, 0.0, t, f, ip) -
         detail::action_antiderivative(k, 0.0, Complex(f.window.start), f, ip);
}

Complex direct_saddle_residual(const Momentum& p, Complex t, const FieldRealization& f, double ip) {
  const Complex v = p.pz + vector_potential(f, t);
  return v * v / 2.0 + p.pperp * p.pperp / 2.0 + ip;
}

std::vector<Complex> direct_saddles(const Momentum& p, const FieldRealization& f, double ip) {
  if (!(ip > 0.0)) throw DomainError("ionization potential must be positive");
  std::vector<Complex> out;
  if (f.e0 == 0.0) return out;
  const double kappa = std::sqrt(p.pperp * p.pperp + 2.0 * ip);
  for (Complex u : ionization_phases(p.pz, kappa, f.a0())) {
    Complex t = (u - f.cep) / f.omega;
    // Polish; the inverse sine loses digits when |z| is large.
    for (int it = 0; it < 3; ++it) {
      const Complex v = p.pz + vector_potential(f, t);
      const Complex g = direct_saddle_residual(p, t, f, ip);
      const Complex dg = v * vector_potential_rate(f, t);
      if (std::abs(g) < 1e-15 || dg == 0.0) break;
      t -= g / dg;
    }
    if (!(t.imag() > 0.0)) continue;
    if (t.real() < f.window.start || t.real() > f.window.end) continue;
    out.push_back(t);
  }
  std::sort(out.begin(), out.end(), [](Complex a, Complex b) { return a.real() < b.real(); });
  return out;
}

bool is_returning_direct(Complex t, const FieldRealization& f) {
  const double u = f.phase(t.real());
  // A E = -(a0 e0 / 2) sin 2u.
  return std::sin(2.0 * u) > 0.0;
}

Eigen::Vector3cd rescattering_equations(const Momentum& p, const Eigen::Vector3cd& x,
                                        const FieldRealization& f, double ip) {
  const Complex t0 = x(0), tr = x(1), k = x(2);
  const Complex tau = tr - t0;
  const Complex a0 = vector_potential(f, t0);
  const Complex ar = vector_potential(f, tr);
  const Complex db = vector_potential_integral(f, tr) - vector_potential_integral(f, t0);
  Eigen::Vector3cd out;
  out(0) = (k + a0) * (k + a0) / 2.0 + ip;
  out(1) = k + db / tau;
  out(2) = ((p.pz + ar) * (p.pz + ar) + p.pperp * p.pperp - (k + ar) * (k + ar)) / 2.0;
  return out;
}

Eigen::Matrix3cd rescattering_jacobian(const Momentum& p, const Eigen::Vector3cd& x,
                                       const FieldRealization& f) {
  const Complex t0 = x(0), tr = x(1), k = x(2);
  const Complex tau = tr - t0;
  const Complex a0 = vector_potential(f, t0);
  const Complex ar = vector_potential(f, tr);
  const Complex db = vector_potential_integral(f, tr) - vector_potential_integral(f, t0);
  Eigen::Matrix3cd j;
  j << (k + a0) * vector_potential_rate(f, t0), 0.0, k + a0,
      -a0 / tau + db / (tau * tau), ar / tau - db / (tau * tau), 1.0,
      0.0, (p.pz - k) * vector_potential_rate(f, tr), -(k + ar);
  return j;
}

double rescattering_residual(const Momentum& p, const Eigen::Vector3cd& x,
                             const FieldRealization& f, double ip) {
  Eigen::Vector3cd eq = rescattering_equations(p, x, f, ip);
  eq(1) *= x(1) - x(0);
  return norm_inf(eq);
}

NewtonResult solve_rescattering(const Momentum& p, const Eigen::Vector3cd& seed,
                                const FieldRealization& f, double ip, int max_iterations) {
  NewtonResult res;
  res.x = seed;
  Eigen::Vector3cd eq = rescattering_equations(p, res.x, f, ip);
  double norm = eq.norm();
  for (; res.iterations < max_iterations; ++res.iterations) {
    if (!std::isfinite(norm)) return res;
    if (norm < 1e-14) break;
    const Eigen::Vector3cd step = rescattering_jacobian(p, res.x, f).partialPivLu().solve(-eq);
    if (!step.allFinite()) return res;
    double lambda = 1.0;
    Eigen::Vector3cd trial;
    Eigen::Vector3cd trial_eq;
    double trial_norm = 0.0;
    for (;;) {
      trial = res.x + lambda * step;
      trial_eq = rescattering_equations(p, trial, f, ip);
      trial_norm = trial_eq.norm();
      if (trial_norm < norm || lambda < 1e-3) break;
      lambda *= 0.5;
    }
    const bool tiny_step = (lambda * step).norm() <= 1e-15 * (1.0 + res.x.norm());
    res.x = trial;
    eq = trial_eq;
    norm = trial_norm;
    if (tiny_step) break;
  }
  res.converged = std::isfinite(norm) && res.iterations < max_iterations;
  return res;
}

std::optional<double> classical_return_phase(double birth_phase) {
  constexpr int kScan = 720;
  constexpr double kStart = 1e-3;
  const double u0 = birth_phase;
  double lo = u0 + kStart;
  double g_lo = excursion(u0, lo);
  for (int i = 1; i <= kScan; ++i) {
    const double hi = u0 + kStart + (kTwoPi - kStart) * i / kScan;
    const double g_hi = excursion(u0, hi);
    if (g_lo == 0.0) return lo;
    if ((g_lo < 0.0) != (g_hi < 0.0)) {
      double a = lo, b = hi, ga = g_lo;
      for (int it = 0; it < 200 && b - a > 1e-15 * (1.0 + std::abs(a)); ++it) {
        const double m = 0.5 * (a + b);
        const double gm = excursion(u0, m);
        if ((gm < 0.0) == (ga < 0.0)) {
          a = m;
          ga = gm;
        } else {
          b = m;
        }
      }
      return 0.5 * (a + b);
    }
    lo = hi;
    g_lo = g_hi;
  }
  return std::nullopt;
}

std::vector<ReturnSeed> classical_return_seeds(const Momentum& p, const FieldRealization& f,
                                               bool forward, bool backward) {
  std::vector<ReturnSeed> out;
  if (f.e0 == 0.0) return out;
  const SeedTable& table = seed_table();
  const double a0 = f.a0();
  const double q = p.pperp / a0;
  for (int branch = 0; branch < 2; ++branch) {
    const bool fwd = branch == 0;
    if ((fwd && !forward) || (!fwd && !backward)) continue;
    const double s = fwd ? 1.0 : -1.0;
    // Final pz reached by scattering elastically at the return, minus the target.
    std::array<std::optional<double>, kSeedPhases> mismatch{};
    for (int j = 0; j < kSeedPhases; ++j) {
      if (!table.ret[j]) continue;
      const double ur = *table.ret[j];
      const double v = -std::sin(table.birth[j]) + std::sin(ur);
      const double disc = v * v - q * q;
      if (disc < 0.0) continue;
      const double sign_v = v < 0.0 ? -1.0 : 1.0;
      mismatch[j] = a0 * (-std::sin(ur) + s * sign_v * std::sqrt(disc)) - p.pz;
    }
    for (int j = 0; j + 1 < kSeedPhases; ++j) {
      if (!mismatch[j] || !mismatch[j + 1]) continue;
      const double m0 = *mismatch[j], m1 = *mismatch[j + 1];
      if ((m0 < 0.0) == (m1 < 0.0) && m0 != 0.0) continue;
      const double frac = m0 == m1 ? 0.0 : m0 / (m0 - m1);
      ReturnSeed seed;
      seed.birth_phase = table.birth[j] + frac * (table.birth[j + 1] - table.birth[j]);
      seed.return_phase = *table.ret[j] + frac * (*table.ret[j + 1] - *table.ret[j]);
      seed.forward = fwd;
      out.push_back(seed);
    }
  }
  return out;
}

std::vector<RescatteringSaddle> rescattering_saddles(const Momentum& p, const FieldRealization& f,
                                                     double ip, const RescatteringOptions& opts,
                                                     RescatteringStats* stats) {
  if (!(ip > 0.0)) throw DomainError("ionization potential must be positive");
  std::vector<RescatteringSaddle> out;
  const double a0 = f.a0();
  const double period = f.period();
  const double edge = 1e-12 * period;
  for (const ReturnSeed& seed : classical_return_seeds(p, f, opts.forward, opts.backward)) {
    if (stats) ++stats->seeds;
    const double k = -a0 * std::sin(seed.birth_phase);
    // Birth moved onto the complex ionization root nearest the classical phase.
    Complex birth;
    double best = INFINITY;
    for (Complex u : ionization_phases(k, std::sqrt(2.0 * ip), a0)) {
      const double shift = wrap_phase(u.real() - seed.birth_phase);
      if (std::abs(shift) < best) {
        best = std::abs(shift);
        birth = Complex(seed.birth_phase + shift, u.imag());
      }
    }
    const Eigen::Vector3cd x0((birth - f.cep) / f.omega,
                              Complex((seed.return_phase - f.cep) / f.omega, 0.0), Complex(k, 0.0));
    const NewtonResult sol = solve_rescattering(p, x0, f, ip, opts.max_iterations);
    RescatteringSaddle s{sol.x(0), sol.x(1), sol.x(2)};
    s.residual = sol.x.allFinite() ? rescattering_residual(p, sol.x, f, ip) : INFINITY;
    const double tau = s.excursion();
    const bool keep = sol.converged && s.residual < kSaddleResidualTolerance && s.t0.imag() > 0.0 &&
                      s.t0.real() >= f.window.start - edge && s.t0.real() <= f.window.end + edge &&
                      tau > 0.0 && tau <= period;
    if (!keep) {
      if (stats) ++stats->failed;
      continue;
    }
    const Complex ar = vector_potential(f, s.tr);
    s.forward = ((p.pz + ar) / (s.k + ar)).real() > 0.0;
    const bool duplicate = std::any_of(out.begin(), out.end(), [&](const RescatteringSaddle& o) {
      return std::abs(o.t0 - s.t0) < kMergeDistance && std::abs(o.tr - s.tr) < kMergeDistance &&
             std::abs(o.k - s.k) < kMergeDistance;
    });
    if (!duplicate) out.push_back(s);
  }
  std::sort(out.begin(), out.end(), [](const RescatteringSaddle& a, const RescatteringSaddle& b) {
    if (a.t0.real() != b.t0.real()) return a.t0.real() < b.t0.real();
    return a.tr.real() < b.tr.real();
  });
  return out;
}

SaddleSet find_saddles(const Momentum& p, const FieldRealization& f, double ip) {
  return {direct_saddles(p, f, ip), rescattering_saddles(p, f, ip)};
}

}  // namespace qholo
