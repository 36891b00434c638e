#include <doctest.h>

#include <cmath>

#include "qholo/errors.hpp"
#include "qholo/sfa.hpp"
#include "support/oracles.hpp"

using namespace qholo;
using doctest::Approx;

namespace {

const double kPi = std::numbers::pi;

FieldRealization default_field(double cep = 0.0) {
  const FieldConstants c = to_atomic_units({});
  return FieldRealization::centred(c.e0, c.omega, cep);
}

double wrap(double u) { return std::remainder(u, 2.0 * kPi); }

}  // namespace

TEST_CASE("direct saddles at p = 0 sit where A = +-i sqrt(2 Ip)") {
  const FieldRealization f = default_field();
  const auto ts = direct_saddles({0.0, 0.0}, f, 0.5);
  REQUIRE(ts.size() == 2);
  for (Complex t : ts) {
    const Complex a = vector_potential(f, t);
    CHECK(std::abs(a.real()) < 1e-12);
    CHECK(std::abs(std::abs(a.imag()) - 1.0) < 1e-12);
    CHECK(std::abs(direct_saddle_residual({0.0, 0.0}, t, f, 0.5)) < 1e-12);
    CHECK(t.imag() > 0.0);
  }
}

TEST_CASE("direct saddles satisfy their equation over the grid") {
  const FieldRealization f = default_field(0.4);
  int total = 0;
  for (double pz = -2.2; pz <= 2.2; pz += 0.1) {
    for (double pp = 0.0; pp <= 1.0; pp += 0.25) {
      for (Complex t : direct_saddles({pz, pp}, f, 0.5)) {
        CHECK(std::abs(direct_saddle_residual({pz, pp}, t, f, 0.5)) < 1e-10);
        CHECK(t.imag() > 0.0);
        CHECK(f.window.contains(t.real()));
        ++total;
      }
    }
  }
  CHECK(total > 300);
}

TEST_CASE("half-cycle symmetry: pz -> -pz with cep + pi shifts the saddle phases by pi") {
  const FieldRealization f = default_field(0.0);
  const FieldRealization g = default_field(kPi);
  for (double pz : {0.3, 0.8, 1.4}) {
    const auto a = direct_saddles({pz, 0.2}, f, 0.5);
    const auto b = direct_saddles({-pz, 0.2}, g, 0.5);
    REQUIRE(a.size() == b.size());
    for (Complex ta : a) {
      const Complex ua = f.phase(ta);
      bool matched = false;
      for (Complex tb : b) {
        const Complex ub = g.phase(tb);
        if (std::abs(wrap(ub.real() - ua.real() - kPi)) < 1e-10 && std::abs(ub.imag() - ua.imag()) < 1e-10) {
          matched = true;
        }
      }
      CHECK(matched);
    }
  }
}

TEST_CASE("direct saddles approach the classical birth phases as Ip -> 0") {
  const FieldRealization f = default_field();
  for (double pz : {0.2, 0.7, 1.2}) {
    const auto ts = direct_saddles({pz, 0.0}, f, 1e-6);
    REQUIRE(ts.size() == 2);
    const double u_classical = std::asin(-pz / f.a0());
    for (Complex t : ts) {
      const double u = f.phase(t.real());
      const double d = std::min(std::abs(wrap(u - u_classical)), std::abs(wrap(u - (kPi - u_classical))));
      CHECK(d < 1e-2);
    }
  }
}

TEST_CASE("action: closed form against quadrature along complex rays") {
  const FieldRealization f = default_field(0.3);
  const double ip = 0.5;
  for (Momentum p : {Momentum{0.4, 0.1}, Momentum{-1.2, 0.7}, Momentum{1.9, 0.0}}) {
    for (Complex t : {Complex(0.0, 15.0), Complex(-40.0, 8.0), Complex(60.0, 2.0)}) {
      const auto integrand = [&](Complex s) {
        const Complex v = p.pz + vector_potential(f, s);
        return v * v / 2.0 + p.pperp * p.pperp / 2.0 + ip;
      };
      const Complex exact = oracle::segment_integral(integrand, Complex(f.window.start), t, 2000);
      const Complex closed = action(p, t, f, ip);
      CHECK(std::abs(closed - exact) < 1e-10 * std::max(1.0, std::abs(exact)));
    }
  }
  CHECK(action({0.3, 0.0}, Complex(f.window.start), f, ip) == Complex(0.0));
}

TEST_CASE("action: free particle without field") {
  FieldRealization f = FieldRealization::centred(0.0, 0.0304);
  const Momentum p{0.7, 0.4};
  for (Complex t : {Complex(10.0, 0.0), Complex(-3.0, 5.0)}) {
    const Complex expected = (0.5 * (0.49 + 0.16) + 0.5) * (t - f.window.start);
    CHECK(std::abs(action(p, t, f, 0.5) - expected) < 1e-10);
  }
  CHECK(direct_saddles(p, f, 0.5).empty());
}

TEST_CASE("action: cycle-averaged rate is Ip + Up at p = 0") {
  const FieldRealization f = default_field(0.2);
  for (double t : {f.window.start, 17.0}) {
    const double rate = (action({0.0, 0.0}, t + f.period(), f, 0.5) - action({0.0, 0.0}, t, f, 0.5)) / f.period();
    CHECK(std::abs(rate - (0.5 + f.up())) < 1e-10);
  }
}

TEST_CASE("classical return phase matches a direct trajectory integration") {
  for (double u0 : {0.05, 0.3, 0.8, 1.3, -2.9, 3.4}) {
    const auto ur = classical_return_phase(u0);
    const double rk = oracle::classical_return_rk4(u0, 2e-5);
    CAPTURE(u0);
    if (std::isnan(rk) || rk > u0 + 2.0 * kPi) {
      CHECK_FALSE(ur.has_value());
    } else {
      REQUIRE(ur.has_value());
      CHECK(*ur == Approx(rk).epsilon(1e-6));
    }
  }
  // Born on the falling side of the field crest there is no return.
  CHECK_FALSE(classical_return_phase(-0.5).has_value());
}

TEST_CASE("rescattering saddles satisfy their equations and retention rules") {
  const FieldRealization f = default_field();
  RescatteringOptions opts;
  int retained = 0;
  for (double pz = -2.2; pz <= 2.2; pz += 0.2) {
    for (double pp : {0.0, 0.3, 0.8}) {
      const Momentum p{pz, pp};
      for (const RescatteringSaddle& s : rescattering_saddles(p, f, 0.5, opts)) {
        CHECK(rescattering_residual(p, s.unknowns(), f, 0.5) < kSaddleResidualTolerance);
        CHECK(s.residual < kSaddleResidualTolerance);
        CHECK(s.t0.imag() > 0.0);
        CHECK(s.excursion() > 0.0);
        CHECK(s.excursion() <= f.period());
        ++retained;
      }
    }
  }
  CHECK(retained > 50);
}

TEST_CASE("Jacobian agrees with finite differences of the equations") {
  const FieldRealization f = default_field(0.1);
  const Momentum p{0.9, 0.3};
  const Eigen::Vector3cd x(Complex(-5.0, 12.0), Complex(70.0, 3.0), Complex(0.8, 0.1));
  const Eigen::Matrix3cd jac = rescattering_jacobian(p, x, f);
  const double h = 1e-6;
  for (int c = 0; c < 3; ++c) {
    Eigen::Vector3cd dx = Eigen::Vector3cd::Zero();
    dx(c) = h;
    const Eigen::Vector3cd col =
        (rescattering_equations(p, x + dx, f, 0.5) - rescattering_equations(p, x - dx, f, 0.5)) / (2 * h);
    CHECK((col - jac.col(c)).norm() < 1e-6 * std::max(1.0, col.norm()));
  }
}

TEST_CASE("forward saddle on axis: born with the returning direct electron, k = pz") {
  const FieldRealization f = default_field();
  for (double pz : {0.4, 0.8, 1.2}) {
    const Momentum p{pz, 0.0};
    const auto direct = direct_saddles(p, f, 0.5);
    bool found = false;
    for (const RescatteringSaddle& s : rescattering_saddles(p, f, 0.5)) {
      if (!s.forward) continue;
      CHECK(std::abs(s.k - pz) < 1e-8);
      for (Complex t : direct) {
        if (std::abs(t - s.t0) < 1e-6) found = is_returning_direct(t, f);
      }
    }
    CHECK(found);
  }
}

TEST_CASE("classical limit: rescattering birth phase follows the real trajectory") {
  const FieldRealization f = default_field();
  const double ip = 1e-6;
  for (double pz : {0.5, 0.9, 1.3}) {
    // Real birth phase with drift momentum pz that returns to the core.
    double u_classical = NAN;
    for (double u0 : {std::asin(-pz / f.a0()), kPi - std::asin(-pz / f.a0())}) {
      if (!std::isnan(oracle::classical_return_rk4(wrap(u0), 1e-4))) u_classical = wrap(u0);
    }
    REQUIRE_FALSE(std::isnan(u_classical));
    RescatteringOptions opts;
    opts.backward = false;
    double best = INFINITY;
    for (const RescatteringSaddle& s : rescattering_saddles({pz, 0.0}, f, ip, opts)) {
      best = std::min(best, std::abs(wrap(f.phase(s.t0.real()) - u_classical)));
    }
    CHECK(best < 1e-2);
  }
}

TEST_CASE("backscattering below the classical cutoff: a long and a short saddle") {
  const FieldRealization f = default_field();
  // Largest backscattered momentum from real trajectories: -k - 2 A(tr).
  double cutoff = 0.0;
  for (double u0 = 0.0; u0 < kPi / 2; u0 += 1e-3) {
    const double ur = oracle::classical_return_rk4(u0, 1e-3);
    if (std::isnan(ur)) continue;
    cutoff = std::max(cutoff, std::abs(f.a0() * (std::sin(u0) - 2.0 * std::sin(ur))));
  }
  CHECK(cutoff * cutoff / 2.0 / f.up() == Approx(10.0).epsilon(0.02));
  RescatteringOptions opts;
  opts.forward = false;
  for (double sign : {1.0, -1.0}) {
    const Momentum p{sign * 0.95 * cutoff, 0.0};
    int backward = 0;
    std::vector<double> excursions;
    for (const RescatteringSaddle& s : rescattering_saddles(p, f, 0.5, opts)) {
      if (s.forward) continue;
      ++backward;
      excursions.push_back(s.excursion());
    }
    CAPTURE(sign);
    REQUIRE(backward >= 2);
    std::sort(excursions.begin(), excursions.end());
    CHECK(excursions.back() - excursions.front() > 1.0);
  }
}

TEST_CASE("invalid inputs") {
  const FieldRealization f = default_field();
  CHECK_THROWS_AS(direct_saddles({0.0, 0.0}, f, 0.0), DomainError);
  CHECK_THROWS_AS(rescattering_saddles({0.0, 0.0}, f, -1.0), DomainError);
}
