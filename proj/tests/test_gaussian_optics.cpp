#include <doctest.h>

#include <cmath>
#include <set>

#include "qholo/errors.hpp"
#include "qholo/gaussian_optics.hpp"
#include "qholo/pipeline.hpp"
#include "support/oracles.hpp"

using namespace qholo;
using doctest::Approx;

TEST_CASE("photon-number variance matches the Fock-space state") {
  for (double amp : {0.0, 1.0, 2.5, 5.0}) {
    for (double r : {0.0, 0.5, 1.0, 1.5}) {
      for (double theta : {0.0, std::numbers::pi, 1.1}) {
        for (double phase : {0.0, 0.4}) {
          const std::complex<double> alpha = std::polar(amp, phase);
          const oracle::FockMoments fock = oracle::displaced_squeezed_moments(alpha, r, theta, 360);
          REQUIRE(fock.norm == Approx(1.0).epsilon(1e-12));
          const PhotonStatistics s = photon_statistics(SqueezedState::make(alpha, r, theta));
          CAPTURE(amp);
          CAPTURE(r);
          CAPTURE(theta);
          CHECK(std::abs(s.mean_n - fock.mean_n) <= 1e-6 * std::max(1.0, fock.mean_n));
          CHECK(std::abs(s.var_n - fock.var_n) <= 1e-6 * std::max(1.0, fock.var_n));
        }
      }
    }
  }
}

TEST_CASE("phase squeezing: var_n approaches |alpha|^2 e^{2r}") {
  for (double r : {0.5, 1.0, 1.5}) {
    const PhotonStatistics s = photon_statistics(SqueezedState::phase_squeezed(100.0, r));
    const double ratio = s.var_n / (1e4 * std::exp(2.0 * r));
    CHECK(ratio >= 0.99);
    CHECK(ratio <= 1.01);
  }
}

TEST_CASE("squeezing in dB") {
  CHECK(squeezing_to_db(0.5) == Approx(4.343).epsilon(1e-3));
  CHECK(squeezing_to_db(1.0) == Approx(8.686).epsilon(1e-3));
  CHECK(squeezing_to_db(1.5) == Approx(13.029).epsilon(1e-3));
  CHECK(squeezing_to_db(0.0) == 0.0);
  CHECK_THROWS_AS(squeezing_to_db(-0.1), DomainError);
}

TEST_CASE("Wigner covariance is a pure Gaussian state with the right axes") {
  for (double r : {0.0, 0.3, 1.5}) {
    for (double theta : {0.0, 0.9, std::numbers::pi, 4.0}) {
      const Wigner w = wigner_of_state(SqueezedState::make({3.0, -1.0}, r, theta));
      CHECK(w.purity_determinant() == Approx(0.25).epsilon(1e-12));
      CHECK(w.cov(0, 1) == w.cov(1, 0));
      const Eigen::Vector2d lambda = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(w.cov).eigenvalues();
      CHECK(lambda(0) == Approx(std::exp(-2 * r) / 2));
      CHECK(lambda(1) == Approx(std::exp(2 * r) / 2));
      CHECK(w.mean(0) == Approx(3.0 * std::sqrt(2.0)));
      CHECK(w.mean(1) == Approx(-std::sqrt(2.0)));
    }
  }
  // theta = 0 squeezes X1; theta = pi squeezes X2.
  const Wigner as = wigner_of_state(SqueezedState::amplitude_squeezed(1.0, 1.0));
  CHECK(as.cov(0, 0) == Approx(std::exp(-2.0) / 2));
  const Wigner ps = wigner_of_state(SqueezedState::phase_squeezed(1.0, 1.0));
  CHECK(ps.cov(1, 1) == Approx(std::exp(-2.0) / 2));
}

TEST_CASE("state validation and theta folding") {
  CHECK_THROWS_AS(SqueezedState::make({1, 0}, -0.1, 0.0), DomainError);
  CHECK_THROWS_AS(SqueezedState::make({1, 0}, 0.1, NAN), DomainError);
  CHECK(SqueezedState::make({1, 0}, 0.1, -std::numbers::pi).theta == Approx(std::numbers::pi));
  CHECK(SqueezedState::make({1, 0}, 0.1, 7.0).theta == Approx(7.0 - 2 * std::numbers::pi));
}

TEST_CASE("counter-based normals pass a KS test and reproduce the covariance") {
  const Wigner w = wigner_of_state(SqueezedState::make({2.0, 1.0}, 0.8, 0.6));
  const std::size_t n = 200000;
  const std::vector<Eigen::Vector2d> xs = sample_quadratures(w, 42, n);
  Eigen::Vector2d mean = Eigen::Vector2d::Zero();
  for (const auto& x : xs) mean += x;
  mean /= double(n);
  Eigen::Matrix2d cov = Eigen::Matrix2d::Zero();
  for (const auto& x : xs) cov += (x - mean) * (x - mean).transpose();
  cov /= double(n - 1);
  CHECK((mean - w.mean).norm() < 5.0 * std::sqrt(w.cov.trace() / n));
  CHECK((cov - w.cov).norm() < 0.02 * w.cov.norm());

  // Whitened draws along both axes.
  const Eigen::Matrix2d inv_root = covariance_sqrt(w.cov).inverse();
  std::vector<double> a, b;
  for (const auto& x : xs) {
    const Eigen::Vector2d z = inv_root * (x - w.mean);
    a.push_back(z(0));
    b.push_back(z(1));
  }
  // 1.63/sqrt(n) is the 1% critical value.
  CHECK(oracle::ks_distance(a) < 1.63 / std::sqrt(double(n)));
  CHECK(oracle::ks_distance(b) < 1.63 / std::sqrt(double(n)));
}

TEST_CASE("sampling is addressable by index and seed") {
  const Wigner w = wigner_of_state(SqueezedState::coherent({1.0, 0.0}));
  const auto xs = sample_quadratures(w, 7, 100);
  CHECK(sample_quadrature(w, 7, 57) == xs[57]);
  CHECK(sample_quadrature(w, 8, 57) != xs[57]);
  std::set<std::pair<double, double>> distinct;
  for (const auto& x : xs) distinct.insert({x(0), x(1)});
  CHECK(distinct.size() == xs.size());
  CHECK_THROWS_AS(sample_quadratures(w, 7, 0), DomainError);
}

TEST_CASE("Gauss-Hermite rule integrates polynomials exactly") {
  for (int order : {1, 2, 5, 10, 20, 40}) {
    const HermiteRule rule = gauss_hermite_rule(order);
    CHECK(rule.weights.sum() == Approx(1.0).epsilon(1e-14));
    for (int k = 0; k <= 2 * order - 1; ++k) {
      double q = 0.0;
      for (int i = 0; i < order; ++i) q += rule.weights(i) * std::pow(rule.nodes(i), k);
      CAPTURE(order);
      CAPTURE(k);
      // Odd moments vanish, so round-off is measured against E|x|^k.
      const double scale = oracle::normal_moment(k % 2 ? k + 1 : k);
      CHECK(std::abs(q - oracle::normal_moment(k)) <= 1e-10 * std::max(1.0, scale));
    }
  }
  CHECK_THROWS_AS(gauss_hermite_rule(0), DomainError);
  CHECK_THROWS_AS(gauss_hermite_rule(65), DomainError);
}

TEST_CASE("bivariate nodes reproduce mean and covariance") {
  const Wigner w = wigner_of_state(SqueezedState::make({4.0, 2.0}, 1.2, 2.1));
  const auto nodes = gauss_hermite_nodes(w, 6);
  REQUIRE(nodes.size() == 36);
  Eigen::Vector2d m = Eigen::Vector2d::Zero();
  Eigen::Matrix2d c = Eigen::Matrix2d::Zero();
  for (const auto& n : nodes) m += n.weight * n.x;
  for (const auto& n : nodes) c += n.weight * (n.x - m) * (n.x - m).transpose();
  CHECK((m - w.mean).norm() < 1e-12);
  CHECK((c - w.cov).norm() < 1e-12);
}

TEST_CASE("field mapping: the Wigner mean gives back the reference field") {
  const SqueezedState s = SqueezedState::make(std::polar(100.0, 0.3), 1.0, 0.6);
  const FieldRealization ref = FieldRealization::centred(0.0534, 0.0304, 0.2);
  const FieldRealization f = realize_field(wigner_of_state(s).mean, s, ref, true);
  CHECK(f.e0 == ref.e0);
  CHECK(f.cep == ref.cep);
  CHECK(f.window.start == ref.window.start);

  Eigen::Vector2d doubled = 2.0 * wigner_of_state(s).mean;
  CHECK(realize_field(doubled, s, ref, true).e0 == Approx(2.0 * ref.e0));
  CHECK_THROWS_AS(realize_field(doubled, SqueezedState::coherent({0, 0}), ref, true), DomainError);
}

TEST_CASE("Up fluctuations scale as 1/|alpha| for a coherent drive") {
  for (double amp : {10.0, 50.0, 100.0}) {
    const SqueezedState s = SqueezedState::coherent({amp, 0.0});
    const FieldRealization ref = FieldRealization::centred(0.0534, 0.0304);
    // Sampled oracle through the field mapping.
    const auto xs = sample_quadratures(wigner_of_state(s), 3, 100000);
    double m = 0.0, m2 = 0.0;
    for (const auto& x : xs) {
      const double up = realize_field(x, s, ref, true).up();
      m += up;
      m2 += up * up;
    }
    m /= xs.size();
    const double sd = std::sqrt(m2 / xs.size() - m * m);
    CHECK(sd / ref.up() == Approx(1.0 / amp).epsilon(0.02));
    CHECK(linear_up_spread(s, ref.up()) / ref.up() == Approx(1.0 / amp).epsilon(1e-12));
  }
  const double up = 0.77;
  CHECK(linear_up_spread(SqueezedState::phase_squeezed(100.0, 1.0), up) / up ==
        Approx(std::exp(1.0) / 100.0));
  CHECK(linear_up_spread(SqueezedState::amplitude_squeezed(100.0, 1.0), up) / up ==
        Approx(std::exp(-1.0) / 100.0));
}
