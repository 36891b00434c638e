#include "qholo/gaussian_optics.hpp"

#include <cmath>
#include <numbers>

#include <Eigen/Eigenvalues>

#include "qholo/errors.hpp"

namespace qholo {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

// SplitMix64 finalizer.
std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Uniform on (0, 1), never exactly 0 or 1.
double counter_uniform(std::uint64_t seed, std::uint64_t index, std::uint64_t stream) {
  const std::uint64_t bits = mix64(mix64(seed) ^ mix64(2 * index + stream));
  return (static_cast<double>(bits >> 11) + 0.5) * 0x1.0p-53;
}

// Box-Muller on two counter-addressed uniforms.
Eigen::Vector2d standard_normal_pair(std::uint64_t seed, std::uint64_t index) {
  const double u1 = counter_uniform(seed, index, 0);
  const double u2 = counter_uniform(seed, index, 1);
  const double radius = std::sqrt(-2.0 * std::log(u1));
  return {radius * std::cos(kTwoPi * u2), radius * std::sin(kTwoPi * u2)};
}

}  // namespace

SqueezedState SqueezedState::make(std::complex<double> alpha, double r, double theta) {
  if (!(r >= 0.0) || !std::isfinite(r)) throw DomainError("squeezing magnitude must be >= 0");
  if (!std::isfinite(theta) || !std::isfinite(alpha.real()) || !std::isfinite(alpha.imag())) {
    throw DomainError("squeezed state parameters must be finite");
  }
  double folded = std::fmod(theta, kTwoPi);
  if (folded < 0.0) folded += kTwoPi;
  if (folded >= kTwoPi) folded = 0.0;
  return {alpha, r, folded};
}

Wigner wigner_of_state(const SqueezedState& s) {
  Wigner w;
  w.mean << std::sqrt(2.0) * s.alpha.real(), std::sqrt(2.0) * s.alpha.imag();
  const double c = std::cos(s.theta / 2.0);
  const double sn = std::sin(s.theta / 2.0);
  Eigen::Matrix2d rot;
  rot << c, -sn, sn, c;
  const Eigen::Vector2d variances(std::exp(-2.0 * s.r) / 2.0, std::exp(2.0 * s.r) / 2.0);
  w.cov = rot * variances.asDiagonal() * rot.transpose();
  // Exact symmetry, rotation round-off would otherwise leave ~1e-17 skew.
  const double off = 0.5 * (w.cov(0, 1) + w.cov(1, 0));
  w.cov(0, 1) = off;
  w.cov(1, 0) = off;
  return w;
}

PhotonStatistics photon_statistics(const SqueezedState& s) {
  const double ch = std::cosh(s.r);
  const double sh = std::sinh(s.r);
  const std::complex<double> coherent_part =
      s.alpha * ch - std::conj(s.alpha) * std::polar(1.0, s.theta) * sh;
  return {std::norm(s.alpha) + sh * sh, std::norm(coherent_part) + 2.0 * sh * sh * ch * ch};
}

Eigen::Matrix2d covariance_sqrt(const Eigen::Matrix2d& cov) {
  Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d> eig(cov);
  const Eigen::Vector2d lambda = eig.eigenvalues().cwiseMax(0.0).cwiseSqrt();
  return eig.eigenvectors() * lambda.asDiagonal() * eig.eigenvectors().transpose();
}

Eigen::Vector2d sample_quadrature(const Wigner& w, std::uint64_t seed, std::uint64_t index) {
  return w.mean + covariance_sqrt(w.cov) * standard_normal_pair(seed, index);
}

std::vector<Eigen::Vector2d> sample_quadratures(const Wigner& w, std::uint64_t seed,
                                                std::size_t count) {
  if (count == 0) throw DomainError("sample count must be at least 1");
  const Eigen::Matrix2d root = covariance_sqrt(w.cov);
  std::vector<Eigen::Vector2d> out;
  out.reserve(count);
  for (std::size_t i = 0; i < count; ++i) {
    out.push_back(w.mean + root * standard_normal_pair(seed, i));
  }
  return out;
}

HermiteRule gauss_hermite_rule(int order) {
  if (order < 1 || order > 64) throw DomainError("Gauss-Hermite order must be in [1, 64]");
  // Jacobi matrix of the monic probabilists' Hermite recurrence.
  Eigen::MatrixXd jacobi = Eigen::MatrixXd::Zero(order, order);
  for (int k = 1; k < order; ++k) {
    jacobi(k, k - 1) = jacobi(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(jacobi);
  HermiteRule rule;
  rule.nodes = eig.eigenvalues();
  // Christoffel weights 1 / sum_k p_k(x)^2 over the orthonormal polynomials;
  // squared eigenvector entries lose relative accuracy in the far tails.
  rule.weights.resize(order);
  for (int i = 0; i < order; ++i) {
    const double x = rule.nodes(i);
    double prev = 0.0, cur = 1.0, sum = 1.0;
    for (int k = 1; k < order; ++k) {
      const double next = (x * cur - std::sqrt(static_cast<double>(k - 1)) * prev) / std::sqrt(static_cast<double>(k));
      prev = cur;
      cur = next;
      sum += cur * cur;
    }
    rule.weights(i) = 1.0 / sum;
  }
  // Mirror to exact symmetry and renormalise.
  for (int i = 0; i < order / 2; ++i) {
    const int j = order - 1 - i;
    const double x = 0.5 * (rule.nodes(j) - rule.nodes(i));
    const double wt = 0.5 * (rule.weights(i) + rule.weights(j));
    rule.nodes(i) = -x;
    rule.nodes(j) = x;
    rule.weights(i) = rule.weights(j) = wt;
  }
  if (order % 2 == 1) rule.nodes(order / 2) = 0.0;
  rule.weights /= rule.weights.sum();
  return rule;
}

std::vector<QuadratureNode> gauss_hermite_nodes(const Wigner& w, int order) {
  const HermiteRule rule = gauss_hermite_rule(order);
  const Eigen::Matrix2d root = covariance_sqrt(w.cov);
  std::vector<QuadratureNode> out;
  out.reserve(static_cast<std::size_t>(order) * order);
  for (int i = 0; i < order; ++i) {
    for (int j = 0; j < order; ++j) {
      const Eigen::Vector2d z(rule.nodes(i), rule.nodes(j));
      out.push_back({w.mean + root * z, rule.weights(i) * rule.weights(j)});
    }
  }
  return out;
}

double squeezing_to_db(double r) {
  if (!(r >= 0.0)) throw DomainError("squeezing magnitude must be >= 0");
  return 10.0 * std::log10(std::exp(2.0 * r));
}

FieldRealization realize_field(const Eigen::Vector2d& sample, const SqueezedState& reference,
                               const FieldRealization& reference_field, bool phase_coupling) {
  if (!(std::abs(reference.alpha) > 0.0)) {
    throw DomainError("field mapping needs a nonzero reference displacement");
  }
  // Compared in quadrature space so a sample at the Wigner mean maps back
  // onto the reference bit for bit.
  const Eigen::Vector2d mean = wigner_of_state(reference).mean;
  const double ratio = std::hypot(sample(0), sample(1)) / std::hypot(mean(0), mean(1));
  double cep = reference_field.cep;
  if (phase_coupling) cep += std::atan2(sample(1), sample(0)) - std::atan2(mean(1), mean(0));
  return FieldRealization::centred(reference_field.e0 * ratio, reference_field.omega, cep);
}

}  // namespace qholo
