#pragma once

// Squeezed coherent states of the driving mode and their Gaussian Wigner
// functions.
//
// Quadratures are X1 = (a + a^dag)/sqrt2, X2 = (a - a^dag)/(i sqrt2), with
// vacuum variance 1/2. The squeezing operator is S(xi) = exp[(xi* a^2 -
// xi a^dag^2)/2], xi = r e^{i theta}; theta = 0 squeezes the quadrature along
// a real displacement (amplitude squeezing), theta = pi the orthogonal one
// (phase squeezing).

#include <complex>
#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "qholo/field.hpp"

namespace qholo {

struct SqueezedState {
  std::complex<double> alpha{0.0, 0.0};
  double r = 0.0;
  double theta = 0.0;  // folded to [0, 2 pi)

  /// Validates r >= 0 and folds theta.
  static SqueezedState make(std::complex<double> alpha, double r, double theta);
  static SqueezedState coherent(std::complex<double> alpha) { return make(alpha, 0.0, 0.0); }
  static SqueezedState amplitude_squeezed(double amplitude, double r) {
    return make({amplitude, 0.0}, r, 0.0);
  }
  static SqueezedState phase_squeezed(double amplitude, double r) {
    return make({amplitude, 0.0}, r, std::numbers::pi);
  }
};

template <typename Scalar>
struct WignerGaussian {
  Eigen::Matrix<Scalar, 2, 1> mean = Eigen::Matrix<Scalar, 2, 1>::Zero();
  Eigen::Matrix<Scalar, 2, 2> cov = Eigen::Matrix<Scalar, 2, 2>::Identity() / Scalar(2);

  Scalar purity_determinant() const { return cov.determinant(); }
};

using Wigner = WignerGaussian<double>;

Wigner wigner_of_state(const SqueezedState& s);

struct PhotonStatistics {
  double mean_n = 0.0;
  double var_n = 0.0;
};

PhotonStatistics photon_statistics(const SqueezedState& s);

/// Symmetric positive semidefinite square root of a covariance matrix.
Eigen::Matrix2d covariance_sqrt(const Eigen::Matrix2d& cov);

/// The index-th draw of the counter-based stream keyed by seed. Draws with
/// distinct indices are independent and can be produced in any order.
Eigen::Vector2d sample_quadrature(const Wigner& w, std::uint64_t seed, std::uint64_t index);
std::vector<Eigen::Vector2d> sample_quadratures(const Wigner& w, std::uint64_t seed,
                                                std::size_t count);

struct QuadratureNode {
  Eigen::Vector2d x;
  double weight = 0.0;
};

/// Probabilists' Gauss-Hermite rule (weight e^{-x^2/2}/sqrt(2 pi)) via
/// Golub-Welsch; weights sum to one.
struct HermiteRule {
  Eigen::VectorXd nodes;
  Eigen::VectorXd weights;
};
HermiteRule gauss_hermite_rule(int order);

/// Tensor-product rule for the bivariate normal w; order in [1, 64].
std::vector<QuadratureNode> gauss_hermite_nodes(const Wigner& w, int order);

double squeezing_to_db(double r);

/// Maps a phase-space sample onto a classical field. The sample is read as
/// alpha_s = (X1 + i X2)/sqrt2; the peak field scales with |alpha_s|/|alpha|,
/// and with phase coupling the CEP follows arg(alpha_s) - arg(alpha).
FieldRealization realize_field(const Eigen::Vector2d& sample, const SqueezedState& reference,
                               const FieldRealization& reference_field, bool phase_coupling);

}  // namespace qholo
