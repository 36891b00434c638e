#pragma once

// Incoherent average of single-shot yields over the Wigner distribution of
// the driving mode,
//   P(p) = sum_i w_i |M(p; alpha_i)|^2,
// by tensor Gauss-Hermite quadrature or Monte Carlo.
//
// Work is split into (row, sample block) units whose partial sums are
// combined in a fixed order, so results do not depend on the worker count.

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "qholo/field.hpp"
#include "qholo/gaussian_optics.hpp"
#include "qholo/momentum.hpp"
#include "qholo/sfa.hpp"

namespace qholo {

enum class EnsembleMethod { monte_carlo, gauss_hermite };

const char* to_string(EnsembleMethod m);

struct EnsembleConfig {
  EnsembleMethod method = EnsembleMethod::gauss_hermite;
  int samples = 10000;  // Monte Carlo
  int order = 20;       // Gauss-Hermite, per quadrature
  std::uint64_t seed = 1;
  bool phase_coupling = true;
  /// Multiplies the Wigner covariance; 0 collapses the ensemble onto the mean.
  double covariance_scale = 1.0;
  int threads = 1;
  double max_dropped_fraction = 0.01;

  void validate() const;
};

struct EnsembleSample {
  Eigen::Vector2d x;
  double weight = 0.0;
};

/// Quadrature nodes or Monte Carlo draws for the state. A zero covariance is a
/// point mass: one sample at the mean with weight exactly 1.
std::vector<EnsembleSample> ensemble_samples(const Wigner& w, const EnsembleConfig& cfg);

struct EnsembleReport {
  std::size_t requested_samples = 0;
  std::size_t realized_samples = 0;
  std::size_t dropped_contributions = 0;
  std::size_t total_contributions = 0;
  std::size_t clamped_saddles = 0;
  /// Standard error of the mean per node; only for Monte Carlo with > 1 sample.
  bool error_available = false;
  Eigen::ArrayXXd standard_error;
  double wall_time = 0.0;

  double dropped_fraction() const {
    return total_contributions ? double(dropped_contributions) / double(total_contributions) : 0.0;
  }
};

/// Ensemble moments of the two holographic arms: <|R|^2>, <|S|^2>, <R S*>.
struct CoherenceMaps {
  Eigen::ArrayXXd reference;
  Eigen::ArrayXXd signal;
  Eigen::ArrayXXcd cross;
};

struct EnsembleResult {
  MomentumDistribution pmd;
  EnsembleReport report;
  CoherenceMaps coherence;
};

/// Field realization shared by every sample's mapping.
FieldRealization reference_field(const LaserParams& laser);

EnsembleResult ensemble_pmd(const SqueezedState& state, const LaserParams& laser,
                            const MomentumGrid& grid, const EnsembleConfig& cfg,
                            const SfaOptions& sfa = {});

/// Ensemble along one row of fixed pperp at arbitrary pz nodes.
struct LineEnsemble {
  Eigen::VectorXd pz;
  double pperp = 0.0;
  Eigen::VectorXd values;
  CoherenceMaps coherence;  // single column
  EnsembleReport report;
};

LineEnsemble ensemble_line(const SqueezedState& state, const LaserParams& laser,
                           const Eigen::VectorXd& pz, double pperp, const EnsembleConfig& cfg,
                           const SfaOptions& sfa = {});

struct ConvergenceRow {
  int count = 0;  // samples (Monte Carlo) or order (Gauss-Hermite)
  double max_standard_error = 0.0;  // NaN when not available
  double visibility_drift = 0.0;    // NaN for the first row
};

/// Runs the ensemble at each entry of an increasing schedule. Drift is the
/// largest change of the trajectory-resolved visibility on the row nearest
/// pperp = 0, over nodes with plateau_min <= |pz| <= plateau_max.
std::vector<ConvergenceRow> convergence_scan(const SqueezedState& state, const LaserParams& laser,
                                             const MomentumGrid& grid, const EnsembleConfig& cfg,
                                             const std::vector<int>& schedule,
                                             const SfaOptions& sfa = {}, double plateau_min = 0.3,
                                             double plateau_max = 1.5);

}  // namespace qholo
