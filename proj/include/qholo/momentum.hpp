#pragma once

#include <cstddef>

#include <Eigen/Core>
#include <nlohmann/json.hpp>

namespace qholo {

/// Final photoelectron momentum: component along the polarization axis and
/// the transverse magnitude.
struct Momentum {
  double pz = 0.0;
  double pperp = 0.0;
};

/// Uniform node grid over (pz, pperp), endpoints included.
struct MomentumGrid {
  double pz_min = -2.2;
  double pz_max = 2.2;
  int pz_steps = 240;
  double pperp_min = 0.0;
  double pperp_max = 1.0;
  int pperp_steps = 120;

  void validate() const;

  double pz(int i) const { return pz_min + i * pz_spacing(); }
  double pperp(int j) const { return pperp_min + j * pperp_spacing(); }
  double pz_spacing() const { return (pz_max - pz_min) / (pz_steps - 1); }
  double pperp_spacing() const { return (pperp_max - pperp_min) / (pperp_steps - 1); }
  std::size_t size() const { return static_cast<std::size_t>(pz_steps) * pperp_steps; }

  Eigen::VectorXd pz_nodes() const;
  Eigen::VectorXd pperp_nodes() const;

  bool operator==(const MomentumGrid&) const = default;
};

/// Yield on a MomentumGrid. values(i, j) belongs to (pz(i), pperp(j)).
struct MomentumDistribution {
  MomentumGrid grid;
  Eigen::ArrayXXd values;
  nlohmann::json metadata = nlohmann::json::object();

  static MomentumDistribution zeros(const MomentumGrid& grid);

  /// Throws DomainError unless every value is finite and nonnegative.
  void check() const;
  double total() const { return values.sum(); }
};

nlohmann::json to_json(const MomentumGrid& grid);

}  // namespace qholo
