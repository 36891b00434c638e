#include "qholo/momentum.hpp"

#include <cmath>

#include "qholo/errors.hpp"

namespace qholo {

void MomentumGrid::validate() const {
  if (!std::isfinite(pz_min) || !std::isfinite(pz_max) || !std::isfinite(pperp_min) ||
      !std::isfinite(pperp_max)) {
    throw DomainError("momentum grid bounds must be finite");
  }
  if (!(pz_max > pz_min) || !(pperp_max > pperp_min)) {
    throw DomainError("momentum grid needs max > min on both axes");
  }
  if (pz_steps < 2 || pperp_steps < 2) throw DomainError("momentum grid needs >= 2 steps per axis");
  if (pperp_min < 0.0) throw DomainError("transverse momentum is a magnitude, pperp_min >= 0");
}

Eigen::VectorXd MomentumGrid::pz_nodes() const {
  Eigen::VectorXd out(pz_steps);
  for (int i = 0; i < pz_steps; ++i) out(i) = pz(i);
  return out;
}

Eigen::VectorXd MomentumGrid::pperp_nodes() const {
  Eigen::VectorXd out(pperp_steps);
  for (int j = 0; j < pperp_steps; ++j) out(j) = pperp(j);
  return out;
}

MomentumDistribution MomentumDistribution::zeros(const MomentumGrid& grid) {
  grid.validate();
  MomentumDistribution d;
  d.grid = grid;
  d.values = Eigen::ArrayXXd::Zero(grid.pz_steps, grid.pperp_steps);
  return d;
}

void MomentumDistribution::check() const {
  if (values.rows() != grid.pz_steps || values.cols() != grid.pperp_steps) {
    throw DomainError("distribution shape does not match its grid");
  }
  if (!values.allFinite() || (values < 0.0).any()) {
    throw DomainError("distribution values must be finite and nonnegative");
  }
}

nlohmann::json to_json(const MomentumGrid& grid) {
  return {{"pz_min", grid.pz_min},       {"pz_max", grid.pz_max},
          {"pz_steps", grid.pz_steps},   {"pperp_min", grid.pperp_min},
          {"pperp_max", grid.pperp_max}, {"pperp_steps", grid.pperp_steps}};
}

}  // namespace qholo
