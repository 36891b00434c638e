#include <cmath>

#include <Eigen/QR>

#include "qholo/errors.hpp"
#include "qholo/sfa.hpp"

namespace qholo {

std::optional<double> direct_phase_difference(const Momentum& p, const FieldRealization& f,
                                              double ip) {
  const std::vector<Complex> ts = direct_saddles(p, f, ip);
  if (ts.size() != 2) return std::nullopt;
  const double s0 = std::sin(2.0 * f.phase(ts[0].real()));
  const double s1 = std::sin(2.0 * f.phase(ts[1].real()));
  const Complex reference = s0 <= s1 ? ts[0] : ts[1];
  const Complex signal = s0 <= s1 ? ts[1] : ts[0];
  return (action(p, signal, f, ip) - action(p, reference, f, ip)).real();
}

std::optional<double> phase_sensitivity(const Momentum& p, const FieldRealization& f, double ip,
                                        double relative_step) {
  if (!(relative_step > 0.0)) throw DomainError("relative step must be positive");
  const FieldRealization up = FieldRealization::centred(f.e0 * (1.0 + relative_step), f.omega, f.cep);
  const FieldRealization down =
      FieldRealization::centred(f.e0 * (1.0 - relative_step), f.omega, f.cep);
  const auto plus = direct_phase_difference(p, up, ip);
  const auto minus = direct_phase_difference(p, down, ip);
  if (!plus || !minus) return std::nullopt;
  return (*plus - *minus) / (up.up() - down.up());
}

std::optional<double> excursion_time(const Momentum& p, const FieldRealization& f, double ip) {
  RescatteringOptions ro;
  ro.backward = false;
  std::optional<double> tau;
  double strongest = -1.0;
  for (const RescatteringSaddle& s : rescattering_saddles(p, f, ip, ro)) {
    if (!s.forward) continue;
    const double magnitude = std::abs(rescattered_contribution(p, s, f, ip, 1.0).amplitude());
    if (magnitude > strongest) {
      strongest = magnitude;
      tau = s.excursion();
    }
  }
  return tau;
}

ReducedHologramModel calibrate_reduced_model(const FieldRealization& f, double ip,
                                             const Eigen::VectorXd& pz) {
  std::vector<double> nodes, taus, full;
  for (Eigen::Index i = 0; i < pz.size(); ++i) {
    const Momentum p{pz(i), 0.0};
    const auto tau = excursion_time(p, f, ip);
    const auto ds = direct_phase_difference(p, f, ip);
    if (!tau || !ds) continue;
    nodes.push_back(pz(i));
    taus.push_back(*tau);
    full.push_back(*ds);
  }
  const Eigen::Index n = static_cast<Eigen::Index>(nodes.size());
  if (n < 2) throw NumericalError("reduced model needs at least two calibration nodes");

  ReducedHologramModel model;
  model.ip = ip;
  model.pz = Eigen::Map<const Eigen::VectorXd>(nodes.data(), n);
  model.tau_exc = Eigen::Map<const Eigen::VectorXd>(taus.data(), n);
  model.full = Eigen::Map<const Eigen::VectorXd>(full.data(), n);

  Eigen::MatrixXd design(n, 2);
  design.col(0) = f.up() * model.tau_exc;
  design.col(1).setOnes();
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(model.full);
  model.alpha0 = coef(0);
  model.c_offset = coef(1);
  const Eigen::VectorXd fitted = design * coef;
  model.max_relative_error =
      ((fitted - model.full).array().abs() / model.full.array().abs()).maxCoeff();
  return model;
}

std::optional<double> reduced_phase_difference(const Momentum& p, const FieldRealization& f,
                                               const ReducedHologramModel& model) {
  const auto tau = excursion_time(p, f, model.ip);
  if (!tau) return std::nullopt;
  return model.phase_difference(f.up(), *tau);
}

}  // namespace qholo
