#include "qholo/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "qholo/errors.hpp"
#include "qholo/io.hpp"

namespace qholo {
namespace {

Eigen::VectorXd to_vector(const std::vector<double>& v) {
  return Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size()));
}

AnalyticPoint analytic_point(const std::string& label, double x, const SqueezedState& state,
                             const LaserParams& laser, double pz) {
  const FieldRealization f = reference_field(laser);
  AnalyticPoint a;
  a.state = label;
  a.x = x;
  a.kappa = phase_sensitivity({pz, 0.0}, f, laser.ip).value_or(std::numeric_limits<double>::quiet_NaN());
  a.sigma_up = linear_up_spread(state, f.up());
  a.visibility = std::isfinite(a.kappa) ? analytic_visibility(a.kappa, a.sigma_up)
                                        : std::numeric_limits<double>::quiet_NaN();
  return a;
}

const char* const kFamilies[] = {"PS", "AS", "CS"};

}  // namespace

SqueezedState family_state(const std::string& label, double amplitude, double r, double alpha_phase) {
  const std::complex<double> alpha = std::polar(amplitude, alpha_phase);
  const double along = 2.0 * alpha_phase;
  if (label == "CS") return SqueezedState::make(alpha, 0.0, 0.0);
  double theta;
  if (label == "AS") {
    theta = along;
  } else if (label == "PS") {
    theta = along + std::numbers::pi;
  } else {
    throw DomainError("unknown state family '" + label + "'");
  }
  if (r < 0.0) theta += std::numbers::pi;
  return SqueezedState::make(alpha, std::abs(r), theta);
}

double amplitude_at(const RunConfig& cfg, double wavelength_nm) {
  if (cfg.scan.photon_scaling == PhotonScaling::fixed) return cfg.state.amplitude;
  return cfg.state.amplitude * std::sqrt(wavelength_nm / cfg.laser.wavelength_nm);
}

double linear_up_spread(const SqueezedState& state, double up) {
  const Wigner w = wigner_of_state(state);
  const double norm = w.mean.norm();
  if (!(norm > 0.0)) throw DomainError("Up spread needs a nonzero displacement");
  const Eigen::Vector2d along = w.mean / norm;
  // Up scales with |X|^2, so dUp / Up = 2 d|X| / |X|.
  return 2.0 * up * std::sqrt(along.dot(w.cov * along)) / norm;
}

double visibility_at(const SqueezedState& state, const LaserParams& laser, double pz,
                     const EnsembleConfig& cfg, const SfaOptions& sfa, EnsembleReport* report) {
  const LineEnsemble line = ensemble_line(state, laser, Eigen::VectorXd::Constant(1, pz), 0.0, cfg, sfa);
  if (report) *report = line.report;
  return trajectory_visibility(line.coherence.reference.col(0), line.coherence.signal.col(0),
                               line.coherence.cross.col(0))(0);
}

SqueezeScan run_squeeze_scan(const RunConfig& cfg) {
  if (cfg.scan.r.empty()) throw ConfigError("scan.r is empty");
  SqueezeScan scan;
  const double pz = cfg.analysis.visibility_pz;
  for (const char* label : kFamilies) {
    std::vector<double> v;
    for (double r : cfg.scan.r) {
      const SqueezedState state = family_state(label, cfg.state.amplitude, r, cfg.state.alpha_phase);
      EnsembleReport report;
      v.push_back(visibility_at(state, cfg.laser, pz, cfg.ensemble, cfg.sfa, &report));
      scan.reports.push_back(report);
      scan.rows.push_back({label, r, pz, v.back()});
      scan.analytic.push_back(analytic_point(label, r, state, cfg.laser, pz));
    }
    if (std::string(label) != "CS" && v.size() >= 4) {
      scan.decay[label] = fit_squeeze_decay(to_vector(cfg.scan.r), to_vector(v));
      scan.single_exponential[label] = fit_single_exponential(to_vector(cfg.scan.r), to_vector(v));
    }
  }
  return scan;
}

WavelengthScan run_wavelength_scan(const RunConfig& cfg) {
  if (cfg.scan.wavelengths_um.empty()) throw ConfigError("scan.wavelengths_um is empty");
  WavelengthScan scan;
  const double pz = cfg.analysis.visibility_pz;
  for (const char* label : kFamilies) {
    std::vector<double> v;
    for (double lambda_um : cfg.scan.wavelengths_um) {
      LaserParams laser = cfg.laser;
      laser.wavelength_nm = 1000.0 * lambda_um;
      const SqueezedState state = family_state(label, amplitude_at(cfg, laser.wavelength_nm),
                                               cfg.scan.wavelength_r, cfg.state.alpha_phase);
      EnsembleReport report;
      v.push_back(visibility_at(state, laser, pz, cfg.ensemble, cfg.sfa, &report));
      scan.reports.push_back(report);
      scan.rows.push_back({label, lambda_um, pz, v.back()});
      scan.analytic.push_back(analytic_point(label, lambda_um, state, laser, pz));
    }
    if (v.size() >= 4) {
      for (int power : {2, 3, 4}) {
        scan.fits[label][power] = fit_power_wavelength(to_vector(cfg.scan.wavelengths_um), to_vector(v), power);
      }
    }
  }
  return scan;
}

FisherMap family_fisher_map(const RunConfig& cfg, const std::string& label, double r, double delta,
                            std::vector<EnsembleReport>* reports) {
  const auto run = [&](double rr) {
    EnsembleResult res = ensemble_pmd(family_state(label, cfg.state.amplitude, rr, cfg.state.alpha_phase),
                                      cfg.laser, cfg.grid, cfg.ensemble, cfg.sfa);
    if (reports) reports->push_back(res.report);
    return res.pmd;
  };
  const MomentumDistribution minus = run(r - delta);
  const MomentumDistribution plus = run(r + delta);
  return cfi_map(minus, plus, delta, cfg.analysis.fisher_floor, "r");
}

FisherRun run_fisher(const RunConfig& cfg) {
  FisherRun out;
  const double delta = cfg.analysis.fisher_delta;
  const FieldConstants constants = to_atomic_units(cfg.laser);
  out.p_2up = constants.p_2up;
  out.darkport_r = cfg.analysis.darkport_r;

  out.sql = family_fisher_map(cfg, "PS", 0.0, delta, &out.reports).integrated;
  if (!(out.sql > 0.0)) throw NumericalError("coherent-state Fisher baseline vanished");

  std::vector<double> r_list = cfg.scan.fisher_r;
  const double r_max = *std::max_element(r_list.begin(), r_list.end());
  bool darkport_done = false;
  const FisherScan scan = cfi_scaling_scan(r_list, [&](double r) {
    const FisherMap map = family_fisher_map(cfg, "PS", r, delta, &out.reports);
    FisherPoint p;
    p.r = r;
    p.cfi = map.integrated;
    p.cfi_over_sql = map.integrated / out.sql;
    p.excluded_bins = map.excluded_bins;
    p.cfi_half_step = std::numeric_limits<double>::quiet_NaN();
    p.richardson = std::numeric_limits<double>::quiet_NaN();
    if (cfg.analysis.richardson) {
      p.cfi_half_step = family_fisher_map(cfg, "PS", r, delta / 2.0, &out.reports).integrated;
      p.richardson = (4.0 * p.cfi_half_step - p.cfi) / 3.0;
    }
    out.points.push_back(p);
    if (r == r_max) out.largest = map;
    if (r == cfg.analysis.darkport_r) {
      out.darkport_map = map;
      darkport_done = true;
    }
    return map.integrated;
  });
  out.slope = scan.slope;
  out.slope_from = scan.slope_from;
  if (!darkport_done) {
    out.darkport_map = family_fisher_map(cfg, "PS", cfg.analysis.darkport_r, delta, &out.reports);
  }
  out.darkport = darkport_fraction(out.darkport_map, out.p_2up);
  return out;
}

nlohmann::json run_metadata(const RunConfig& cfg, const std::string& command) {
  const FieldConstants constants = to_atomic_units(cfg.laser);
  return {{"schema_version", kSchemaVersion},
          {"program", {{"name", "qholo"}, {"version", QHOLO_VERSION}}},
          {"command", command},
          {"config", to_json(cfg)},
          {"constants", to_json(constants)},
          {"noise_scale", {{"amplitude", cfg.state.amplitude},
                           {"mean_photon_number", cfg.state.amplitude * cfg.state.amplitude}}}};
}

}  // namespace qholo
