#pragma once

// End-to-end runs behind the command-line tool: ensembles for state families
// and the scans built on them.

#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "qholo/analysis.hpp"
#include "qholo/config.hpp"
#include "qholo/ensemble.hpp"

namespace qholo {

/// State of a labelled family at squeezing r. For AS and PS a negative r
/// means squeezing |r| along the conjugate axis, so central differences
/// through r = 0 stay inside one family.
SqueezedState family_state(const std::string& label, double amplitude, double r,
                           double alpha_phase = 0.0);

/// |alpha| used at another wavelength. With PhotonScaling::wavelength the
/// photon number grows in proportion to the wavelength at fixed intensity.
double amplitude_at(const RunConfig& cfg, double wavelength_nm);

/// Standard deviation of Up across the ensemble to first order in the
/// quadrature fluctuations.
double linear_up_spread(const SqueezedState& state, double up);

/// Trajectory-resolved visibility at (pz, 0).
double visibility_at(const SqueezedState& state, const LaserParams& laser, double pz,
                     const EnsembleConfig& cfg, const SfaOptions& sfa, EnsembleReport* report = nullptr);

struct VisibilityRow {
  std::string state;
  double x = 0.0;  // r or wavelength in um
  double pz = 0.0;
  double visibility = 0.0;
};

struct AnalyticPoint {
  std::string state;
  double x = 0.0;
  double kappa = 0.0;
  double sigma_up = 0.0;
  double visibility = 0.0;
};

struct SqueezeScan {
  std::vector<VisibilityRow> rows;
  std::map<std::string, ScalingFit> decay;           // per squeezed family
  std::map<std::string, ScalingFit> single_exponential;
  std::vector<AnalyticPoint> analytic;
  std::vector<EnsembleReport> reports;
};

SqueezeScan run_squeeze_scan(const RunConfig& cfg);

struct WavelengthScan {
  std::vector<VisibilityRow> rows;
  /// Per state, power-law fits keyed by exponent 2, 3, 4.
  std::map<std::string, std::map<int, ScalingFit>> fits;
  std::vector<AnalyticPoint> analytic;
  std::vector<EnsembleReport> reports;
};

WavelengthScan run_wavelength_scan(const RunConfig& cfg);

struct FisherPoint {
  double r = 0.0;
  double cfi = 0.0;
  double cfi_over_sql = 0.0;
  double cfi_half_step = 0.0;  // NaN unless the Richardson check ran
  double richardson = 0.0;
  int excluded_bins = 0;
};

struct FisherRun {
  std::vector<FisherPoint> points;
  double sql = 0.0;
  double slope = 0.0;
  double slope_from = 0.75;
  FisherMap largest;   // map at the largest r
  FisherMap darkport_map;
  double darkport_r = 0.0;
  DarkPortFraction darkport;
  double p_2up = 0.0;
  std::vector<EnsembleReport> reports;
};

/// Fisher information of the PS family in r on the configured grid.
FisherRun run_fisher(const RunConfig& cfg);

/// Fisher map for the given family at r by central differences of ensemble PMDs.
FisherMap family_fisher_map(const RunConfig& cfg, const std::string& label, double r, double delta,
                            std::vector<EnsembleReport>* reports = nullptr);

/// Common provenance block for meta.json.
nlohmann::json run_metadata(const RunConfig& cfg, const std::string& command);

}  // namespace qholo
