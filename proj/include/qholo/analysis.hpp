#pragma once

#include <functional>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "qholo/momentum.hpp"

namespace qholo {

struct Spectrum {
  Eigen::VectorXd pz;
  Eigen::VectorXd values;
};

/// Row at pperp, linearly interpolated between the two enclosing grid rows.
Spectrum lineout(const MomentumDistribution& pmd, double pperp);

struct VisibilityCurve {
  Eigen::VectorXd pz;
  Eigen::VectorXd v;
  double window_width = 0.0;
  std::string diagnostic;

  bool empty() const { return pz.size() == 0; }
};

/// Fringe contrast from the extrema of a sampled spectrum.
///
/// Extrema are located to sub-node accuracy by a three-point parabola. Each
/// interior extremum is compared with the opposite envelope at its position,
/// interpolated log-linearly between its two neighbours, giving
/// V = |P - P_opp| / (P + P_opp) there; with only two extrema the plain pair
/// contrast is placed at their midpoint. Values are then linearly regridded
/// with spacing window_width and clipped to [0, 1].
VisibilityCurve fringe_visibility(const Eigen::VectorXd& pz, const Eigen::VectorXd& values,
                                  double window_width, bool median_filter = false);

/// 2 |<R S*>| / (<|R|^2> + <|S|^2>) per node; zero where both arms vanish.
Eigen::ArrayXd trajectory_visibility(const Eigen::ArrayXd& reference, const Eigen::ArrayXd& signal,
                                     const Eigen::ArrayXcd& cross);

/// Contrast left after Gaussian fluctuations of Up with standard deviation
/// sigma_up act on a phase of sensitivity kappa: exp(-kappa^2 sigma_up^2 / 2).
double analytic_visibility(double kappa, double sigma_up);

enum class FitModel { squeeze_decay, single_exponential, power_wavelength };

/// ln V = -rate * g(x) + offset with g = e^{2r}, r, or lambda^power.
struct ScalingFit {
  FitModel model = FitModel::squeeze_decay;
  double rate = 0.0;
  double offset = 0.0;
  double power = 0.0;     // wavelength exponent for power_wavelength
  double goodness = 0.0;  // coefficient of determination on the log scale, clipped to [0, 1]
  int excluded = 0;
  std::vector<std::string> diagnostics;
};

ScalingFit fit_squeeze_decay(const Eigen::VectorXd& r, const Eigen::VectorXd& v);
ScalingFit fit_single_exponential(const Eigen::VectorXd& r, const Eigen::VectorXd& v);
ScalingFit fit_quartic_wavelength(const Eigen::VectorXd& lambda, const Eigen::VectorXd& v);
ScalingFit fit_power_wavelength(const Eigen::VectorXd& lambda, const Eigen::VectorXd& v, double power);

const char* to_string(FitModel m);

// ---------------------------------------------------------------------------
// Classical Fisher information

struct FisherMap {
  MomentumGrid grid;
  Eigen::ArrayXXd density;
  Eigen::ArrayXXd probability;  // normalized yield the density divides by
  double integrated = 0.0;
  std::string parameter = "r";
  double delta = 0.0;
  int excluded_bins = 0;
};

/// Central-difference Fisher information per bin,
///   I = ((P+ - P-) / (2 delta))^2 / P,  P = (P+ + P-)/2,
/// after normalizing both inputs to unit total. Bins with P < floor are
/// excluded and counted.
FisherMap cfi_map(const MomentumDistribution& minus, const MomentumDistribution& plus, double delta,
                  double floor = 1e-12, const std::string& parameter = "r");

/// Fisher information of a probability vector family by the same estimator.
double fisher_information(const Eigen::ArrayXd& minus, const Eigen::ArrayXd& plus, double delta,
                          double floor = 1e-12, int* excluded = nullptr);

struct DarkPortFraction {
  double fisher_fraction = 0.0;
  double yield_fraction = 0.0;
};

/// Shares of Fisher information and of probability at |pz| > p_cutoff.
DarkPortFraction darkport_fraction(const FisherMap& map, double p_cutoff);

struct FisherScanRow {
  double r = 0.0;
  double cfi = 0.0;
  double log_cfi = 0.0;
};

struct FisherScan {
  std::vector<FisherScanRow> rows;
  double slope = 0.0;  // d ln F / dr over r >= slope_from
  double slope_from = 0.75;
};

/// Least-squares slope of ln y against x over x >= x_min.
double log_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double x_min);

/// Evaluates cfi_at(r) over an increasing list with at least three entries
/// >= 0.5 and fits the log slope.
FisherScan cfi_scaling_scan(const std::vector<double>& r, const std::function<double(double)>& cfi_at,
                            double slope_from = 0.75);

}  // namespace qholo
