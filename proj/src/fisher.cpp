#include <cmath>

#include "qholo/analysis.hpp"
#include "qholo/errors.hpp"

namespace qholo {

double fisher_information(const Eigen::ArrayXd& minus, const Eigen::ArrayXd& plus, double delta,
                          double floor, int* excluded) {
  if (minus.size() != plus.size()) throw DomainError("Fisher inputs differ in size");
  if (!(delta > 0.0)) throw DomainError("finite-difference step must be positive");
  const double total_minus = minus.sum();
  const double total_plus = plus.sum();
  if (!(total_minus > 0.0) || !(total_plus > 0.0)) throw DomainError("Fisher inputs need positive yield");
  const Eigen::ArrayXd pm = minus / total_minus;
  const Eigen::ArrayXd pp = plus / total_plus;
  double sum = 0.0;
  int skipped = 0;
  for (Eigen::Index i = 0; i < pm.size(); ++i) {
    const double p = 0.5 * (pm(i) + pp(i));
    if (p < floor || p <= 0.0) {
      ++skipped;
      continue;
    }
    const double d = (pp(i) - pm(i)) / (2.0 * delta);
    sum += d * d / p;
  }
  if (excluded) *excluded = skipped;
  return sum;
}

FisherMap cfi_map(const MomentumDistribution& minus, const MomentumDistribution& plus, double delta,
                  double floor, const std::string& parameter) {
  if (!(minus.grid == plus.grid)) throw DomainError("Fisher inputs are on different grids");
  if (!(delta > 0.0)) throw DomainError("finite-difference step must be positive");
  minus.check();
  plus.check();
  const double total_minus = minus.total();
  const double total_plus = plus.total();
  if (!(total_minus > 0.0) || !(total_plus > 0.0)) throw DomainError("Fisher inputs need positive yield");

  FisherMap map;
  map.grid = minus.grid;
  map.parameter = parameter;
  map.delta = delta;
  const Eigen::ArrayXXd pm = minus.values / total_minus;
  const Eigen::ArrayXXd pp = plus.values / total_plus;
  map.probability = 0.5 * (pm + pp);
  map.density = Eigen::ArrayXXd::Zero(pm.rows(), pm.cols());
  for (Eigen::Index j = 0; j < pm.cols(); ++j) {
    for (Eigen::Index i = 0; i < pm.rows(); ++i) {
      const double p = map.probability(i, j);
      if (p < floor || p <= 0.0) {
        ++map.excluded_bins;
        continue;
      }
      const double d = (pp(i, j) - pm(i, j)) / (2.0 * delta);
      map.density(i, j) = d * d / p;
    }
  }
  map.integrated = map.density.sum();
  return map;
}

DarkPortFraction darkport_fraction(const FisherMap& map, double p_cutoff) {
  DarkPortFraction out;
  double fisher_tail = 0.0, yield_tail = 0.0;
  for (int i = 0; i < map.grid.pz_steps; ++i) {
    if (std::abs(map.grid.pz(i)) <= p_cutoff) continue;
    fisher_tail += map.density.row(i).sum();
    yield_tail += map.probability.row(i).sum();
  }
  const double fisher_total = map.density.sum();
  const double yield_total = map.probability.sum();
  out.fisher_fraction = fisher_total > 0.0 ? fisher_tail / fisher_total : 0.0;
  out.yield_fraction = yield_total > 0.0 ? yield_tail / yield_total : 0.0;
  return out;
}

double log_slope(const Eigen::VectorXd& x, const Eigen::VectorXd& y, double x_min) {
  if (x.size() != y.size()) throw DomainError("slope inputs differ in length");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  int n = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (x(i) < x_min) continue;
    if (!(y(i) > 0.0)) throw DomainError("log slope needs positive values");
    const double ly = std::log(y(i));
    sx += x(i);
    sy += ly;
    sxx += x(i) * x(i);
    sxy += x(i) * ly;
    ++n;
  }
  if (n < 2) throw DomainError("log slope needs two points above the threshold");
  const double denom = n * sxx - sx * sx;
  if (!(denom > 0.0)) throw DomainError("log slope abscissae are degenerate");
  return (n * sxy - sx * sy) / denom;
}

FisherScan cfi_scaling_scan(const std::vector<double>& r, const std::function<double(double)>& cfi_at,
                            double slope_from) {
  int large = 0;
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (i > 0 && !(r[i] > r[i - 1])) throw DomainError("r list must be increasing");
    if (r[i] >= 0.5) ++large;
  }
  if (large < 3) throw DomainError("r list needs at least three values >= 0.5");
  FisherScan scan;
  scan.slope_from = slope_from;
  Eigen::VectorXd x(static_cast<Eigen::Index>(r.size())), y(x.size());
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double f = cfi_at(r[i]);
    scan.rows.push_back({r[i], f, f > 0.0 ? std::log(f) : -INFINITY});
    x(static_cast<Eigen::Index>(i)) = r[i];
    y(static_cast<Eigen::Index>(i)) = f;
  }
  scan.slope = log_slope(x, y, slope_from);
  return scan;
}

}  // namespace qholo
