#include "qholo/analysis.hpp"

#include <algorithm>
#include <cmath>

#include <Eigen/QR>

#include "qholo/errors.hpp"

namespace qholo {
namespace {

struct Extremum {
  double pz = 0.0;
  double value = 0.0;
  bool maximum = false;
};

Eigen::VectorXd median3(const Eigen::VectorXd& y) {
  Eigen::VectorXd out = y;
  for (Eigen::Index i = 1; i + 1 < y.size(); ++i) {
    double a = y(i - 1), b = y(i), c = y(i + 1);
    out(i) = std::max(std::min(a, b), std::min(std::max(a, b), c));
  }
  return out;
}

std::vector<Extremum> find_extrema(const Eigen::VectorXd& pz, const Eigen::VectorXd& y) {
  std::vector<Extremum> out;
  const Eigen::Index n = y.size();
  for (Eigen::Index i = 1; i + 1 < n; ++i) {
    const double l = y(i - 1), c = y(i), r = y(i + 1);
    const bool is_max = c > l && c >= r;
    const bool is_min = c < l && c <= r;
    if (!is_max && !is_min) continue;
    Extremum e{pz(i), c, is_max};
    // Vertex of the parabola through the three nodes (uniform spacing assumed locally).
    const double curvature = l - 2.0 * c + r;
    if (curvature != 0.0) {
      const double offset = 0.5 * (l - r) / curvature;
      if (std::abs(offset) <= 1.0) {
        const double h = offset >= 0.0 ? pz(i + 1) - pz(i) : pz(i) - pz(i - 1);
        e.pz = pz(i) + offset * h;
        e.value = c - 0.25 * (l - r) * offset;
      }
    }
    if (!out.empty() && out.back().maximum == e.maximum) {
      // Keep the more extreme of two same-type neighbours.
      const bool replace = e.maximum ? e.value > out.back().value : e.value < out.back().value;
      if (replace) out.back() = e;
      continue;
    }
    out.push_back(e);
  }
  return out;
}

double contrast(double a, double b) {
  const double s = a + b;
  return s > 0.0 ? std::abs(a - b) / s : 0.0;
}

// Opposite envelope at x from its two neighbours; log-linear when positive.
double envelope_at(double x, const Extremum& left, const Extremum& right) {
  const double t = (x - left.pz) / (right.pz - left.pz);
  if (left.value > 0.0 && right.value > 0.0) {
    return std::exp((1.0 - t) * std::log(left.value) + t * std::log(right.value));
  }
  return (1.0 - t) * left.value + t * right.value;
}

ScalingFit fit_log_linear(const Eigen::VectorXd& x, const Eigen::VectorXd& v, FitModel model,
                          double power, const std::function<double(double)>& transform) {
  if (x.size() != v.size()) throw DomainError("fit needs matching abscissae and values");
  if (x.size() < 4) throw DomainError("fit needs at least four points");
  ScalingFit fit;
  fit.model = model;
  fit.power = power;
  std::vector<double> xs, ys;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    if (!(v(i) > 0.0) || !std::isfinite(v(i)) || !std::isfinite(x(i))) {
      ++fit.excluded;
      fit.diagnostics.push_back("excluded point " + std::to_string(i) + ": value must be positive");
      continue;
    }
    xs.push_back(transform(x(i)));
    ys.push_back(std::log(v(i)));
  }
  const Eigen::Index n = static_cast<Eigen::Index>(xs.size());
  if (n < 2) throw DomainError("fewer than two usable points after exclusion");
  Eigen::MatrixXd design(n, 2);
  design.col(0) = -Eigen::Map<const Eigen::VectorXd>(xs.data(), n);
  design.col(1).setOnes();
  const Eigen::Map<const Eigen::VectorXd> y(ys.data(), n);
  const Eigen::Vector2d coef = design.colPivHouseholderQr().solve(y);
  fit.rate = coef(0);
  fit.offset = coef(1);
  const double ss_res = (design * coef - y).squaredNorm();
  const double ss_tot = (y.array() - y.mean()).square().sum();
  if (ss_tot > 0.0) {
    fit.goodness = std::clamp(1.0 - ss_res / ss_tot, 0.0, 1.0);
  } else {
    fit.goodness = ss_res <= 1e-24 ? 1.0 : 0.0;
  }
  return fit;
}

}  // namespace

Spectrum lineout(const MomentumDistribution& pmd, double pperp) {
  const MomentumGrid& g = pmd.grid;
  if (!(pperp >= g.pperp_min) || !(pperp <= g.pperp_max)) {
    throw DomainError("lineout pperp outside the grid");
  }
  const double pos = (pperp - g.pperp_min) / g.pperp_spacing();
  int j = std::min(static_cast<int>(std::floor(pos)), g.pperp_steps - 2);
  double t = pos - j;
  // Snap onto a row when within round-off.
  if (std::abs(t) < 1e-12) t = 0.0;
  if (std::abs(1.0 - t) < 1e-12) {
    t = 0.0;
    j += 1;
    if (j == g.pperp_steps - 1) {
      j -= 1;
      t = 1.0;
    }
  }
  Spectrum s;
  s.pz = g.pz_nodes();
  if (t == 0.0) {
    s.values = pmd.values.col(j).matrix();
  } else if (t == 1.0) {
    s.values = pmd.values.col(j + 1).matrix();
  } else {
    s.values = ((1.0 - t) * pmd.values.col(j) + t * pmd.values.col(j + 1)).matrix();
  }
  return s;
}

VisibilityCurve fringe_visibility(const Eigen::VectorXd& pz, const Eigen::VectorXd& values,
                                  double window_width, bool median_filter) {
  if (pz.size() != values.size()) throw DomainError("spectrum abscissae and values differ in length");
  if (!(window_width > 0.0)) throw DomainError("window width must be positive");
  for (Eigen::Index i = 1; i < pz.size(); ++i) {
    if (!(pz(i) > pz(i - 1))) throw DomainError("spectrum abscissae must increase");
  }
  VisibilityCurve curve;
  curve.window_width = window_width;
  const std::vector<Extremum> ext = find_extrema(pz, median_filter ? median3(values) : values);
  if (ext.size() < 2) {
    curve.diagnostic = "fewer than one extremum pair";
    return curve;
  }

  std::vector<double> at, vis;
  if (ext.size() == 2) {
    at.push_back(0.5 * (ext[0].pz + ext[1].pz));
    vis.push_back(contrast(ext[0].value, ext[1].value));
  } else {
    for (std::size_t k = 1; k + 1 < ext.size(); ++k) {
      at.push_back(ext[k].pz);
      vis.push_back(contrast(ext[k].value, envelope_at(ext[k].pz, ext[k - 1], ext[k + 1])));
    }
  }

  const double lo = at.front(), hi = at.back();
  const int nodes = std::max(1, static_cast<int>(std::floor((hi - lo) / window_width + 1e-9)) + 1);
  curve.pz.resize(nodes);
  curve.v.resize(nodes);
  std::size_t seg = 0;
  for (int i = 0; i < nodes; ++i) {
    const double x = lo + i * window_width;
    while (seg + 2 < at.size() && x > at[seg + 1]) ++seg;
    double v = vis[seg];
    if (at.size() > 1 && at[seg + 1] > at[seg]) {
      const double t = std::clamp((x - at[seg]) / (at[seg + 1] - at[seg]), 0.0, 1.0);
      v = (1.0 - t) * vis[seg] + t * vis[seg + 1];
    }
    curve.pz(i) = x;
    curve.v(i) = std::clamp(v, 0.0, 1.0);
  }
  return curve;
}

Eigen::ArrayXd trajectory_visibility(const Eigen::ArrayXd& reference, const Eigen::ArrayXd& signal,
                                     const Eigen::ArrayXcd& cross) {
  if (reference.size() != signal.size() || reference.size() != cross.size()) {
    throw DomainError("coherence arrays differ in length");
  }
  Eigen::ArrayXd v(reference.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double norm = reference(i) + signal(i);
    v(i) = norm > 0.0 ? std::min(1.0, 2.0 * std::abs(cross(i)) / norm) : 0.0;
  }
  return v;
}

double analytic_visibility(double kappa, double sigma_up) {
  if (!(sigma_up >= 0.0)) throw DomainError("Up spread must be >= 0");
  return std::exp(-0.5 * kappa * kappa * sigma_up * sigma_up);
}

ScalingFit fit_squeeze_decay(const Eigen::VectorXd& r, const Eigen::VectorXd& v) {
  return fit_log_linear(r, v, FitModel::squeeze_decay, 0.0, [](double x) { return std::exp(2.0 * x); });
}

ScalingFit fit_single_exponential(const Eigen::VectorXd& r, const Eigen::VectorXd& v) {
  return fit_log_linear(r, v, FitModel::single_exponential, 0.0, [](double x) { return x; });
}

ScalingFit fit_power_wavelength(const Eigen::VectorXd& lambda, const Eigen::VectorXd& v, double power) {
  return fit_log_linear(lambda, v, FitModel::power_wavelength, power,
                        [power](double x) { return std::pow(x, power); });
}

ScalingFit fit_quartic_wavelength(const Eigen::VectorXd& lambda, const Eigen::VectorXd& v) {
  return fit_power_wavelength(lambda, v, 4.0);
}

const char* to_string(FitModel m) {
  switch (m) {
    case FitModel::squeeze_decay:
      return "squeeze_decay";
    case FitModel::single_exponential:
      return "single_exponential";
    case FitModel::power_wavelength:
      return "power_wavelength";
  }
  return "unknown";
}

}  // namespace qholo
