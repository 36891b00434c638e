#include <algorithm>
#include <cmath>
#include <numbers>
#include <thread>

#include <Eigen/LU>

#include "qholo/errors.hpp"
#include "qholo/sfa.hpp"

namespace qholo {
namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;
const Complex kI(0.0, 1.0);

// Phase-space distance used to follow a saddle from one node to the next.
double track_distance(const Eigen::Vector3cd& a, const Eigen::Vector3cd& b, double omega) {
  return omega * (std::abs(a(0) - b(0)) + std::abs(a(1) - b(1))) + std::abs(a(2) - b(2));
}

constexpr double kTrackTolerance = 0.25;

const SweepState::Tracked* nearest(const std::vector<SweepState::Tracked>& prev,
                                   const Eigen::Vector3cd& x, double omega) {
  const SweepState::Tracked* best = nullptr;
  double best_d = kTrackTolerance;
  for (const auto& t : prev) {
    const double d = track_distance(t.x, x, omega);
    if (d < best_d) {
      best_d = d;
      best = &t;
    }
  }
  return best;
}

// Picks the sign of c.root closest to the tracked branch and optionally holds
// the magnitude when it jumps. Returns true when the magnitude was held.
bool follow(SaddleContribution& c, const SweepState::Tracked* prev, double clamp_ratio) {
  if (!prev) return false;
  if ((c.root * std::conj(prev->root)).real() < 0.0) c.root = -c.root;
  if (clamp_ratio <= 0.0) return false;
  const double magnitude = std::abs(c.root * c.factor);
  if (magnitude > clamp_ratio * prev->magnitude && magnitude > 0.0) {
    c.root *= prev->magnitude / magnitude;
    return true;
  }
  return false;
}

bool finite(Complex z) { return std::isfinite(z.real()) && std::isfinite(z.imag()); }

}  // namespace

Complex dipole_form_factor(Complex v, double pperp, double ip) {
  const double denom = std::norm(v) + pperp * pperp + 2.0 * ip;
  return v / (denom * denom * denom);
}

SaddleContribution direct_contribution(const Momentum& p, Complex ts, const FieldRealization& f,
                                       double ip) {
  const Complex v = p.pz + vector_potential(f, ts);
  const Complex curvature = v * vector_potential_rate(f, ts);
  SaddleContribution c;
  c.root = std::sqrt(kTwoPi * kI / curvature);
  c.factor = dipole_form_factor(v, p.pperp, ip);
  c.phase = action(p, ts, f, ip);
  return c;
}

Eigen::Matrix3cd rescattering_hessian(const Momentum& p, const RescatteringSaddle& s,
                                      const FieldRealization& f) {
  const Complex a0 = vector_potential(f, s.t0);
  const Complex ar = vector_potential(f, s.tr);
  const Complex tau = s.tr - s.t0;
  Eigen::Matrix3cd h;
  h << (s.k + a0) * vector_potential_rate(f, s.t0), 0.0, s.k + a0,
      0.0, (p.pz - s.k) * vector_potential_rate(f, s.tr), -(s.k + ar),
      s.k + a0, -(s.k + ar), -tau;
  return h;
}

SaddleContribution rescattered_contribution(const Momentum& p, const RescatteringSaddle& s,
                                            const FieldRealization& f, double ip, double weight) {
  const Complex det = rescattering_hessian(p, s, f).determinant();
  const Complex tau = s.tr - s.t0;
  const Complex v0 = s.k + vector_potential(f, s.t0);
  SaddleContribution c;
  c.root = 1.0 / std::sqrt(det);
  // Saddle integral over (t0, tr, k) times the Gaussian integral over the
  // two transverse intermediate momenta.
  c.factor = std::pow(kTwoPi * kI, 1.5) * (kTwoPi / (kI * tau)) * dipole_form_factor(v0, 0.0, ip) *
             weight;
  c.phase = action(p, s.tr, f, ip) - action_longitudinal(s.k, s.tr, f, ip) +
            action_longitudinal(s.k, s.t0, f, ip);
  return c;
}

AmplitudeTerms transition_terms(const Momentum& p, const FieldRealization& f, double ip,
                                const SfaOptions& opts, SweepState* prev) {
  AmplitudeTerms out;
  SweepState next;

  const std::vector<Complex> direct = direct_saddles(p, f, ip);
  // The saddle with the most negative A E seeds the reference wave.
  int reference = -1;
  double lowest = INFINITY;
  for (std::size_t i = 0; i < direct.size(); ++i) {
    const double s = std::sin(2.0 * f.phase(direct[i].real()));
    if (s < lowest) {
      lowest = s;
      reference = static_cast<int>(i);
    }
  }
  for (std::size_t i = 0; i < direct.size(); ++i) {
    SaddleContribution c = direct_contribution(p, direct[i], f, ip);
    const Eigen::Vector3cd x(direct[i], 0.0, 0.0);
    if (prev) follow(c, nearest(prev->direct, x, f.omega), 0.0);
    next.direct.push_back({x, c.root, std::abs(c.root * c.factor)});
    const Complex m = c.amplitude();
    if (static_cast<int>(i) == reference) {
      out.reference += m;
    } else {
      out.signal += m;
    }
  }

  if (opts.rescattering && opts.rescattering_weight != 0.0) {
    RescatteringOptions ro;
    ro.forward = true;
    ro.backward = opts.backscattering;
    ro.max_iterations = opts.max_iterations;
    for (const RescatteringSaddle& s : rescattering_saddles(p, f, ip, ro)) {
      if (!s.forward && !opts.backscattering) continue;
      SaddleContribution c = rescattered_contribution(p, s, f, ip, opts.rescattering_weight);
      const Eigen::Vector3cd x = s.unknowns();
      if (prev && follow(c, nearest(prev->rescattered, x, f.omega), opts.clamp_ratio)) ++out.clamped;
      next.rescattered.push_back({x, c.root, std::abs(c.root * c.factor)});
      out.signal += c.amplitude();
    }
  }

  if (!finite(out.reference) || !finite(out.signal)) {
    out.reference = out.signal = 0.0;
    out.flagged = true;
    out.clamped = 0;
    // Keep the previous history so the sweep can continue past the node.
    return out;
  }
  if (prev) *prev = std::move(next);
  return out;
}

Complex transition_amplitude(const Momentum& p, const FieldRealization& f, double ip,
                             const SfaOptions& opts) {
  return transition_terms(p, f, ip, opts).total();
}

std::vector<AmplitudeTerms> sweep_row(const Eigen::VectorXd& pz, double pperp,
                                      const FieldRealization& f, double ip, const SfaOptions& opts) {
  const Eigen::Index n = pz.size();
  std::vector<AmplitudeTerms> out(static_cast<std::size_t>(n));
  if (n == 0) return out;
  Eigen::Index centre = 0;
  pz.cwiseAbs().minCoeff(&centre);
  SweepState state;
  out[centre] = transition_terms({pz(centre), pperp}, f, ip, opts, &state);
  const SweepState at_centre = state;
  for (Eigen::Index i = centre + 1; i < n; ++i) {
    out[i] = transition_terms({pz(i), pperp}, f, ip, opts, &state);
  }
  state = at_centre;
  for (Eigen::Index i = centre - 1; i >= 0; --i) {
    out[i] = transition_terms({pz(i), pperp}, f, ip, opts, &state);
  }
  return out;
}

MomentumDistribution single_shot_pmd(const MomentumGrid& grid, const FieldRealization& f, double ip,
                                     const PmdOptions& opts) {
  MomentumDistribution pmd = MomentumDistribution::zeros(grid);
  const Eigen::VectorXd pz = grid.pz_nodes();
  std::vector<int> flagged(grid.pperp_steps, 0);
  std::vector<int> clamped(grid.pperp_steps, 0);

  auto run_row = [&](int j) {
    const std::vector<AmplitudeTerms> row = sweep_row(pz, grid.pperp(j), f, ip, opts.sfa);
    for (int i = 0; i < grid.pz_steps; ++i) {
      pmd.values(i, j) = std::norm(row[i].total());
      flagged[j] += row[i].flagged ? 1 : 0;
      clamped[j] += row[i].clamped;
    }
  };
  const int workers = std::clamp(opts.threads, 1, grid.pperp_steps);
  if (workers == 1) {
    for (int j = 0; j < grid.pperp_steps; ++j) run_row(j);
  } else {
    std::vector<std::jthread> pool;
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&, w] {
        for (int j = w; j < grid.pperp_steps; j += workers) run_row(j);
      });
    }
  }

  int flagged_total = 0, clamped_total = 0;
  for (int j = 0; j < grid.pperp_steps; ++j) {
    flagged_total += flagged[j];
    clamped_total += clamped[j];
  }
  pmd.metadata["kind"] = "single_shot";
  pmd.metadata["flagged_nodes"] = flagged_total;
  pmd.metadata["clamped_saddles"] = clamped_total;
  pmd.metadata["field"] = {{"e0", f.e0}, {"omega", f.omega}, {"cep", f.cep}};
  pmd.metadata["ip"] = ip;
  return pmd;
}

}  // namespace qholo
