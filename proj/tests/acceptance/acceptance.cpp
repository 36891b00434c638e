// Acceptance run: one PASS/FAIL line per criterion.
//
//   qholo_acceptance [--only N]... [--known-failure N]...
//
// Exit status is 0 when every failing criterion was listed with
// --known-failure, 1 otherwise. Failing lines are printed either way.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "qholo/analysis.hpp"
#include "qholo/config.hpp"
#include "qholo/ensemble.hpp"
#include "qholo/gaussian_optics.hpp"
#include "qholo/pipeline.hpp"
#include "qholo/sfa.hpp"
#include "support/oracles.hpp"

using namespace qholo;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Eigen::ArrayXd line_visibility(const LineEnsemble& line) {
  return trajectory_visibility(line.coherence.reference.col(0), line.coherence.signal.col(0),
                               line.coherence.cross.col(0));
}

// Nodes of the default grid inside the plateau.
Eigen::VectorXd plateau_nodes(const RunConfig& cfg) {
  std::vector<double> out;
  for (int i = 0; i < cfg.grid.pz_steps; ++i) {
    const double pz = cfg.grid.pz(i);
    if (pz >= cfg.analysis.plateau_min - 1e-12 && pz <= cfg.analysis.plateau_max + 1e-12) out.push_back(pz);
  }
  return Eigen::Map<Eigen::VectorXd>(out.data(), static_cast<Eigen::Index>(out.size()));
}

bool bit_identical(const Eigen::ArrayXXd& a, const Eigen::ArrayXXd& b) {
  return a.rows() == b.rows() && a.cols() == b.cols() &&
         std::memcmp(a.data(), b.data(), sizeof(double) * static_cast<std::size_t>(a.size())) == 0;
}

Outcome state_ordering() {
  const RunConfig cfg = parse_config("");
  const auto t0 = std::chrono::steady_clock::now();
  const Eigen::VectorXd pz = plateau_nodes(cfg);
  const auto vis = [&](const char* label) {
    return line_visibility(ensemble_line(family_state(label, cfg.state.amplitude, 1.5), cfg.laser, pz, 0.0,
                                         cfg.ensemble, cfg.sfa));
  };
  const Eigen::ArrayXd as = vis("AS"), cs = vis("CS"), ps = vis("PS");
  int ordered = 0;
  double ps_low = INFINITY;
  for (Eigen::Index i = 0; i < pz.size(); ++i) {
    if (as(i) >= cs(i) && cs(i) >= ps(i)) ++ordered;
    if (pz(i) < 1.0) ps_low = std::min(ps_low, ps(i));
  }
  const double share = double(ordered) / double(pz.size());
  const double elapsed = seconds_since(t0);
  return {share >= 0.9 && ps_low < 0.2 && elapsed < 600.0,
          fmt("ordered on %d/%d plateau nodes (%.1f%%), min V_PS below pz=1 is %.3f, %.1f s", ordered,
              int(pz.size()), 100.0 * share, ps_low, elapsed)};
}

Outcome cutoff_recovery() {
  const RunConfig cfg = parse_config("");
  const double p2 = to_atomic_units(cfg.laser).p_2up;
  Eigen::Index near = 0;
  (cfg.grid.pz_nodes().array() - p2).abs().minCoeff(&near);
  const double node = cfg.grid.pz(static_cast<int>(near));
  Eigen::VectorXd pz(2);
  pz << 0.4, node;
  const Eigen::ArrayXd v = line_visibility(
      ensemble_line(family_state("CS", cfg.state.amplitude, 0.0), cfg.laser, pz, 0.0, cfg.ensemble, cfg.sfa));
  return {v(1) > v(0), fmt("V_CS(%.4f) = %.4f vs V_CS(0.4) = %.4f, p_2up = %.4f", node, v(1), v(0), p2)};
}

Outcome double_exponential() {
  const RunConfig cfg = parse_config("");
  const SqueezeScan scan = run_squeeze_scan(cfg);
  const ScalingFit& d = scan.decay.at("PS");
  const ScalingFit& s = scan.single_exponential.at("PS");
  return {d.goodness >= 0.95 && d.goodness > s.goodness,
          fmt("PS decay fit R^2 = %.5f (eta = %.4f), single exponential R^2 = %.5f", d.goodness, d.rate,
              s.goodness)};
}

Outcome quartic_wavelength() {
  const RunConfig cfg = parse_config("");
  const WavelengthScan scan = run_wavelength_scan(cfg);
  const auto& ps = scan.fits.at("PS");
  const double g2 = ps.at(2).goodness, g3 = ps.at(3).goodness, g4 = ps.at(4).goodness;
  double as_ref = NAN, worst = 0.0;
  for (const VisibilityRow& row : scan.rows) {
    if (row.state != "AS") continue;
    if (std::isnan(as_ref)) as_ref = row.visibility;
    if (row.x <= 2.0 + 1e-12) worst = std::max(worst, std::abs(row.visibility - as_ref) / as_ref);
  }
  return {g4 >= 0.9 && g4 > g2 && g4 > g3 && worst <= 0.2,
          fmt("PS R^2 quartic %.4f, cubic %.4f, quadratic %.4f; AS max deviation from 0.8 um %.1f%%", g4, g3, g2,
              100.0 * worst)};
}

Outcome dephasing_law() {
  // Standard normal draws from the library sampler.
  Wigner w;
  w.cov = Eigen::Matrix2d::Identity();
  const std::size_t n = 1000000;
  const std::vector<Eigen::Vector2d> z = sample_quadratures(w, 20240601, n);
  bool ok = std::abs(analytic_visibility(1.0, 1.0) - 0.6065) < 5e-5;
  std::string detail = fmt("V(1) = %.5f;", analytic_visibility(1.0, 1.0));
  for (double ks : {0.2, 1.0, 2.0}) {
    double sc = 0.0, ss = 0.0, sc2 = 0.0;
    for (const auto& x : z) {
      const double c = std::cos(ks * x(0));
      sc += c;
      sc2 += c * c;
      ss += std::sin(ks * x(0));
    }
    const double mc = sc / n, ms = ss / n;
    const double se = std::sqrt((sc2 / n - mc * mc) / (n - 1.0));
    const double sampled = std::hypot(mc, ms);
    const double expected = analytic_visibility(ks, 1.0);
    const double dev = std::abs(sampled - expected) / se;
    ok = ok && dev <= 3.0;
    detail += fmt(" k*s=%.1f: %.5f vs %.5f (%.2f SE);", ks, sampled, expected, dev);
  }
  return {ok, detail};
}

Outcome photon_statistics_check() {
  double worst = 0.0;
  for (double amp : {0.0, 1.0, 3.0, 5.0}) {
    for (double r : {0.0, 0.5, 1.0, 1.5}) {
      for (double theta : {0.0, std::numbers::pi, 0.8}) {
        const auto alpha = std::polar(amp, 0.3);
        const oracle::FockMoments fock = oracle::displaced_squeezed_moments(alpha, r, theta, 360);
        const PhotonStatistics s = photon_statistics(SqueezedState::make(alpha, r, theta));
        worst = std::max(worst, std::abs(s.var_n - fock.var_n) / std::max(1.0, fock.var_n));
      }
    }
  }
  double lo = INFINITY, hi = 0.0;
  for (double r : {0.5, 1.0, 1.5}) {
    const double ratio = photon_statistics(SqueezedState::phase_squeezed(100.0, r)).var_n / (1e4 * std::exp(2 * r));
    lo = std::min(lo, ratio);
    hi = std::max(hi, ratio);
  }
  const double d1 = squeezing_to_db(0.5), d2 = squeezing_to_db(1.0), d3 = squeezing_to_db(1.5);
  const bool db = std::abs(d1 - 4.34) <= 0.1 && std::abs(d2 - 8.69) <= 0.1 && std::abs(d3 - 13.03) <= 0.1;
  return {worst <= 1e-6 && lo >= 0.99 && hi <= 1.01 && db,
          fmt("max rel. var_n error vs Fock %.2e; PS asymptote in [%.5f, %.5f]; %.2f / %.2f / %.2f dB", worst, lo,
              hi, d1, d2, d3)};
}

Outcome fisher_suite() {
  // Estimator on a binned Gaussian location family.
  double worst = 0.0;
  for (double s : {0.5, 1.0, 2.0}) {
    std::vector<double> edges;
    for (double x = -12.0 * s; x <= 12.0 * s + 1e-12; x += s / 40.0) edges.push_back(x);
    const double delta = 1e-3 * s;
    const double fi = fisher_information(oracle::binned_gaussian(edges, -delta, s),
                                         oracle::binned_gaussian(edges, delta, s), delta, 1e-300);
    worst = std::max(worst, std::abs(fi * s * s - 1.0));
  }
  // PS family on a reduced grid: 89 x 11 nodes over the default ranges.
  RunConfig cfg = parse_config("");
  cfg.grid.pz_steps = 89;
  cfg.grid.pperp_steps = 11;
  cfg.analysis.richardson = false;
  const FisherRun run = run_fisher(cfg);
  bool above_sql = true;
  std::string ratios;
  for (const FisherPoint& p : run.points) {
    if (p.r > 0.5 && !(p.cfi_over_sql > 1.0)) above_sql = false;
    ratios += fmt(" %.2f", p.cfi_over_sql);
  }
  const bool slope_ok = std::abs(run.slope - 4.0) <= 1.0;
  const bool dark = run.darkport.fisher_fraction > run.darkport.yield_fraction;
  return {worst <= 0.02 && above_sql && slope_ok && dark,
          fmt("Gaussian 1/s^2 error %.2e; F/F_SQL at r=0.5..1.5:%s; ln-slope %.2f; dark port at r=1: "
              "Fisher %.2e vs yield %.2e",
              worst, ratios.c_str(), run.slope, run.darkport.fisher_fraction, run.darkport.yield_fraction)};
}

Outcome numerical_hygiene() {
  const RunConfig cfg = parse_config("");
  const FieldRealization f = reference_field(cfg.laser);
  double worst_direct = 0.0, worst_resc = 0.0;
  RescatteringOptions all;
  for (int i = 0; i < cfg.grid.pz_steps; i += 3) {
    for (int j = 0; j < cfg.grid.pperp_steps; j += 6) {
      const Momentum p{cfg.grid.pz(i), cfg.grid.pperp(j)};
      for (Complex t : direct_saddles(p, f, cfg.laser.ip)) {
        worst_direct = std::max(worst_direct, std::abs(direct_saddle_residual(p, t, f, cfg.laser.ip)));
      }
      for (const RescatteringSaddle& s : rescattering_saddles(p, f, cfg.laser.ip, all)) {
        worst_resc = std::max(worst_resc, rescattering_residual(p, s.unknowns(), f, cfg.laser.ip));
      }
    }
  }
  const bool residuals = worst_direct < 1e-9 && worst_resc < 1e-9;

  MomentumGrid small = cfg.grid;
  small.pz_steps = 48;
  small.pperp_steps = 8;
  const SqueezedState ps = family_state("PS", cfg.state.amplitude, 1.5);
  EnsembleConfig e = cfg.ensemble;
  std::vector<Eigen::ArrayXXd> runs;
  for (int threads : {1, 4, 8}) {
    e.threads = threads;
    runs.push_back(ensemble_pmd(ps, cfg.laser, small, e, cfg.sfa).pmd.values);
  }
  const bool threads_ok = bit_identical(runs[0], runs[1]) && bit_identical(runs[0], runs[2]);

  // PS state with r = 1 on the plateau nodes.
  const SqueezedState ps1 = family_state("PS", cfg.state.amplitude, 1.0);
  const Eigen::VectorXd pz = plateau_nodes(cfg);
  EnsembleConfig gh = cfg.ensemble;
  EnsembleConfig mc = cfg.ensemble;
  mc.method = EnsembleMethod::monte_carlo;
  mc.samples = 10000;
  const LineEnsemble a = ensemble_line(ps1, cfg.laser, pz, 0.0, gh, cfg.sfa);
  const LineEnsemble b = ensemble_line(ps1, cfg.laser, pz, 0.0, mc, cfg.sfa);
  int within = 0;
  const int total = static_cast<int>(pz.size());
  for (Eigen::Index i = 0; i < pz.size(); ++i) {
    if (std::abs(a.values(i) - b.values(i)) <= 3.0 * b.report.standard_error(i, 0)) ++within;
  }
  const double share = double(within) / total;

  EnsembleConfig delta = cfg.ensemble;
  delta.covariance_scale = 0.0;
  const bool delta_ok = bit_identical(ensemble_pmd(ps, cfg.laser, small, delta, cfg.sfa).pmd.values,
                                      single_shot_pmd(small, f, cfg.laser.ip, {cfg.sfa, 1}).values);

  return {residuals && threads_ok && share >= 0.99 && delta_ok,
          fmt("max residual direct %.1e, rescattered %.1e; threads 1/4/8 %s; GH vs MC within 3 SE on %d/%d "
              "(%.2f%%); delta limit %s",
              worst_direct, worst_resc, threads_ok ? "identical" : "DIFFER", within, total, 100.0 * share,
              delta_ok ? "exact" : "NOT exact")};
}

struct Criterion {
  int id;
  const char* name;
  std::function<Outcome()> run;
};

}  // namespace

int main(int argc, char** argv) {
  std::set<int> only, known;
  for (int i = 1; i + 1 < argc; i += 2) {
    const std::string flag = argv[i];
    const int n = std::atoi(argv[i + 1]);
    if (flag == "--only") {
      only.insert(n);
    } else if (flag == "--known-failure") {
      known.insert(n);
    } else {
      std::fprintf(stderr, "unknown argument %s\n", argv[i]);
      return 2;
    }
  }
  const std::vector<Criterion> criteria = {
      {1, "state ordering at 1.5 um, r = 1.5", state_ordering},
      {2, "CS visibility recovers toward the 2Up cutoff", cutoff_recovery},
      {3, "double-exponential decay of PS visibility", double_exponential},
      {4, "quartic wavelength law", quartic_wavelength},
      {5, "Gaussian dephasing law", dephasing_law},
      {6, "photon statistics", photon_statistics_check},
      {7, "classical Fisher information", fisher_suite},
      {8, "numerical hygiene", numerical_hygiene},
  };
  int unexpected = 0;
  for (const Criterion& c : criteria) {
    if (!only.empty() && !only.count(c.id)) continue;
    const auto t0 = std::chrono::steady_clock::now();
    Outcome o;
    try {
      o = c.run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    std::printf("criterion %d %s: %s (%.1f s) %s\n", c.id, o.pass ? "PASS" : "FAIL", c.name, seconds_since(t0),
                o.detail.c_str());
    std::fflush(stdout);
    if (!o.pass && !known.count(c.id)) ++unexpected;
  }
  return unexpected == 0 ? 0 : 1;
}
