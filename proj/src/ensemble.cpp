#include "qholo/ensemble.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <exception>
#include <limits>
#include <mutex>
#include <thread>

#include "qholo/analysis.hpp"
#include "qholo/errors.hpp"
#include "qholo/io.hpp"

namespace qholo {
namespace {

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;

  void add(double x) {
    const double t = sum + x;
    if (std::abs(sum) >= std::abs(x)) {
      carry += (sum - t) + x;
    } else {
      carry += (x - t) + sum;
    }
    sum = t;
  }
  double value() const { return sum + carry; }
};

enum Channel { kYield, kYieldSquared, kReference, kSignal, kCrossRe, kCrossIm, kChannels };

struct BlockResult {
  std::vector<std::array<double, kChannels>> nodes;
  std::size_t dropped = 0;
  std::size_t clamped = 0;
};

struct Accumulated {
  Eigen::ArrayXXd yield, yield_squared, reference, signal;
  Eigen::ArrayXXcd cross;
  std::size_t dropped = 0;
  std::size_t clamped = 0;
};

std::size_t block_size(std::size_t samples) {
  // Depends on the sample count only, never on the worker count.
  constexpr std::size_t kMinBlock = 32;
  constexpr std::size_t kMaxBlocks = 16;
  return std::max(kMinBlock, (samples + kMaxBlocks - 1) / kMaxBlocks);
}

Accumulated accumulate(const Eigen::VectorXd& pz, const Eigen::VectorXd& pperp,
                       const std::vector<EnsembleSample>& samples, const SqueezedState& state,
                       const FieldRealization& ref_field, double ip, const EnsembleConfig& cfg,
                       const SfaOptions& sfa) {
  const std::size_t n = static_cast<std::size_t>(pz.size());
  const std::size_t rows = static_cast<std::size_t>(pperp.size());
  const std::size_t block = block_size(samples.size());
  const std::size_t blocks = (samples.size() + block - 1) / block;
  const std::size_t tasks = rows * blocks;
  std::vector<BlockResult> results(tasks);

  auto run_task = [&](std::size_t task) {
    const std::size_t row = task / blocks;
    const std::size_t b = task % blocks;
    const std::size_t first = b * block;
    const std::size_t last = std::min(samples.size(), first + block);
    std::vector<std::array<CompensatedSum, kChannels>> sums(n);
    BlockResult& out = results[task];
    for (std::size_t s = first; s < last; ++s) {
      const double w = samples[s].weight;
      const FieldRealization f = realize_field(samples[s].x, state, ref_field, cfg.phase_coupling);
      const std::vector<AmplitudeTerms> terms = sweep_row(pz, pperp(row), f, ip, sfa);
      for (std::size_t i = 0; i < n; ++i) {
        const AmplitudeTerms& t = terms[i];
        out.clamped += static_cast<std::size_t>(t.clamped);
        if (t.flagged) {
          ++out.dropped;
          continue;
        }
        const double y = std::norm(t.total());
        const Complex c = t.reference * std::conj(t.signal);
        sums[i][kYield].add(w * y);
        sums[i][kYieldSquared].add(w * y * y);
        sums[i][kReference].add(w * std::norm(t.reference));
        sums[i][kSignal].add(w * std::norm(t.signal));
        sums[i][kCrossRe].add(w * c.real());
        sums[i][kCrossIm].add(w * c.imag());
      }
    }
    out.nodes.resize(n);
    for (std::size_t i = 0; i < n; ++i) {
      for (int c = 0; c < kChannels; ++c) out.nodes[i][c] = sums[i][c].value();
    }
  };

  const std::size_t workers = std::clamp<std::size_t>(static_cast<std::size_t>(cfg.threads), 1, tasks);
  if (workers == 1) {
    for (std::size_t t = 0; t < tasks; ++t) run_task(t);
  } else {
    std::atomic<std::size_t> next{0};
    std::exception_ptr failure;
    std::mutex failure_mutex;
    {
      std::vector<std::jthread> pool;
      for (std::size_t w = 0; w < workers; ++w) {
        pool.emplace_back([&] {
          for (std::size_t t = next++; t < tasks; t = next++) {
            try {
              run_task(t);
            } catch (...) {
              std::lock_guard lock(failure_mutex);
              if (!failure) failure = std::current_exception();
              next = tasks;
            }
          }
        });
      }
    }
    if (failure) std::rethrow_exception(failure);
  }

  Accumulated acc;
  const Eigen::Index ni = pz.size(), nj = pperp.size();
  acc.yield.resize(ni, nj);
  acc.yield_squared.resize(ni, nj);
  acc.reference.resize(ni, nj);
  acc.signal.resize(ni, nj);
  acc.cross.resize(ni, nj);
  for (std::size_t row = 0; row < rows; ++row) {
    for (std::size_t i = 0; i < n; ++i) {
      std::array<CompensatedSum, kChannels> total{};
      for (std::size_t b = 0; b < blocks; ++b) {
        const auto& node = results[row * blocks + b].nodes[i];
        for (int c = 0; c < kChannels; ++c) total[c].add(node[c]);
      }
      const auto ii = static_cast<Eigen::Index>(i), jj = static_cast<Eigen::Index>(row);
      acc.yield(ii, jj) = total[kYield].value();
      acc.yield_squared(ii, jj) = total[kYieldSquared].value();
      acc.reference(ii, jj) = total[kReference].value();
      acc.signal(ii, jj) = total[kSignal].value();
      acc.cross(ii, jj) = Complex(total[kCrossRe].value(), total[kCrossIm].value());
    }
  }
  for (const BlockResult& r : results) {
    acc.dropped += r.dropped;
    acc.clamped += r.clamped;
  }
  return acc;
}

struct Prepared {
  std::vector<EnsembleSample> samples;
  FieldRealization field;
  std::size_t requested = 0;
};

Prepared prepare(const SqueezedState& state, const LaserParams& laser, const EnsembleConfig& cfg) {
  cfg.validate();
  laser.validate();
  Prepared p;
  p.samples = ensemble_samples(wigner_of_state(state), cfg);
  p.field = reference_field(laser);
  p.requested = cfg.method == EnsembleMethod::monte_carlo
                    ? static_cast<std::size_t>(cfg.samples)
                    : static_cast<std::size_t>(cfg.order) * static_cast<std::size_t>(cfg.order);
  return p;
}

EnsembleReport make_report(const Prepared& prep, const Accumulated& acc, std::size_t nodes,
                           const EnsembleConfig& cfg, double seconds) {
  EnsembleReport report;
  report.requested_samples = prep.requested;
  report.realized_samples = prep.samples.size();
  report.dropped_contributions = acc.dropped;
  report.total_contributions = nodes * prep.samples.size();
  report.clamped_saddles = acc.clamped;
  report.wall_time = seconds;
  const double n = static_cast<double>(prep.samples.size());
  report.error_available = cfg.method == EnsembleMethod::monte_carlo && prep.samples.size() > 1;
  if (report.error_available) {
    // Weights are 1/n, so the channels hold the sample moments.
    const Eigen::ArrayXXd var =
        ((acc.yield_squared - acc.yield.square()) * (n / (n - 1.0))).cwiseMax(0.0);
    report.standard_error = (var / n).sqrt();
  }
  if (report.dropped_fraction() > cfg.max_dropped_fraction) {
    throw NumericalError("ensemble dropped " + std::to_string(report.dropped_contributions) + " of " +
                         std::to_string(report.total_contributions) + " contributions");
  }
  return report;
}

double elapsed_since(std::chrono::steady_clock::time_point start) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
}

}  // namespace

const char* to_string(EnsembleMethod m) {
  return m == EnsembleMethod::monte_carlo ? "monte_carlo" : "gauss_hermite";
}

void EnsembleConfig::validate() const {
  if (method == EnsembleMethod::monte_carlo && samples < 1) {
    throw DomainError("Monte Carlo needs at least one sample");
  }
  if (method == EnsembleMethod::gauss_hermite && (order < 1 || order > 64)) {
    throw DomainError("Gauss-Hermite order must be in [1, 64]");
  }
  if (!(covariance_scale >= 0.0) || !std::isfinite(covariance_scale)) {
    throw DomainError("covariance scale must be finite and >= 0");
  }
  if (threads < 1) throw DomainError("thread count must be >= 1");
  if (!(max_dropped_fraction >= 0.0 && max_dropped_fraction <= 1.0)) {
    throw DomainError("dropped fraction limit must be in [0, 1]");
  }
}

std::vector<EnsembleSample> ensemble_samples(const Wigner& w, const EnsembleConfig& cfg) {
  cfg.validate();
  Wigner scaled = w;
  scaled.cov *= cfg.covariance_scale;
  if (scaled.cov.isZero(0.0)) return {{scaled.mean, 1.0}};
  std::vector<EnsembleSample> out;
  if (cfg.method == EnsembleMethod::gauss_hermite) {
    for (const QuadratureNode& q : gauss_hermite_nodes(scaled, cfg.order)) out.push_back({q.x, q.weight});
  } else {
    const double weight = 1.0 / cfg.samples;
    for (const Eigen::Vector2d& x : sample_quadratures(scaled, cfg.seed, cfg.samples)) {
      out.push_back({x, weight});
    }
  }
  return out;
}

FieldRealization reference_field(const LaserParams& laser) {
  const FieldConstants c = to_atomic_units(laser);
  return FieldRealization::centred(c.e0, c.omega, laser.cep);
}

EnsembleResult ensemble_pmd(const SqueezedState& state, const LaserParams& laser,
                            const MomentumGrid& grid, const EnsembleConfig& cfg,
                            const SfaOptions& sfa) {
  const auto start = std::chrono::steady_clock::now();
  grid.validate();
  const Prepared prep = prepare(state, laser, cfg);
  const Accumulated acc =
      accumulate(grid.pz_nodes(), grid.pperp_nodes(), prep.samples, state, prep.field, laser.ip, cfg, sfa);

  EnsembleResult res;
  res.report = make_report(prep, acc, grid.size(), cfg, elapsed_since(start));
  res.pmd = MomentumDistribution::zeros(grid);
  res.pmd.values = acc.yield.cwiseMax(0.0);
  res.coherence = {acc.reference, acc.signal, acc.cross};
  res.pmd.metadata = {{"kind", "ensemble"},
                      {"state", to_json(state)},
                      {"laser", to_json(laser)},
                      {"ensemble", to_json(cfg)},
                      {"sfa", to_json(sfa)},
                      {"report", to_json(res.report)}};
  return res;
}

LineEnsemble ensemble_line(const SqueezedState& state, const LaserParams& laser,
                           const Eigen::VectorXd& pz, double pperp, const EnsembleConfig& cfg,
                           const SfaOptions& sfa) {
  const auto start = std::chrono::steady_clock::now();
  if (pz.size() == 0) throw DomainError("line ensemble needs at least one node");
  if (!(pperp >= 0.0)) throw DomainError("transverse momentum must be >= 0");
  const Prepared prep = prepare(state, laser, cfg);
  const Accumulated acc = accumulate(pz, Eigen::VectorXd::Constant(1, pperp), prep.samples, state,
                                     prep.field, laser.ip, cfg, sfa);
  LineEnsemble line;
  line.pz = pz;
  line.pperp = pperp;
  line.values = acc.yield.col(0).cwiseMax(0.0).matrix();
  line.coherence = {acc.reference, acc.signal, acc.cross};
  line.report = make_report(prep, acc, static_cast<std::size_t>(pz.size()), cfg, elapsed_since(start));
  return line;
}

std::vector<ConvergenceRow> convergence_scan(const SqueezedState& state, const LaserParams& laser,
                                             const MomentumGrid& grid, const EnsembleConfig& cfg,
                                             const std::vector<int>& schedule,
                                             const SfaOptions& sfa, double plateau_min,
                                             double plateau_max) {
  if (schedule.empty()) throw DomainError("convergence schedule is empty");
  if (!std::is_sorted(schedule.begin(), schedule.end()) ||
      std::adjacent_find(schedule.begin(), schedule.end()) != schedule.end()) {
    throw DomainError("convergence schedule must be strictly increasing");
  }
  grid.validate();
  Eigen::Index row = 0;
  grid.pperp_nodes().cwiseAbs().minCoeff(&row);

  std::vector<ConvergenceRow> out;
  Eigen::ArrayXd previous;
  for (int count : schedule) {
    EnsembleConfig run = cfg;
    if (cfg.method == EnsembleMethod::monte_carlo) {
      run.samples = count;
    } else {
      run.order = count;
    }
    const EnsembleResult res = ensemble_pmd(state, laser, grid, run, sfa);
    ConvergenceRow r;
    r.count = count;
    r.max_standard_error = res.report.error_available ? res.report.standard_error.maxCoeff()
                                                      : std::numeric_limits<double>::quiet_NaN();
    const Eigen::ArrayXd v = trajectory_visibility(res.coherence.reference.col(row),
                                                   res.coherence.signal.col(row),
                                                   res.coherence.cross.col(row));
    if (previous.size() == 0) {
      r.visibility_drift = std::numeric_limits<double>::quiet_NaN();
    } else {
      double drift = 0.0;
      for (int i = 0; i < grid.pz_steps; ++i) {
        const double a = std::abs(grid.pz(i));
        if (a < plateau_min || a > plateau_max) continue;
        drift = std::max(drift, std::abs(v(i) - previous(i)));
      }
      r.visibility_drift = drift;
    }
    previous = v;
    out.push_back(r);
  }
  return out;
}

}  // namespace qholo
