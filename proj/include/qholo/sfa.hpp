#pragma once

// Strong-field approximation amplitudes from complex saddle points.
//
// Direct electrons: stationary points t_s of
//   S(p, t) = int^t [ (pz + A)^2/2 + pperp^2/2 + Ip ] dt',
// i.e. (pz + A(t_s))^2 + pperp^2 + 2 Ip = 0.
//
// Rescattered electrons: stationary points (t0, tr, k) of
//   Phi = S(p, tr) - S_k(tr) + S_k(t0),
// S_k being the action of the intermediate momentum (k, 0). The three
// equations are ionization (k + A(t0))^2 = -2 Ip, return
// int_{t0}^{tr} (k + A) = 0 and elastic scattering
// (pz + A(tr))^2 + pperp^2 = (k + A(tr))^2.
//
// Times are absolute; u = w t + cep is the optical phase.

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "qholo/field.hpp"
#include "qholo/momentum.hpp"

namespace qholo {

using Complex = std::complex<double>;

namespace detail {

/// Antiderivative of (pz + A)^2/2 + pperp^2/2 + ip for the monochromatic A.
template <typename Scalar>
Scalar action_antiderivative(const Scalar& pz, double pperp, const Scalar& t,
                             const FieldRealization& f, double ip) {
  using std::cos;
  using std::sin;
  const double a0 = f.a0();
  const Scalar u = f.phase(t);
  return (pz * pz / 2.0 + pperp * pperp / 2.0 + ip + a0 * a0 / 4.0) * t -
         pz * a0 * cos(u) / f.omega - a0 * a0 * sin(2.0 * u) / (8.0 * f.omega);
}

}  // namespace detail

/// Closed-form action, zero at the window start.
template <typename Scalar>
Scalar action(const Momentum& p, const Scalar& t, const FieldRealization& f, double ip) {
  const Scalar pz(p.pz);
  return detail::action_antiderivative(pz, p.pperp, t, f, ip) -
         detail::action_antiderivative(pz, p.pperp, Scalar(f.window.start), f, ip);
}

/// Action of a complex longitudinal momentum with no transverse part.
Complex action_longitudinal(Complex k, Complex t, const FieldRealization& f, double ip);

// ---------------------------------------------------------------------------
// Saddles

Complex direct_saddle_residual(const Momentum& p, Complex t, const FieldRealization& f, double ip);

/// Ionization times with Im t > 0 and Re t inside the window, sorted by Re t.
std::vector<Complex> direct_saddles(const Momentum& p, const FieldRealization& f, double ip);

/// True for the saddle whose electron is driven back through the core,
/// i.e. A E < 0 at Re t_s.
bool is_returning_direct(Complex t, const FieldRealization& f);

struct RescatteringSaddle {
  Complex t0;
  Complex tr;
  Complex k;
  bool forward = false;
  double residual = 0.0;

  Eigen::Vector3cd unknowns() const { return {t0, tr, k}; }
  double excursion() const { return (tr - t0).real(); }
};

/// Equations in the order ionization, return, scattering. The return
/// equation is divided by tr - t0, which removes the trivial root tr = t0.
Eigen::Vector3cd rescattering_equations(const Momentum& p, const Eigen::Vector3cd& x,
                                        const FieldRealization& f, double ip);
Eigen::Matrix3cd rescattering_jacobian(const Momentum& p, const Eigen::Vector3cd& x,
                                       const FieldRealization& f);

/// Max modulus of the three equations in their undivided form.
double rescattering_residual(const Momentum& p, const Eigen::Vector3cd& x,
                             const FieldRealization& f, double ip);

struct NewtonResult {
  Eigen::Vector3cd x;
  int iterations = 0;
  bool converged = false;
};

NewtonResult solve_rescattering(const Momentum& p, const Eigen::Vector3cd& seed,
                                const FieldRealization& f, double ip, int max_iterations = 200);

/// Real classical ionization/return phases that seed the Newton solver.
struct ReturnSeed {
  double birth_phase = 0.0;
  double return_phase = 0.0;
  bool forward = false;
};

/// First classical return phase for birth phase u0 with zero initial
/// velocity, searched in (u0, u0 + 2 pi]; nullopt when the electron does not
/// return within one period.
std::optional<double> classical_return_phase(double birth_phase);

/// Seeds for one final momentum, interpolated from a fixed table of 64 birth
/// phases spanning the window.
std::vector<ReturnSeed> classical_return_seeds(const Momentum& p, const FieldRealization& f,
                                               bool forward, bool backward);

struct RescatteringOptions {
  bool forward = true;
  bool backward = true;
  int max_iterations = 200;
};

struct RescatteringStats {
  int seeds = 0;
  int failed = 0;
};

/// Retained saddles: Im t0 > 0, Re t0 in the window, 0 < Re(tr - t0) <= T,
/// residual < 1e-9, duplicates within 1e-6 merged.
std::vector<RescatteringSaddle> rescattering_saddles(const Momentum& p, const FieldRealization& f,
                                                     double ip, const RescatteringOptions& opts = {},
                                                     RescatteringStats* stats = nullptr);

struct SaddleSet {
  std::vector<Complex> direct;
  std::vector<RescatteringSaddle> rescattered;
};

SaddleSet find_saddles(const Momentum& p, const FieldRealization& f, double ip);

inline constexpr double kSaddleResidualTolerance = 1e-9;

// ---------------------------------------------------------------------------
// Amplitudes

/// Hydrogen 1s dipole form factor along the polarization axis. |v|^2 stands
/// in for v^2 so the factor stays finite at the saddle where v^2 = -2 Ip - pperp^2.
Complex dipole_form_factor(Complex v, double pperp, double ip);

struct SfaOptions {
  double rescattering_weight = 1.0;
  bool rescattering = true;
  bool backscattering = false;
  /// Prefactor growth per grid cell above which a saddle is treated as
  /// coalescing and its magnitude is held.
  double clamp_ratio = 1.5;
  int max_iterations = 200;
};

/// Complex Gaussian-integral prefactor and phase of one saddle.
struct SaddleContribution {
  Complex root;    // square root factor with the tracked branch
  Complex factor;  // remaining prefactor (dipole, transverse integral, weight)
  Complex phase;   // action at the saddle
  Complex amplitude() const { return root * factor * std::exp(Complex(0.0, 1.0) * phase); }
};

SaddleContribution direct_contribution(const Momentum& p, Complex ts, const FieldRealization& f,
                                       double ip);
SaddleContribution rescattered_contribution(const Momentum& p, const RescatteringSaddle& s,
                                            const FieldRealization& f, double ip, double weight);

/// Stationary-phase matrix of Phi in (t0, tr, k).
Eigen::Matrix3cd rescattering_hessian(const Momentum& p, const RescatteringSaddle& s,
                                      const FieldRealization& f);

/// Amplitude split into the holographic reference (non-returning direct
/// electron) and signal (returning direct electron plus rescattering).
struct AmplitudeTerms {
  Complex reference{0.0, 0.0};
  Complex signal{0.0, 0.0};
  bool flagged = false;
  int clamped = 0;

  Complex total() const { return reference + signal; }
};

/// Branch and magnitude history of the previous node in a sweep.
struct SweepState {
  struct Tracked {
    Eigen::Vector3cd x;
    Complex root;
    double magnitude = 0.0;
  };
  std::vector<Tracked> direct;
  std::vector<Tracked> rescattered;
};

/// Amplitude at one node. When prev is given the square-root branches follow
/// it and it is updated for the next node.
AmplitudeTerms transition_terms(const Momentum& p, const FieldRealization& f, double ip,
                                const SfaOptions& opts, SweepState* prev = nullptr);

Complex transition_amplitude(const Momentum& p, const FieldRealization& f, double ip,
                             const SfaOptions& opts = {});

/// Terms along a row of fixed pperp. Nodes are swept outward from the one
/// nearest pz = 0 so every row is processed identically.
std::vector<AmplitudeTerms> sweep_row(const Eigen::VectorXd& pz, double pperp,
                                      const FieldRealization& f, double ip, const SfaOptions& opts);

struct PmdOptions {
  SfaOptions sfa;
  int threads = 1;
};

/// |M|^2 on the grid. Flagged nodes are zero; counts go to metadata.
MomentumDistribution single_shot_pmd(const MomentumGrid& grid, const FieldRealization& f, double ip,
                                     const PmdOptions& opts = {});

// ---------------------------------------------------------------------------
// Reduced two-trajectory model: dS = alpha0 Up tau_exc + C.

/// Re[S(t_signal) - S(t_reference)] for the two direct saddles.
std::optional<double> direct_phase_difference(const Momentum& p, const FieldRealization& f,
                                              double ip);

/// d(dS)/dUp by a central difference in e0 at fixed frequency.
std::optional<double> phase_sensitivity(const Momentum& p, const FieldRealization& f, double ip,
                                        double relative_step = 1e-4);

/// Excursion time Re(tr - t0) of the strongest forward rescattering saddle.
std::optional<double> excursion_time(const Momentum& p, const FieldRealization& f, double ip);

struct ReducedHologramModel {
  double alpha0 = 0.0;
  double c_offset = 0.0;
  double ip = 0.5;
  Eigen::VectorXd pz;        // calibration momenta
  Eigen::VectorXd tau_exc;   // excursion times there
  Eigen::VectorXd full;      // full phase differences there
  double max_relative_error = 0.0;

  double phase_difference(double up, double tau) const { return alpha0 * up * tau + c_offset; }
  /// dS/dUp of the model at fixed tau.
  double sensitivity(double tau) const { return alpha0 * tau; }
};

/// Least-squares fit over pz nodes at pperp = 0.
ReducedHologramModel calibrate_reduced_model(const FieldRealization& f, double ip,
                                             const Eigen::VectorXd& pz);

std::optional<double> reduced_phase_difference(const Momentum& p, const FieldRealization& f,
                                               const ReducedHologramModel& model);

}  // namespace qholo
