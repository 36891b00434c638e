#pragma once

// Laser parameters, atomic-unit conversion and the single-cycle field.
//
// The field inside its window is monochromatic,
//   A(t) = (E0/w) sin(w t + cep),   E(t) = -dA/dt = -E0 cos(w t + cep),
// and zero outside. The window spans one period and is centred on the field
// extremum at w t + cep = 0, so in phase units u = w t + cep it is always
// [-pi, pi]. The analytic (ungated) forms below are what the saddle-point
// equations continue into complex time.

#include <cmath>
#include <complex>
#include <numbers>

namespace qholo {

/// Intensity of a field of one atomic unit, W/cm^2.
inline constexpr double kAtomicUnitIntensity = 3.50945e16;
/// Photon energy in hartree times the wavelength in nm.
inline constexpr double kOmegaWavelengthNm = 45.5634;
inline constexpr double kHartreeEv = 27.211386245988;

struct LaserParams {
  double wavelength_nm = 1500.0;
  double peak_intensity = 1.0e14;  // W/cm^2
  double cep = 0.0;
  double ip = 0.5;  // hartree; hydrogen 1s

  void validate() const;
};

struct FieldConstants {
  double e0 = 0.0;
  double omega = 0.0;
  double up = 0.0;     // e0^2 / (4 omega^2)
  double p_2up = 0.0;  // momentum with p^2/2 = 2 up
  double quiver_amplitude = 0.0;  // e0 / omega^2
};

FieldConstants to_atomic_units(const LaserParams& params);
FieldConstants field_constants(double e0, double omega);

struct TimeWindow {
  double start = 0.0;
  double end = 0.0;

  double length() const { return end - start; }
  bool contains(double t) const { return t >= start && t <= end; }
};

struct FieldRealization {
  double e0 = 0.0;
  double omega = 1.0;
  double cep = 0.0;
  TimeWindow window;

  /// One-period window centred on the field extremum w t + cep = 0.
  static FieldRealization centred(double e0, double omega, double cep = 0.0);

  double period() const { return 2.0 * std::numbers::pi / omega; }
  double a0() const { return e0 / omega; }
  double up() const { return e0 * e0 / (4.0 * omega * omega); }
  template <typename Scalar>
  Scalar phase(const Scalar& t) const {
    return omega * t + cep;
  }
};

// Analytic continuation of the in-window field; valid for real or complex t.

template <typename Scalar>
Scalar vector_potential(const FieldRealization& f, const Scalar& t) {
  using std::sin;
  return f.a0() * sin(f.phase(t));
}

/// dA/dt = -E.
template <typename Scalar>
Scalar vector_potential_rate(const FieldRealization& f, const Scalar& t) {
  using std::cos;
  return f.e0 * cos(f.phase(t));
}

template <typename Scalar>
Scalar electric_field(const FieldRealization& f, const Scalar& t) {
  return -vector_potential_rate(f, t);
}

/// Antiderivative of A: -(E0/w^2) cos(w t + cep).
template <typename Scalar>
Scalar vector_potential_integral(const FieldRealization& f, const Scalar& t) {
  using std::cos;
  return -f.a0() / f.omega * cos(f.phase(t));
}

struct FieldSample {
  double e = 0.0;
  double a = 0.0;
};

/// Gated field and vector potential: both vanish outside the window.
FieldSample field_and_potential(double t, const FieldRealization& f);

}  // namespace qholo
