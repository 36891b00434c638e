#include "qholo/field.hpp"

#include <string>

#include "qholo/errors.hpp"

namespace qholo {

void LaserParams::validate() const {
  if (!(wavelength_nm > 0.0)) throw DomainError("wavelength must be positive");
  if (!(peak_intensity > 0.0)) throw DomainError("peak intensity must be positive");
  if (!(ip > 0.0)) throw DomainError("ionization potential must be positive");
  if (!std::isfinite(cep)) throw DomainError("carrier-envelope phase must be finite");
}

FieldConstants field_constants(double e0, double omega) {
  if (!(e0 >= 0.0) || !(omega > 0.0)) {
    throw DomainError("field constants need e0 >= 0 and omega > 0");
  }
  FieldConstants c;
  c.e0 = e0;
  c.omega = omega;
  c.up = e0 * e0 / (4.0 * omega * omega);
  c.p_2up = 2.0 * std::sqrt(c.up);
  c.quiver_amplitude = e0 / (omega * omega);
  return c;
}

FieldConstants to_atomic_units(const LaserParams& params) {
  params.validate();
  return field_constants(std::sqrt(params.peak_intensity / kAtomicUnitIntensity),
                         kOmegaWavelengthNm / params.wavelength_nm);
}

FieldRealization FieldRealization::centred(double e0, double omega, double cep) {
  if (!(e0 >= 0.0) || !(omega > 0.0) || !std::isfinite(cep)) {
    throw DomainError("field realization needs e0 >= 0, omega > 0, finite cep");
  }
  FieldRealization f;
  f.e0 = e0;
  f.omega = omega;
  f.cep = cep;
  const double centre = -cep / omega;
  const double half = std::numbers::pi / omega;
  f.window = {centre - half, centre + half};
  return f;
}

FieldSample field_and_potential(double t, const FieldRealization& f) {
  if (!f.window.contains(t)) return {};
  return {electric_field(f, t), vector_potential(f, t)};
}

}  // namespace qholo
