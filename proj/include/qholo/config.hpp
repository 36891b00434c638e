#pragma once

#include <filesystem>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "qholo/ensemble.hpp"
#include "qholo/field.hpp"
#include "qholo/gaussian_optics.hpp"
#include "qholo/momentum.hpp"
#include "qholo/sfa.hpp"

namespace qholo {

/// Driver state by label. CS ignores r; AS and PS use theta = 0 and pi
/// relative to the displacement phase; "custom" takes theta as given.
struct StateSpec {
  std::string label = "CS";
  double amplitude = 100.0;  // |alpha|, the effective noise scale
  double alpha_phase = 0.0;
  double r = 0.0;
  double theta = 0.0;

  SqueezedState make() const;
};

struct AnalysisSettings {
  double lineout_pperp = 0.0;
  double visibility_pz = 0.8;
  double window_width = 0.05;
  bool median_filter = false;
  double plateau_min = 0.3;
  double plateau_max = 1.5;
  double fisher_delta = 0.05;
  double fisher_floor = 1e-12;
  bool richardson = true;
  double darkport_r = 1.0;
};

enum class PhotonScaling { fixed, wavelength };

struct ScanSettings {
  std::vector<double> r = {0.0, 0.25, 0.5, 0.75, 1.0, 1.25, 1.5};
  std::vector<double> wavelengths_um = {0.8, 1.2, 1.6, 2.0};
  double wavelength_r = 1.0;
  /// How |alpha| follows the wavelength at fixed intensity.
  PhotonScaling photon_scaling = PhotonScaling::wavelength;
  std::vector<double> fisher_r = {0.5, 0.75, 1.0, 1.25, 1.5};
};

struct RunConfig {
  LaserParams laser;
  StateSpec state;
  MomentumGrid grid;
  EnsembleConfig ensemble;
  SfaOptions sfa;
  AnalysisSettings analysis;
  ScanSettings scan;
  std::filesystem::path output_dir = "out";
  std::set<std::string> emit = {"pmd", "lineout", "visibility", "fisher"};

  /// Throws ConfigError on any invalid value.
  void validate() const;
};

/// Parses a TOML document; keys absent from it keep their defaults and
/// unknown keys are rejected. Overrides are "section.key=value" strings with
/// TOML values, applied on top of the document before validation.
RunConfig parse_config(std::string_view toml_text, const std::string& source = "<string>",
                       const std::vector<std::string>& overrides = {});
RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides = {});

nlohmann::json to_json(const RunConfig& cfg);

}  // namespace qholo
