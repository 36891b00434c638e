#include "qholo/config.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <sstream>

#include <toml.hpp>

#include "qholo/errors.hpp"
#include "qholo/io.hpp"

namespace qholo {
namespace {

const std::map<std::string, std::set<std::string>> kKnownKeys = {
    {"laser", {"wavelength_nm", "peak_intensity", "cep", "ip"}},
    {"state", {"label", "amplitude", "alpha_phase", "r", "theta"}},
    {"grid", {"pz_min", "pz_max", "pz_steps", "pperp_min", "pperp_max", "pperp_steps"}},
    {"ensemble",
     {"method", "samples", "order", "seed", "phase_coupling", "covariance_scale", "max_dropped_fraction"}},
    {"sfa", {"rescattering", "rescattering_weight", "backscattering", "clamp_ratio", "max_iterations"}},
    {"analysis",
     {"lineout_pperp", "visibility_pz", "window_width", "median_filter", "plateau_min", "plateau_max",
      "fisher_delta", "fisher_floor", "richardson", "darkport_r"}},
    {"scan", {"r", "wavelengths_um", "wavelength_r", "photon_scaling", "fisher_r"}},
    {"output", {"dir", "emit"}},
};

class Reader {
 public:
  Reader(const toml::table& root, std::string source) : root_(root), source_(std::move(source)) {
    for (const auto& [key, node] : root_) {
      const std::string name(key.str());
      const auto known = kKnownKeys.find(name);
      if (known == kKnownKeys.end()) fail("unknown section [" + name + "]");
      if (!node.is_table()) fail("[" + name + "] must be a table");
      for (const auto& [sub, _] : *node.as_table()) {
        if (!known->second.count(std::string(sub.str()))) {
          fail("unknown key " + name + "." + std::string(sub.str()));
        }
      }
    }
  }

  template <typename T>
  void get(const char* section, const char* key, T& out) const {
    const toml::node_view<const toml::node> node = root_[section][key];
    if (!node) return;
    if constexpr (std::is_same_v<T, bool>) {
      if (!node.is_boolean()) fail(where(section, key) + " must be a boolean");
      out = *node.value<bool>();
    } else if constexpr (std::is_same_v<T, std::string>) {
      if (!node.is_string()) fail(where(section, key) + " must be a string");
      out = *node.value<std::string>();
    } else if constexpr (std::is_integral_v<T>) {
      if (!node.is_integer()) fail(where(section, key) + " must be an integer");
      const std::int64_t v = *node.value<std::int64_t>();
      if (std::is_unsigned_v<T> && v < 0) fail(where(section, key) + " must be >= 0");
      out = static_cast<T>(v);
    } else {
      if (!node.is_number()) fail(where(section, key) + " must be a number");
      out = *node.value<double>();
    }
  }

  void get_list(const char* section, const char* key, std::vector<double>& out) const {
    const toml::node_view<const toml::node> node = root_[section][key];
    if (!node) return;
    const toml::array* arr = node.as_array();
    if (!arr) fail(where(section, key) + " must be an array of numbers");
    out.clear();
    for (const toml::node& item : *arr) {
      if (!item.is_number()) fail(where(section, key) + " must be an array of numbers");
      out.push_back(*item.value<double>());
    }
  }

  void get_strings(const char* section, const char* key, std::set<std::string>& out) const {
    const toml::node_view<const toml::node> node = root_[section][key];
    if (!node) return;
    const toml::array* arr = node.as_array();
    if (!arr) fail(where(section, key) + " must be an array of strings");
    out.clear();
    for (const toml::node& item : *arr) {
      if (!item.is_string()) fail(where(section, key) + " must be an array of strings");
      out.insert(*item.value<std::string>());
    }
  }

  [[noreturn]] void fail(const std::string& what) const { throw ConfigError(source_ + ": " + what); }

 private:
  static std::string where(const char* section, const char* key) {
    return std::string(section) + "." + key;
  }

  const toml::table& root_;
  std::string source_;
};

void require(bool ok, const std::string& what) {
  if (!ok) throw ConfigError(what);
}

// "section.key=value" with a TOML value, e.g. scan.r=[0.5,1.0] or state.label="PS".
void apply_override(toml::table& root, const std::string& text) {
  const auto eq = text.find('=');
  const auto dot = text.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq || dot == 0 || dot + 1 == eq) {
    throw ConfigError("override '" + text + "' is not of the form section.key=value");
  }
  const std::string section = text.substr(0, dot);
  const std::string key = text.substr(dot + 1, eq - dot - 1);
  toml::table parsed;
  try {
    const std::string doc = "v = " + text.substr(eq + 1);
    parsed = toml::parse(std::string_view(doc), std::string_view("override"));
  } catch (const toml::parse_error& e) {
    throw ConfigError("override '" + text + "': " + std::string(e.description()));
  }
  if (!root.contains(section)) root.insert(section, toml::table{});
  toml::table* table = root[section].as_table();
  if (!table) throw ConfigError("[" + section + "] must be a table");
  table->insert_or_assign(key, std::move(*parsed.get("v")));
}

}  // namespace

SqueezedState StateSpec::make() const {
  const std::complex<double> alpha = std::polar(amplitude, alpha_phase);
  if (label == "CS") return SqueezedState::make(alpha, 0.0, 0.0);
  // Angles are measured from the displacement: theta = 2 arg(alpha) squeezes along it.
  if (label == "AS") return SqueezedState::make(alpha, r, 2.0 * alpha_phase);
  if (label == "PS") return SqueezedState::make(alpha, r, 2.0 * alpha_phase + std::numbers::pi);
  if (label == "custom") return SqueezedState::make(alpha, r, theta);
  throw ConfigError("state.label must be CS, AS, PS or custom, got '" + label + "'");
}

void RunConfig::validate() const {
  try {
    laser.validate();
    grid.validate();
    ensemble.validate();
    (void)state.make();
  } catch (const DomainError& e) {
    throw ConfigError(e.what());
  }
  require(state.amplitude > 0.0 && std::isfinite(state.amplitude), "state.amplitude must be positive");
  require(state.r >= 0.0, "state.r must be >= 0");
  require(std::isfinite(sfa.rescattering_weight), "sfa.rescattering_weight must be finite");
  require(sfa.clamp_ratio >= 0.0, "sfa.clamp_ratio must be >= 0 (0 disables the clamp)");
  require(sfa.max_iterations >= 1, "sfa.max_iterations must be >= 1");
  require(analysis.window_width > 0.0, "analysis.window_width must be positive");
  require(analysis.plateau_max > analysis.plateau_min, "analysis plateau must be a nonempty interval");
  require(analysis.fisher_delta > 0.0, "analysis.fisher_delta must be positive");
  require(analysis.fisher_floor >= 0.0, "analysis.fisher_floor must be >= 0");
  require(analysis.lineout_pperp >= grid.pperp_min && analysis.lineout_pperp <= grid.pperp_max,
          "analysis.lineout_pperp must lie inside the grid");
  require(scan.wavelength_r >= 0.0, "scan.wavelength_r must be >= 0");
  for (double r : scan.r) require(r >= 0.0, "scan.r entries must be >= 0");
  for (double r : scan.fisher_r) require(r >= 0.0, "scan.fisher_r entries must be >= 0");
  for (double l : scan.wavelengths_um) require(l > 0.0, "scan.wavelengths_um entries must be positive");
  static const std::set<std::string> kEmit = {"pmd", "lineout", "visibility", "fisher"};
  for (const std::string& e : emit) require(kEmit.count(e) == 1, "output.emit has unknown entry '" + e + "'");
}

RunConfig parse_config(std::string_view toml_text, const std::string& source,
                       const std::vector<std::string>& overrides) {
  toml::table root;
  try {
    root = toml::parse(toml_text, source);
  } catch (const toml::parse_error& e) {
    std::ostringstream msg;
    msg << source << ": " << e.description() << " at line " << e.source().begin.line;
    throw ConfigError(msg.str());
  }
  for (const std::string& o : overrides) apply_override(root, o);
  const Reader in(root, source);
  RunConfig cfg;

  in.get("laser", "wavelength_nm", cfg.laser.wavelength_nm);
  in.get("laser", "peak_intensity", cfg.laser.peak_intensity);
  in.get("laser", "cep", cfg.laser.cep);
  in.get("laser", "ip", cfg.laser.ip);

  in.get("state", "label", cfg.state.label);
  in.get("state", "amplitude", cfg.state.amplitude);
  in.get("state", "alpha_phase", cfg.state.alpha_phase);
  in.get("state", "r", cfg.state.r);
  in.get("state", "theta", cfg.state.theta);

  in.get("grid", "pz_min", cfg.grid.pz_min);
  in.get("grid", "pz_max", cfg.grid.pz_max);
  in.get("grid", "pz_steps", cfg.grid.pz_steps);
  in.get("grid", "pperp_min", cfg.grid.pperp_min);
  in.get("grid", "pperp_max", cfg.grid.pperp_max);
  in.get("grid", "pperp_steps", cfg.grid.pperp_steps);

  std::string method = to_string(cfg.ensemble.method);
  in.get("ensemble", "method", method);
  if (method == "gauss_hermite") {
    cfg.ensemble.method = EnsembleMethod::gauss_hermite;
  } else if (method == "monte_carlo") {
    cfg.ensemble.method = EnsembleMethod::monte_carlo;
  } else {
    in.fail("ensemble.method must be gauss_hermite or monte_carlo");
  }
  in.get("ensemble", "samples", cfg.ensemble.samples);
  in.get("ensemble", "order", cfg.ensemble.order);
  in.get("ensemble", "seed", cfg.ensemble.seed);
  in.get("ensemble", "phase_coupling", cfg.ensemble.phase_coupling);
  in.get("ensemble", "covariance_scale", cfg.ensemble.covariance_scale);
  in.get("ensemble", "max_dropped_fraction", cfg.ensemble.max_dropped_fraction);

  in.get("sfa", "rescattering", cfg.sfa.rescattering);
  in.get("sfa", "rescattering_weight", cfg.sfa.rescattering_weight);
  in.get("sfa", "backscattering", cfg.sfa.backscattering);
  in.get("sfa", "clamp_ratio", cfg.sfa.clamp_ratio);
  in.get("sfa", "max_iterations", cfg.sfa.max_iterations);

  in.get("analysis", "lineout_pperp", cfg.analysis.lineout_pperp);
  in.get("analysis", "visibility_pz", cfg.analysis.visibility_pz);
  in.get("analysis", "window_width", cfg.analysis.window_width);
  in.get("analysis", "median_filter", cfg.analysis.median_filter);
  in.get("analysis", "plateau_min", cfg.analysis.plateau_min);
  in.get("analysis", "plateau_max", cfg.analysis.plateau_max);
  in.get("analysis", "fisher_delta", cfg.analysis.fisher_delta);
  in.get("analysis", "fisher_floor", cfg.analysis.fisher_floor);
  in.get("analysis", "richardson", cfg.analysis.richardson);
  in.get("analysis", "darkport_r", cfg.analysis.darkport_r);

  in.get_list("scan", "r", cfg.scan.r);
  in.get_list("scan", "wavelengths_um", cfg.scan.wavelengths_um);
  in.get("scan", "wavelength_r", cfg.scan.wavelength_r);
  std::string scaling = cfg.scan.photon_scaling == PhotonScaling::fixed ? "fixed" : "wavelength";
  in.get("scan", "photon_scaling", scaling);
  if (scaling == "fixed") {
    cfg.scan.photon_scaling = PhotonScaling::fixed;
  } else if (scaling == "wavelength") {
    cfg.scan.photon_scaling = PhotonScaling::wavelength;
  } else {
    in.fail("scan.photon_scaling must be fixed or wavelength");
  }
  in.get_list("scan", "fisher_r", cfg.scan.fisher_r);

  std::string dir = cfg.output_dir.string();
  in.get("output", "dir", dir);
  cfg.output_dir = dir;
  in.get_strings("output", "emit", cfg.emit);

  cfg.validate();
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path, const std::vector<std::string>& overrides) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read config", path.string());
  std::ostringstream text;
  text << in.rdbuf();
  return parse_config(text.str(), path.string(), overrides);
}

nlohmann::json to_json(const RunConfig& cfg) {
  return {
      {"laser", to_json(cfg.laser)},
      {"state",
       {{"label", cfg.state.label},
        {"amplitude", cfg.state.amplitude},
        {"alpha_phase", cfg.state.alpha_phase},
        {"r", cfg.state.r},
        {"theta", cfg.state.theta}}},
      {"grid", to_json(cfg.grid)},
      {"ensemble", to_json(cfg.ensemble)},
      {"sfa", to_json(cfg.sfa)},
      {"analysis",
       {{"lineout_pperp", cfg.analysis.lineout_pperp},
        {"visibility_pz", cfg.analysis.visibility_pz},
        {"window_width", cfg.analysis.window_width},
        {"median_filter", cfg.analysis.median_filter},
        {"plateau_min", cfg.analysis.plateau_min},
        {"plateau_max", cfg.analysis.plateau_max},
        {"fisher_delta", cfg.analysis.fisher_delta},
        {"fisher_floor", cfg.analysis.fisher_floor},
        {"richardson", cfg.analysis.richardson},
        {"darkport_r", cfg.analysis.darkport_r}}},
      {"scan",
       {{"r", cfg.scan.r},
        {"wavelengths_um", cfg.scan.wavelengths_um},
        {"wavelength_r", cfg.scan.wavelength_r},
        {"photon_scaling", cfg.scan.photon_scaling == PhotonScaling::fixed ? "fixed" : "wavelength"},
        {"fisher_r", cfg.scan.fisher_r}}},
      {"output", {{"dir", cfg.output_dir.string()}, {"emit", cfg.emit}}},
  };
}

}  // namespace qholo
