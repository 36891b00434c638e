#include "qholo/io.hpp"

#include <cstdio>

#include "qholo/errors.hpp"

namespace qholo {

std::string format_double(double x) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

nlohmann::json to_json(const LaserParams& laser) {
  return {{"wavelength_nm", laser.wavelength_nm},
          {"peak_intensity_w_cm2", laser.peak_intensity},
          {"cep", laser.cep},
          {"ip", laser.ip}};
}

nlohmann::json to_json(const FieldConstants& c) {
  return {{"e0", c.e0},
          {"omega", c.omega},
          {"up", c.up},
          {"p_2up", c.p_2up},
          {"quiver_amplitude", c.quiver_amplitude},
          {"atomic_unit_intensity_w_cm2", kAtomicUnitIntensity},
          {"omega_times_wavelength_nm", kOmegaWavelengthNm}};
}

nlohmann::json to_json(const SqueezedState& s) {
  return {{"alpha_re", s.alpha.real()},
          {"alpha_im", s.alpha.imag()},
          {"r", s.r},
          {"theta", s.theta},
          {"squeezing_db", squeezing_to_db(s.r)}};
}

nlohmann::json to_json(const EnsembleConfig& cfg) {
  return {{"method", to_string(cfg.method)},
          {"samples", cfg.samples},
          {"order", cfg.order},
          {"seed", cfg.seed},
          {"phase_coupling", cfg.phase_coupling},
          {"covariance_scale", cfg.covariance_scale},
          {"max_dropped_fraction", cfg.max_dropped_fraction}};
}

nlohmann::json to_json(const EnsembleReport& report) {
  nlohmann::json j = {{"requested_samples", report.requested_samples},
                      {"realized_samples", report.realized_samples},
                      {"dropped_contributions", report.dropped_contributions},
                      {"total_contributions", report.total_contributions},
                      {"clamped_saddles", report.clamped_saddles},
                      {"standard_error_available", report.error_available},
                      {"wall_time_s", report.wall_time}};
  if (report.error_available) j["max_standard_error"] = report.standard_error.maxCoeff();
  return j;
}

nlohmann::json to_json(const SfaOptions& opts) {
  return {{"rescattering", opts.rescattering},
          {"rescattering_weight", opts.rescattering_weight},
          {"backscattering", opts.backscattering},
          {"clamp_ratio", opts.clamp_ratio},
          {"max_iterations", opts.max_iterations}};
}

nlohmann::json to_json(const ScalingFit& fit) {
  nlohmann::json j = {{"model", to_string(fit.model)},
                      {"rate", fit.rate},
                      {"offset", fit.offset},
                      {"goodness", fit.goodness},
                      {"excluded", fit.excluded},
                      {"diagnostics", fit.diagnostics}};
  if (fit.model == FitModel::power_wavelength) j["power"] = fit.power;
  return j;
}

void ensure_directory(const std::filesystem::path& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec || !std::filesystem::is_directory(dir)) {
    throw IoError("cannot create output directory", dir.string());
  }
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot open for writing", path.string());
  out << doc.dump(2) << '\n';
  out.close();
  if (!out) throw IoError("write failed", path.string());
}

CsvWriter::CsvWriter(std::filesystem::path path, const std::vector<std::string>& header)
    : path_(std::move(path)), out_(path_) {
  if (!out_) throw IoError("cannot open for writing", path_.string());
  for (std::size_t i = 0; i < header.size(); ++i) out_ << (i ? "," : "") << header[i];
  out_ << '\n';
}

void CsvWriter::close() {
  out_.close();
  if (!out_) throw IoError("write failed", path_.string());
}

void write_pmd_csv(const std::filesystem::path& path, const MomentumDistribution& pmd) {
  CsvWriter csv(path, {"pz", "pperp", "value"});
  for (int j = 0; j < pmd.grid.pperp_steps; ++j) {
    for (int i = 0; i < pmd.grid.pz_steps; ++i) csv.row(pmd.grid.pz(i), pmd.grid.pperp(j), pmd.values(i, j));
  }
  csv.close();
}

void write_fisher_map_csv(const std::filesystem::path& path, const FisherMap& map) {
  CsvWriter csv(path, {"pz", "pperp", "density"});
  for (int j = 0; j < map.grid.pperp_steps; ++j) {
    for (int i = 0; i < map.grid.pz_steps; ++i) csv.row(map.grid.pz(i), map.grid.pperp(j), map.density(i, j));
  }
  csv.close();
}

}  // namespace qholo
