#pragma once

#include <filesystem>
#include <fstream>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include <nlohmann/json.hpp>

#include "qholo/analysis.hpp"
#include "qholo/ensemble.hpp"
#include "qholo/field.hpp"
#include "qholo/gaussian_optics.hpp"
#include "qholo/momentum.hpp"
#include "qholo/sfa.hpp"

namespace qholo {

/// Version of the CSV and JSON layouts written by the command-line tool.
inline constexpr int kSchemaVersion = 1;

/// Shortest round-trip text is not required; 17 significant digits always is.
std::string format_double(double x);

nlohmann::json to_json(const LaserParams& laser);
nlohmann::json to_json(const FieldConstants& c);
nlohmann::json to_json(const SqueezedState& s);
nlohmann::json to_json(const EnsembleConfig& cfg);
nlohmann::json to_json(const EnsembleReport& report);
nlohmann::json to_json(const SfaOptions& opts);
nlohmann::json to_json(const ScalingFit& fit);

void ensure_directory(const std::filesystem::path& dir);
void write_json_file(const std::filesystem::path& path, const nlohmann::json& doc);

class CsvWriter {
 public:
  CsvWriter(std::filesystem::path path, const std::vector<std::string>& header);

  template <typename... Cells>
  void row(const Cells&... cells) {
    std::string line;
    (append(line, cells), ...);
    line.back() = '\n';
    out_ << line;
  }

  /// Flushes and throws IoError if anything failed.
  void close();

 private:
  template <typename T>
  static void append(std::string& line, const T& cell) {
    if constexpr (std::is_floating_point_v<T>) {
      line += format_double(cell);
    } else if constexpr (std::is_integral_v<T>) {
      line += std::to_string(cell);
    } else {
      line += std::string_view(cell);
    }
    line += ',';
  }

  std::filesystem::path path_;
  std::ofstream out_;
};

void write_pmd_csv(const std::filesystem::path& path, const MomentumDistribution& pmd);
void write_fisher_map_csv(const std::filesystem::path& path, const FisherMap& map);

}  // namespace qholo
