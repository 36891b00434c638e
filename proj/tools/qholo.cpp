// qholo: command-line driver for the holography simulations.

#include <cstdio>
#include <exception>
#include <filesystem>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "qholo/config.hpp"
#include "qholo/errors.hpp"
#include "qholo/io.hpp"
#include "qholo/pipeline.hpp"

namespace fs = std::filesystem;
using namespace qholo;

namespace {

enum ExitCode { kOk = 0, kUnexpected = 1, kConfig = 2, kNumerical = 3, kIo = 4 };

struct GlobalOptions {
  std::string config;
  std::string out;
  std::optional<std::uint64_t> seed;
  std::optional<int> threads;
  std::vector<std::string> overrides;
};

RunConfig resolve(const GlobalOptions& g) {
  RunConfig cfg = g.config.empty() ? parse_config("", "<defaults>", g.overrides)
                                   : load_config(g.config, g.overrides);
  if (!g.out.empty()) cfg.output_dir = g.out;
  if (g.seed) cfg.ensemble.seed = *g.seed;
  if (g.threads) cfg.ensemble.threads = *g.threads;
  cfg.validate();
  ensure_directory(cfg.output_dir);
  return cfg;
}

nlohmann::json reports_json(const std::vector<EnsembleReport>& reports) {
  nlohmann::json out = nlohmann::json::array();
  for (const EnsembleReport& r : reports) out.push_back(to_json(r));
  return out;
}

void write_lineout(const RunConfig& cfg, const MomentumDistribution& pmd) {
  const Spectrum s = lineout(pmd, cfg.analysis.lineout_pperp);
  CsvWriter csv(cfg.output_dir / "lineout.csv", {"pz", "value"});
  for (Eigen::Index i = 0; i < s.pz.size(); ++i) csv.row(s.pz(i), s.values(i));
  csv.close();
}

int cmd_pmd(const GlobalOptions& g, bool single_shot) {
  const RunConfig cfg = resolve(g);
  nlohmann::json meta = run_metadata(cfg, "pmd");
  MomentumDistribution pmd;
  if (single_shot) {
    PmdOptions opts;
    opts.sfa = cfg.sfa;
    opts.threads = cfg.ensemble.threads;
    pmd = single_shot_pmd(cfg.grid, reference_field(cfg.laser), cfg.laser.ip, opts);
  } else {
    EnsembleResult res = ensemble_pmd(cfg.state.make(), cfg.laser, cfg.grid, cfg.ensemble, cfg.sfa);
    pmd = std::move(res.pmd);
  }
  meta["mode"] = single_shot ? "single_shot" : "ensemble";
  meta["result"] = pmd.metadata;
  write_pmd_csv(cfg.output_dir / "pmd.csv", pmd);
  if (cfg.emit.count("lineout")) write_lineout(cfg, pmd);
  write_json_file(cfg.output_dir / "meta.json", meta);
  return kOk;
}

int cmd_lineout(const GlobalOptions& g) {
  const RunConfig cfg = resolve(g);
  const Eigen::VectorXd pz = cfg.grid.pz_nodes();
  const LineEnsemble line =
      ensemble_line(cfg.state.make(), cfg.laser, pz, cfg.analysis.lineout_pperp, cfg.ensemble, cfg.sfa);

  CsvWriter csv(cfg.output_dir / "lineout.csv", {"pz", "value"});
  for (Eigen::Index i = 0; i < pz.size(); ++i) csv.row(pz(i), line.values(i));
  csv.close();

  nlohmann::json meta = run_metadata(cfg, "lineout");
  meta["report"] = to_json(line.report);
  if (cfg.emit.count("visibility")) {
    const Eigen::ArrayXd v = trajectory_visibility(line.coherence.reference.col(0), line.coherence.signal.col(0),
                                                   line.coherence.cross.col(0));
    CsvWriter vis(cfg.output_dir / "visibility.csv", {"pz", "visibility"});
    for (Eigen::Index i = 0; i < pz.size(); ++i) vis.row(pz(i), v(i));
    vis.close();

    const VisibilityCurve fringe =
        fringe_visibility(pz, line.values, cfg.analysis.window_width, cfg.analysis.median_filter);
    CsvWriter fr(cfg.output_dir / "fringe_visibility.csv", {"pz", "visibility"});
    for (Eigen::Index i = 0; i < fringe.pz.size(); ++i) fr.row(fringe.pz(i), fringe.v(i));
    fr.close();
    if (!fringe.diagnostic.empty()) meta["fringe_diagnostic"] = fringe.diagnostic;
  }
  write_json_file(cfg.output_dir / "meta.json", meta);
  return kOk;
}

nlohmann::json analytic_json(const std::vector<AnalyticPoint>& points, const char* x_name) {
  nlohmann::json out = nlohmann::json::array();
  for (const AnalyticPoint& p : points) {
    out.push_back({{"state", p.state}, {x_name, p.x}, {"kappa", p.kappa}, {"sigma_up", p.sigma_up},
                   {"visibility", p.visibility}});
  }
  return out;
}

int cmd_visibility_scan(const GlobalOptions& g) {
  const RunConfig cfg = resolve(g);
  const SqueezeScan scan = run_squeeze_scan(cfg);
  CsvWriter csv(cfg.output_dir / "visibility_vs_r.csv", {"state", "r", "pz", "visibility"});
  for (const VisibilityRow& row : scan.rows) csv.row(row.state, row.x, row.pz, row.visibility);
  csv.close();

  nlohmann::json fit = {{"schema_version", kSchemaVersion}, {"pz", cfg.analysis.visibility_pz}};
  for (const auto& [state, f] : scan.decay) fit["squeeze_decay"][state] = to_json(f);
  for (const auto& [state, f] : scan.single_exponential) fit["single_exponential"][state] = to_json(f);
  fit["analytic"] = analytic_json(scan.analytic, "r");
  write_json_file(cfg.output_dir / "fit.json", fit);

  nlohmann::json meta = run_metadata(cfg, "visibility-scan");
  meta["reports"] = reports_json(scan.reports);
  write_json_file(cfg.output_dir / "meta.json", meta);
  return kOk;
}

int cmd_wavelength_scan(const GlobalOptions& g) {
  const RunConfig cfg = resolve(g);
  const WavelengthScan scan = run_wavelength_scan(cfg);
  CsvWriter csv(cfg.output_dir / "visibility_vs_lambda.csv", {"state", "lambda_um", "visibility"});
  for (const VisibilityRow& row : scan.rows) csv.row(row.state, row.x, row.visibility);
  csv.close();

  nlohmann::json fit = {{"schema_version", kSchemaVersion},
                        {"pz", cfg.analysis.visibility_pz},
                        {"r", cfg.scan.wavelength_r}};
  for (const auto& [state, by_power] : scan.fits) {
    for (const auto& [power, f] : by_power) fit["power_wavelength"][state][std::to_string(power)] = to_json(f);
  }
  fit["analytic"] = analytic_json(scan.analytic, "lambda_um");
  write_json_file(cfg.output_dir / "fit.json", fit);

  nlohmann::json meta = run_metadata(cfg, "wavelength-scan");
  meta["reports"] = reports_json(scan.reports);
  write_json_file(cfg.output_dir / "meta.json", meta);
  return kOk;
}

int cmd_fisher(const GlobalOptions& g) {
  const RunConfig cfg = resolve(g);
  const FisherRun run = run_fisher(cfg);
  CsvWriter csv(cfg.output_dir / "fisher_vs_r.csv", {"r", "cfi", "cfi_over_sql"});
  for (const FisherPoint& p : run.points) csv.row(p.r, p.cfi, p.cfi_over_sql);
  csv.close();
  write_fisher_map_csv(cfg.output_dir / "fisher_map.csv", run.largest);

  write_json_file(cfg.output_dir / "darkport.json",
                  {{"schema_version", kSchemaVersion},
                   {"r", run.darkport_r},
                   {"fisher_fraction", run.darkport.fisher_fraction},
                   {"yield_fraction", run.darkport.yield_fraction},
                   {"p_2up", run.p_2up}});

  nlohmann::json points = nlohmann::json::array();
  for (const FisherPoint& p : run.points) {
    points.push_back({{"r", p.r}, {"cfi", p.cfi}, {"cfi_over_sql", p.cfi_over_sql},
                      {"cfi_half_step", p.cfi_half_step}, {"richardson", p.richardson},
                      {"excluded_bins", p.excluded_bins}});
  }
  write_json_file(cfg.output_dir / "fit.json", {{"schema_version", kSchemaVersion},
                                                {"sql", run.sql},
                                                {"log_slope", run.slope},
                                                {"slope_from", run.slope_from},
                                                {"points", points}});

  nlohmann::json meta = run_metadata(cfg, "fisher");
  meta["reports"] = reports_json(run.reports);
  write_json_file(cfg.output_dir / "meta.json", meta);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Strong-field photoelectron holography driven by squeezed light", "qholo"};
  app.set_version_flag("--version", std::string(QHOLO_VERSION));
  app.require_subcommand(1);

  GlobalOptions g;
  app.add_option("--config", g.config, "TOML run configuration")->check(CLI::ExistingFile);
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "Monte Carlo seed");
  app.add_option("--threads", g.threads, "worker threads (results do not depend on it)")
      ->check(CLI::Range(1, 1024));
  app.add_option("--set", g.overrides, "override a config key, e.g. --set state.r=1.5")->take_all();

  bool single_shot = false;
  CLI::App* pmd = app.add_subcommand("pmd", "momentum distribution on the grid");
  pmd->add_flag("--single-shot", single_shot, "classical field only, no ensemble");
  CLI::App* line = app.add_subcommand("lineout", "ensemble lineout and its visibility");
  CLI::App* vis = app.add_subcommand("visibility-scan", "visibility against squeezing for PS, AS, CS");
  CLI::App* lam = app.add_subcommand("wavelength-scan", "visibility against wavelength at fixed intensity");
  CLI::App* fisher = app.add_subcommand("fisher", "classical Fisher information of the PS family");
  for (CLI::App* sub : {pmd, line, vis, lam, fisher}) sub->fallthrough();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kConfig;
  }

  try {
    if (*pmd) return cmd_pmd(g, single_shot);
    if (*line) return cmd_lineout(g);
    if (*vis) return cmd_visibility_scan(g);
    if (*lam) return cmd_wavelength_scan(g);
    if (*fisher) return cmd_fisher(g);
  } catch (const ConfigError& e) {
    std::cerr << "qholo: config error: " << e.what() << '\n';
    return kConfig;
  } catch (const DomainError& e) {
    std::cerr << "qholo: invalid input: " << e.what() << '\n';
    return kConfig;
  } catch (const NumericalError& e) {
    std::cerr << "qholo: numerical failure: " << e.what() << '\n';
    return kNumerical;
  } catch (const IoError& e) {
    std::cerr << "qholo: I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const std::exception& e) {
    std::cerr << "qholo: " << e.what() << '\n';
    return kUnexpected;
  }
  return kUnexpected;
}
