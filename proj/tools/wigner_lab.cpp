#include <CLI11.hpp>
#include <chrono>
#include <iostream>

#include "wigner/scenario.hpp"

namespace {

int run(const std::string& config_path, std::string out, bool serial, double max_cells, double max_fock_dim,
        bool verbose) {
  using namespace wigner;
  ScenarioConfig cfg = load_config(config_path);
  if (serial) cfg.parallel = false;
  if (max_cells > 0) cfg.max_cells = max_cells;
  if (max_fock_dim > 0) cfg.max_fock_dim = max_fock_dim;
  if (out.empty()) out = cfg.output.empty() ? "out" : cfg.output;

  const auto start = std::chrono::steady_clock::now();
  ProgressFn progress;
  if (verbose) progress = [](const std::string& msg) { std::cerr << "[wigner_lab] " << msg << "\n"; };
  const ScenarioReport report = run_scenario(cfg, progress);
  const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  emit_report(report, out, wall);

  const ConcentrationReport& c = report.concentration;
  std::cout << "scenario   " << cfg.name << " (" << report.execution << ")\n";
  std::cout << "hypothesis " << (c.hypothesis.passed ? "satisfied" : "failed: " + c.hypothesis.reason) << "\n";
  if (report.comparison) {
    std::cout << "number op  " << (report.comparison->passed ? "satisfied" : "failed: " + report.comparison->reason)
              << "\n";
  }
  std::cout << "verdict    " << to_string(c.verdict) << "\n";
  for (const auto& d : report.dynamics) {
    std::cout << "dynamics   t=" << d.report.t << " fourier_sup=" << d.report.fourier_sup
              << (d.pass ? " pass" : " fail") << "\n";
  }
  std::cout << "report     " << (std::filesystem::path(out) / "report.json").string() << "\n";
  return report.exit_code;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semiclassical limit extraction for truncated bosonic Fock spaces"};
  app.require_subcommand(1);

  std::string config, out;
  bool serial = false, verbose = false;
  double max_cells = 0, max_fock_dim = 0;
  auto* cmd = app.add_subcommand("run", "Run a scenario and write its report");
  cmd->add_option("config", config, "Scenario file (INI)")->required()->check(CLI::ExistingFile);
  cmd->add_option("-o,--out", out, "Output directory (default: run.output or ./out)");
  cmd->add_flag("--serial", serial, "Force the serial kernels");
  cmd->add_option("--max-cells", max_cells, "Override the extraction grid budget");
  cmd->add_option("--max-fock-dim", max_fock_dim, "Override the Fock coefficient budget");
  cmd->add_flag("-v,--verbose", verbose, "Progress on stderr");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 3;
  }

  try {
    return run(config, out, serial, max_cells, max_fock_dim, verbose);
  } catch (const wigner::ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 3;
  } catch (const wigner::ResourceError& e) {
    std::cerr << "resource limit: " << e.what() << " (estimate " << e.estimate() << ")\n";
    return 3;
  } catch (const wigner::IoError& e) {
    std::cerr << "i/o error: " << e.what() << "\n";
    return 3;
  } catch (const wigner::Error& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 4;
  }
}
