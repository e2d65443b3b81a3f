#pragma once

#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>

#include "wigner/dynamics.hpp"

namespace wigner {

inline constexpr const char* kToolVersion = "0.1.0";

/// Sections and keys in file order, values as written (trimmed).
using ConfigEcho = std::vector<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>>;

/// Parsed scenario. See README for the schema; unknown sections or keys are
/// rejected.
struct ScenarioConfig {
  std::string name = "custom";  // massless | negative-sobolev | free-evolution | custom
  std::vector<double> k_values;
  std::string weights = "unit";  // homogeneous | inhomogeneous | unit
  double exponent = 0.0;

  std::string state = "coherent";  // vacuum | coherent | divergent
  PhasePoint amplitude;
  std::size_t divergence_mode = 0;
  double epsilon = 0.5;

  std::vector<double> h_list;
  double leak_threshold = 1e-10;
  std::optional<int> n_max;

  double delta = 1.0;
  std::optional<double> K_input;
  std::vector<double> r_list{1, 2, 4, 8, 16};
  std::vector<std::size_t> R_list{0};
  double slack = 3.0;
  double moment_tolerance = 0.05;
  double consistency_tolerance = 1e-3;
  bool compare_number_operator = false;
  double gf_tolerance = 0.05;

  int grid_points = 24;
  double n_sigma = 7.0;

  std::vector<double> t_list;
  double fourier_tolerance = 1e-2;
  double covariance_factor = 10.0;
  double invariance_tolerance = 1e-12;

  bool parallel = false;
  double max_cells = 5e7;
  double max_fock_dim = 2e6;
  std::string output;

  ConfigEcho echo;

  std::size_t n_modes() const { return k_values.size(); }
};

ScenarioConfig parse_config(std::istream& in);
ScenarioConfig load_config(const std::filesystem::path& path);

ModeSpace build_modes(const ScenarioConfig& cfg);
StateFamily build_family(const ScenarioConfig& cfg);

/// Generating functional of the smallest-h state against the limit
/// exp(i Re<phi, f>) of the atomic candidate.
struct GFSample {
  PhasePoint phi;
  cplx value;
  cplx limit;
  double difference;
  double leak;
  friend bool operator==(const GFSample&, const GFSample&) = default;
};

struct DynamicsEntry {
  PushforwardReport report;
  double fourier_tolerance;
  double covariance_bound;
  double invariance_tolerance;
  bool pass;
  friend bool operator==(const DynamicsEntry&, const DynamicsEntry&) = default;
};

struct ScenarioReport {
  std::string schema = "wigner.report";
  int version = 1;
  std::string tool_version = kToolVersion;
  ConfigEcho config;
  std::string execution = "serial";
  ConcentrationReport concentration;
  /// Hypothesis check with the plain number operator, when requested.
  std::optional<HypothesisReport> comparison;
  double gf_tolerance = 0.05;
  std::vector<GFSample> gf_samples;
  std::vector<DynamicsEntry> dynamics;
  int exit_code = 0;
  friend bool operator==(const ScenarioReport&, const ScenarioReport&) = default;
};

/// Resource estimates checked before any heavy work.
struct ResourceEstimate {
  double grid_cells;
  double fock_dim;
};
ResourceEstimate estimate_resources(const ScenarioConfig& cfg);

using ProgressFn = std::function<void(const std::string&)>;

ScenarioReport run_scenario(const ScenarioConfig& cfg, const ProgressFn& progress = {});

std::string report_to_json(const ScenarioReport& report);
ScenarioReport report_from_json(const std::string& text);

/// Writes report.json, metadata.json (wall time, timestamp) and the CSV side
/// tables tails.csv, moments.csv, generating_functional.csv into `dir`.
void emit_report(const ScenarioReport& report, const std::filesystem::path& dir, double wall_seconds);

}  // namespace wigner
