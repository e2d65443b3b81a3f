#pragma once

#include <optional>
#include <string>

#include "wigner/cylmeasure.hpp"
#include "wigner/states.hpp"

namespace wigner {

/// Husimi (lower symbol) density |<coherent(z), psi>|^2 / (pi h)^n on the
/// leading `count` modes; the remaining modes are traced out.
struct HusimiResult {
  FiniteMeasure measure;
  /// ||psi||^2 minus the captured mass.
  double mass_deficit;
};

HusimiResult husimi_measure(const QuantumState& psi, std::size_t count, const GridSpec& grid,
                            const ModeSpace& modes, ExecPolicy policy = ExecPolicy::serial,
                            double max_deficit = 1e-3);

/// First and second moments of the ladder operators of one mode.
struct ModeStatistics {
  cplx mean;        // <a_h(e_j)>
  double number;    // <a*_h(e_j) a_h(e_j)>
};
ModeStatistics mode_statistics(const QuantumState& psi, std::size_t j);

/// Grid centered at the state's mean amplitudes with half width
/// n_sigma * sqrt((<a*a> - |<a>|^2 + h) / 2) per mode.
GridSpec auto_grid(const QuantumState& psi, std::size_t count, int points, double n_sigma = 7.0);

struct GridOptions {
  int points = 24;
  double n_sigma = 7.0;
  /// Fixed grid; replaces the automatic one when set.
  std::optional<GridSpec> grid;
  double max_deficit = 1e-3;
};

/// Gaussian test symbol exp(-pi |z_0 - center|^2 / width^2) on the first mode.
struct TestSymbol {
  cplx center;
  double width;
  double evaluate(const PhasePoint& z) const;
  /// Weyl expectation from the Husimi measure of the same state. With
  /// a = pi / width^2, Op^W(exp(-a|z-c|^2)) is the anti-Wick quantization of
  /// (1 + b h / 2) exp(-b |z - c|^2), b = 2a / (2 - a h); needs a h < 2.
  double weyl_expectation(const FiniteMeasure& husimi, double h) const;
  friend bool operator==(const TestSymbol&, const TestSymbol&) = default;
};

struct LimitDiagnostics {
  std::vector<double> h;
  std::vector<double> mass_deficit;
  std::vector<PhasePoint> test_frequencies;
  /// Characteristic functions of the Husimi measures: [h index][frequency].
  std::vector<std::vector<cplx>> characteristic;
  /// First-order Richardson value from the two smallest h, per frequency.
  std::vector<cplx> characteristic_extrapolated;
  std::vector<TestSymbol> battery;
  /// Weyl expectations [h index][symbol].
  std::vector<std::vector<double>> weyl_values;
  /// Richardson value per symbol.
  std::vector<double> weyl_extrapolated;
  /// |value(h) - extrapolated| [h index][symbol].
  std::vector<std::vector<double>> residuals;
  /// Residuals decrease along the grid for every symbol.
  bool cauchy = true;
  friend bool operator==(const LimitDiagnostics&, const LimitDiagnostics&) = default;
};

struct LimitResult {
  FiniteMeasure measure;  // Husimi measure at the smallest h
  LimitDiagnostics diagnostics;
};

/// Needs at least three h values.
LimitResult limit_measure(const StateFamily& family, std::size_t count, const GridOptions& grid,
                          ExecPolicy policy = ExecPolicy::serial);

/// Richardson extrapolation to h = 0 from two samples.
double richardson(double h1, double x1, double h2, double x2);
cplx richardson(double h1, cplx x1, double h2, cplx x2);

/// Fraction of mass with q(z - f) <= radius^2 (cells counted by center).
double mass_fraction_near(const FiniteMeasure& mu, const PhasePoint& f, double radius);

/// Atom criterion: >= 99% of the mass within q-radius max(0.1, 5 sqrt(h)).
struct AtomCheck {
  double radius;
  double fraction;
  bool atomic;
  friend bool operator==(const AtomCheck&, const AtomCheck&) = default;
};
AtomCheck atom_check(const FiniteMeasure& mu, const PhasePoint& f, double h);

struct VerdictOptions {
  double delta = 1.0;
  /// Hypothesis constant; the moment-table supremum when unset.
  std::optional<double> K_input;
  std::vector<double> r_list{1, 2, 4, 8, 16};
  /// Quotient indices, strictly increasing; E_R spans the first R + 1 modes.
  std::vector<std::size_t> R_list{0};
  double slack = 3.0;
  double moment_tolerance = 0.05;
  double consistency_tolerance = 1e-3;
  /// Relative excess of the table supremum over K_input that still counts
  /// as bounded.
  double hypothesis_tolerance = 1e-9;
  /// Log-log slope at or below which growth toward small h is declared.
  double growth_slope = -0.1;
  std::size_t holder_pairs = 50;
  std::uint64_t seed = 20240917;
  GridOptions grid;
  /// Moment operator of the hypothesis; the m-number on all modes when unset.
  std::optional<MomentOperator> moment_op;
  std::string moment_op_name = "m_number";
};

struct TailRow {
  double r;
  double tail;
  double bound;
  bool pass;
  friend bool operator==(const TailRow&, const TailRow&) = default;
};

struct QuotientReport {
  std::size_t R;
  double mass;
  double mass_deficit;
  std::vector<TailRow> tails;
  double fitted_K;
  double q_moment;
  double moment_bound;
  bool moment_pass;
  double holder;
  double holder_bound;
  bool holder_pass;
  std::optional<AtomCheck> atom;
  friend bool operator==(const QuotientReport&, const QuotientReport&) = default;
};

struct HypothesisReport {
  std::string operator_name;
  MomentTable table;
  double K_input;
  double tolerance;
  double slope;
  double growth_slope;
  bool passed;
  std::string reason;
  friend bool operator==(const HypothesisReport&, const HypothesisReport&) = default;
};

/// Moment table of `op` at opts.delta against opts.K_input (its supremum when
/// unset), with growth detection toward small h.
HypothesisReport check_hypothesis(const StateFamily& family, const MomentOperator& op, const std::string& name,
                                  const VerdictOptions& opts, ExecPolicy policy = ExecPolicy::serial);

enum class Verdict { pass, fail, hypothesis_failed };
std::string to_string(Verdict v);

struct ConcentrationReport {
  double delta;
  double slack;
  double moment_tolerance;
  HypothesisReport hypothesis;
  std::vector<QuotientReport> quotients;
  std::optional<ConsistencyReport> consistency;
  std::optional<LimitDiagnostics> diagnostics;
  Verdict verdict;
  friend bool operator==(const ConcentrationReport&, const ConcentrationReport&) = default;
};

ConcentrationReport concentration_verdict(const StateFamily& family, const VerdictOptions& opts,
                                          ExecPolicy policy = ExecPolicy::serial);

/// Least-squares slope of log(moment) against log(h) over positive entries.
double log_log_slope(const std::vector<double>& h, const std::vector<double>& values);

struct QuantizedTailRow {
  double h;
  double value;
  double error_estimate;
  double leak;
};

/// <psi_h, Op^h(chi(r^{-1/2} .)) psi_h> on the leading `count` modes,
/// evaluated as ||psi||^2 - <Op^h(1 - chi_r)> through the generating
/// functional with the m-ladder quantization.
std::vector<QuantizedTailRow> quantized_tail_expectation(const StateFamily& family, double r, std::size_t count,
                                                         const RadialCutoff& chi = {},
                                                         ExecPolicy policy = ExecPolicy::serial);

}  // namespace wigner
