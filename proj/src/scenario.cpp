#include "wigner/scenario.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <chrono>
#include <cmath>
#include <ctime>
#include <fstream>
#include <iomanip>
#include <json.hpp>
#include <map>
#include <set>
#include <sstream>

namespace wigner {

namespace {

namespace pt = boost::property_tree;

const std::map<std::string, std::set<std::string>>& schema() {
  static const std::map<std::string, std::set<std::string>> s = {
      {"scenario", {"name"}},
      {"modes", {"k", "weights", "exponent"}},
      {"state", {"kind", "amplitude", "divergence_mode", "epsilon"}},
      {"semiclassical", {"h", "leak_threshold", "n_max"}},
      {"verdict",
       {"delta", "K_input", "r", "R", "slack", "moment_tolerance", "consistency_tolerance", "compare_number_operator",
        "gf_tolerance"}},
      {"grid", {"points", "n_sigma"}},
      {"dynamics", {"t", "fourier_tolerance", "covariance_factor", "invariance_tolerance"}},
      {"run", {"parallel", "max_cells", "max_fock_dim", "output"}},
  };
  return s;
}

std::string trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r\n");
  return std::string(s.substr(b, e - b + 1));
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  std::istringstream in(s);
  while (std::getline(in, cur, sep)) out.push_back(trim(cur));
  if (!s.empty() && s.back() == sep) out.emplace_back();
  return out;
}

double to_double(const std::string& path, const std::string& text) {
  double v = 0.0;
  const char* b = text.data();
  const char* e = b + text.size();
  if (text.size() > 1 && text[0] == '+') ++b;
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || text.empty()) throw ConfigError(path, "expected a number, got '" + text + "'");
  if (!std::isfinite(v)) throw ConfigError(path, "value must be finite");
  return v;
}

long to_integer(const std::string& path, const std::string& text) {
  long v = 0;
  const char* b = text.data();
  const char* e = b + text.size();
  auto [p, ec] = std::from_chars(b, e, v);
  if (ec != std::errc() || p != e || text.empty()) throw ConfigError(path, "expected an integer, got '" + text + "'");
  return v;
}

bool to_bool(const std::string& path, const std::string& text) {
  if (text == "true" || text == "yes" || text == "1") return true;
  if (text == "false" || text == "no" || text == "0") return false;
  throw ConfigError(path, "expected true or false, got '" + text + "'");
}

std::vector<double> to_doubles(const std::string& path, const std::string& text) {
  std::vector<double> out;
  if (trim(text).empty()) return out;
  for (const auto& item : split(text, ',')) out.push_back(to_double(path, item));
  return out;
}

/// Parses "a", "bi", "a+bi" or "a-bi".
cplx to_complex(const std::string& path, const std::string& text) {
  if (text.empty()) throw ConfigError(path, "empty complex number");
  if (text.back() != 'i') return to_double(path, text);
  const std::string body = text.substr(0, text.size() - 1);
  std::size_t split_at = std::string::npos;
  for (std::size_t k = body.size(); k-- > 1;) {
    if ((body[k] == '+' || body[k] == '-') && body[k - 1] != 'e' && body[k - 1] != 'E') {
      split_at = k;
      break;
    }
  }
  auto imag = [&](const std::string& s) {
    if (s.empty() || s == "+") return 1.0;
    if (s == "-") return -1.0;
    return to_double(path, s);
  };
  if (split_at == std::string::npos) return {0.0, imag(body)};
  return {to_double(path, body.substr(0, split_at)), imag(body.substr(split_at))};
}

template <class T>
T positive(const std::string& path, T v) {
  if (!(v > 0)) throw ConfigError(path, "must be positive");
  return v;
}

}  // namespace

ScenarioConfig parse_config(std::istream& in) {
  pt::ptree tree;
  try {
    pt::read_ini(in, tree);
  } catch (const pt::ini_parser_error& e) {
    throw ConfigError("line " + std::to_string(e.line()), e.message());
  }
  ScenarioConfig cfg;
  std::map<std::string, std::string> values;
  for (const auto& [section, body] : tree) {
    const auto it = schema().find(section);
    if (it == schema().end()) throw ConfigError(section, "unknown section");
    if (!body.data().empty()) throw ConfigError(section, "key outside of any section");
    std::vector<std::pair<std::string, std::string>> entries;
    for (const auto& [key, leaf] : body) {
      const std::string path = section + "." + key;
      if (!it->second.count(key)) throw ConfigError(path, "unknown key");
      if (!leaf.empty()) throw ConfigError(path, "nested keys are not supported");
      entries.emplace_back(key, leaf.data());
      values[path] = leaf.data();
    }
    cfg.echo.emplace_back(section, std::move(entries));
  }
  auto get = [&](const std::string& path) -> std::optional<std::string> {
    const auto it = values.find(path);
    if (it == values.end()) return std::nullopt;
    return it->second;
  };
  auto require = [&](const std::string& path) {
    auto v = get(path);
    if (!v) throw ConfigError(path, "required key is missing");
    return *v;
  };

  if (auto v = get("scenario.name")) cfg.name = *v;
  if (cfg.name != "massless" && cfg.name != "negative-sobolev" && cfg.name != "free-evolution" && cfg.name != "custom") {
    throw ConfigError("scenario.name", "expected massless, negative-sobolev, free-evolution or custom");
  }

  cfg.k_values = to_doubles("modes.k", require("modes.k"));
  if (cfg.k_values.empty()) throw ConfigError("modes.k", "at least one mode is required");
  if (auto v = get("modes.weights")) cfg.weights = *v;
  if (cfg.weights != "homogeneous" && cfg.weights != "inhomogeneous" && cfg.weights != "unit") {
    throw ConfigError("modes.weights", "expected homogeneous, inhomogeneous or unit");
  }
  if (auto v = get("modes.exponent")) cfg.exponent = to_double("modes.exponent", *v);
  if (cfg.weights != "unit" && !get("modes.exponent")) throw ConfigError("modes.exponent", "required for Sobolev weights");
  if (cfg.weights == "inhomogeneous" && !(cfg.exponent < 0.0)) {
    throw ConfigError("modes.exponent", "inhomogeneous weights need r < 0");
  }
  if (cfg.name == "massless" && cfg.weights != "homogeneous") {
    throw ConfigError("modes.weights", "the massless scenario uses homogeneous weights");
  }
  if (cfg.name == "negative-sobolev" && cfg.weights != "inhomogeneous") {
    throw ConfigError("modes.weights", "the negative-sobolev scenario uses inhomogeneous weights");
  }

  if (auto v = get("state.kind")) cfg.state = *v;
  if (cfg.state != "vacuum" && cfg.state != "coherent" && cfg.state != "divergent") {
    throw ConfigError("state.kind", "expected vacuum, coherent or divergent");
  }
  cfg.amplitude = PhasePoint(cfg.n_modes());
  if (auto v = get("state.amplitude")) {
    const auto items = split(*v, ',');
    if (items.size() != cfg.n_modes()) throw ConfigError("state.amplitude", "needs one entry per mode");
    for (std::size_t j = 0; j < items.size(); ++j) cfg.amplitude[j] = to_complex("state.amplitude", items[j]);
  } else if (cfg.state != "vacuum") {
    throw ConfigError("state.amplitude", "required key is missing");
  }
  if (cfg.state == "divergent") {
    const long mode = to_integer("state.divergence_mode", require("state.divergence_mode"));
    if (mode < 0 || static_cast<std::size_t>(mode) >= cfg.n_modes()) {
      throw ConfigError("state.divergence_mode", "mode index out of range");
    }
    cfg.divergence_mode = static_cast<std::size_t>(mode);
    cfg.epsilon = to_double("state.epsilon", require("state.epsilon"));
    if (!(cfg.epsilon > 0.0 && cfg.epsilon < 1.0)) throw ConfigError("state.epsilon", "must lie in (0, 1)");
  } else if (get("state.divergence_mode") || get("state.epsilon")) {
    throw ConfigError("state", "divergence_mode and epsilon apply to divergent states only");
  }

  cfg.h_list = to_doubles("semiclassical.h", require("semiclassical.h"));
  if (cfg.h_list.empty()) throw ConfigError("semiclassical.h", "at least one value is required");
  for (std::size_t i = 0; i < cfg.h_list.size(); ++i) {
    if (!(cfg.h_list[i] > 0.0 && cfg.h_list[i] < 1.0)) throw ConfigError("semiclassical.h", "values must lie in (0, 1)");
    if (i > 0 && !(cfg.h_list[i] < cfg.h_list[i - 1])) throw ConfigError("semiclassical.h", "values must decrease");
  }
  if (auto v = get("semiclassical.leak_threshold")) {
    cfg.leak_threshold = to_double("semiclassical.leak_threshold", *v);
    if (!(cfg.leak_threshold > 0.0 && cfg.leak_threshold < 1.0)) {
      throw ConfigError("semiclassical.leak_threshold", "must lie in (0, 1)");
    }
  }
  if (auto v = get("semiclassical.n_max")) {
    const long n = to_integer("semiclassical.n_max", *v);
    if (n < 0) throw ConfigError("semiclassical.n_max", "must be nonnegative");
    cfg.n_max = static_cast<int>(n);
  }

  if (auto v = get("verdict.delta")) cfg.delta = to_double("verdict.delta", *v);
  if (!(cfg.delta > 0.0 && cfg.delta <= 1.0)) throw ConfigError("verdict.delta", "must lie in (0, 1]");
  if (auto v = get("verdict.K_input"); v && *v != "auto") cfg.K_input = positive("verdict.K_input", to_double("verdict.K_input", *v));
  if (auto v = get("verdict.r")) cfg.r_list = to_doubles("verdict.r", *v);
  for (double r : cfg.r_list) positive("verdict.r", r);
  if (auto v = get("verdict.R")) {
    cfg.R_list.clear();
    for (const auto& item : split(*v, ',')) {
      const long R = to_integer("verdict.R", item);
      if (R < 0 || static_cast<std::size_t>(R) >= cfg.n_modes()) throw ConfigError("verdict.R", "quotient index out of range");
      if (!cfg.R_list.empty() && static_cast<std::size_t>(R) <= cfg.R_list.back()) {
        throw ConfigError("verdict.R", "values must increase");
      }
      cfg.R_list.push_back(static_cast<std::size_t>(R));
    }
  }
  if (auto v = get("verdict.slack")) cfg.slack = positive("verdict.slack", to_double("verdict.slack", *v));
  if (auto v = get("verdict.moment_tolerance")) cfg.moment_tolerance = to_double("verdict.moment_tolerance", *v);
  if (auto v = get("verdict.consistency_tolerance")) {
    cfg.consistency_tolerance = positive("verdict.consistency_tolerance", to_double("verdict.consistency_tolerance", *v));
  }
  if (auto v = get("verdict.compare_number_operator")) {
    cfg.compare_number_operator = to_bool("verdict.compare_number_operator", *v);
  }
  if (auto v = get("verdict.gf_tolerance")) cfg.gf_tolerance = positive("verdict.gf_tolerance", to_double("verdict.gf_tolerance", *v));

  if (auto v = get("grid.points")) {
    const long p = to_integer("grid.points", *v);
    if (p < 4) throw ConfigError("grid.points", "need at least 4 points per axis");
    cfg.grid_points = static_cast<int>(p);
  }
  if (auto v = get("grid.n_sigma")) cfg.n_sigma = positive("grid.n_sigma", to_double("grid.n_sigma", *v));

  if (auto v = get("dynamics.t")) cfg.t_list = to_doubles("dynamics.t", *v);
  if (auto v = get("dynamics.fourier_tolerance")) {
    cfg.fourier_tolerance = positive("dynamics.fourier_tolerance", to_double("dynamics.fourier_tolerance", *v));
  }
  if (auto v = get("dynamics.covariance_factor")) {
    cfg.covariance_factor = positive("dynamics.covariance_factor", to_double("dynamics.covariance_factor", *v));
  }
  if (auto v = get("dynamics.invariance_tolerance")) {
    cfg.invariance_tolerance = positive("dynamics.invariance_tolerance", to_double("dynamics.invariance_tolerance", *v));
  }
  if (cfg.name == "free-evolution" && cfg.t_list.empty()) throw ConfigError("dynamics.t", "free-evolution needs times");

  if (auto v = get("run.parallel")) cfg.parallel = to_bool("run.parallel", *v);
  if (auto v = get("run.max_cells")) cfg.max_cells = positive("run.max_cells", to_double("run.max_cells", *v));
  if (auto v = get("run.max_fock_dim")) cfg.max_fock_dim = positive("run.max_fock_dim", to_double("run.max_fock_dim", *v));
  if (auto v = get("run.output")) cfg.output = *v;
  return cfg;
}

ScenarioConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError(path.string(), "cannot open config");
  return parse_config(in);
}

ModeSpace build_modes(const ScenarioConfig& cfg) {
  if (cfg.weights == "homogeneous") return ModeSpace::homogeneous_sobolev(cfg.k_values, cfg.exponent);
  if (cfg.weights == "inhomogeneous") return ModeSpace::inhomogeneous_sobolev(cfg.k_values, cfg.exponent);
  std::vector<double> omega;
  for (double k : cfg.k_values) omega.push_back(std::abs(k) > 0.0 ? std::abs(k) : 1.0);
  return ModeSpace::unit(cfg.n_modes()).with_omega(omega);
}

StateFamily build_family(const ScenarioConfig& cfg) {
  const ModeSpace modes = build_modes(cfg);
  StateFamily family = [&] {
    if (cfg.state == "vacuum") return StateFamily::vacuum(modes, cfg.h_list);
    if (cfg.state == "coherent") return StateFamily::coherent(modes, cfg.amplitude, cfg.h_list);
    return StateFamily::divergent(modes, cfg.amplitude, cfg.divergence_mode, cfg.epsilon, cfg.h_list);
  }();
  family.set_truncation(cfg.leak_threshold, cfg.n_max);
  return family;
}

ResourceEstimate estimate_resources(const ScenarioConfig& cfg) {
  const StateFamily family = build_family(cfg);
  const double count = static_cast<double>(cfg.R_list.back() + 1);
  ResourceEstimate est{std::pow(static_cast<double>(cfg.grid_points), 2.0 * count), 0.0};
  const double per_mode = cfg.leak_threshold / static_cast<double>(cfg.n_modes());
  for (double h : cfg.h_list) {
    const PhasePoint f = family.amplitude(h);
    double dim = 0.0;
    for (std::size_t j = 0; j < f.size(); ++j) {
      dim += 1.0 + (cfg.n_max ? *cfg.n_max : poisson_cutoff(std::norm(f[j]) / h, per_mode));
    }
    est.fock_dim = std::max(est.fock_dim, dim);
  }
  return est;
}

namespace {

std::vector<PhasePoint> gf_test_grid(std::size_t count) {
  std::vector<PhasePoint> out;
  for (int k = 0; k < 5; ++k) {
    PhasePoint phi(count);
    phi[static_cast<std::size_t>(k) % count] = std::polar(0.4 * (k + 1), 2.0 * kPi * k / 5.0);
    out.push_back(phi);
  }
  return out;
}

}  // namespace

ScenarioReport run_scenario(const ScenarioConfig& cfg, const ProgressFn& progress) {
  auto say = [&](const std::string& msg) {
    if (progress) progress(msg);
  };
  const ResourceEstimate est = estimate_resources(cfg);
  if (est.grid_cells > cfg.max_cells) {
    throw ResourceError("extraction grid has " + std::to_string(est.grid_cells) + " cells (limit " +
                            std::to_string(cfg.max_cells) + ")",
                        est.grid_cells);
  }
  if (est.fock_dim > cfg.max_fock_dim) {
    throw ResourceError("state needs " + std::to_string(est.fock_dim) + " Fock coefficients (limit " +
                            std::to_string(cfg.max_fock_dim) + ")",
                        est.fock_dim);
  }
  const ExecPolicy policy = cfg.parallel ? ExecPolicy::parallel : ExecPolicy::serial;
  const StateFamily family = build_family(cfg);
  const ModeSpace& modes = family.modes();

  ScenarioReport rep;
  rep.config = cfg.echo;
  rep.execution = cfg.parallel ? "parallel" : "serial";
  rep.gf_tolerance = cfg.gf_tolerance;

  VerdictOptions opts;
  opts.delta = cfg.delta;
  opts.K_input = cfg.K_input;
  opts.r_list = cfg.r_list;
  opts.R_list = cfg.R_list;
  opts.slack = cfg.slack;
  opts.moment_tolerance = cfg.moment_tolerance;
  opts.consistency_tolerance = cfg.consistency_tolerance;
  opts.grid.points = cfg.grid_points;
  opts.grid.n_sigma = cfg.n_sigma;

  say("concentration verdict");
  rep.concentration = concentration_verdict(family, opts, policy);
  if (cfg.compare_number_operator) {
    say("hypothesis check with the number operator");
    rep.comparison = check_hypothesis(family, MomentOperator::number(modes.n_modes()), "number", opts, policy);
  }
  const bool hyp_ok = rep.concentration.verdict != Verdict::hypothesis_failed;
  if (hyp_ok && family.size() >= 3) {
    say("limit diagnostics");
    rep.concentration.diagnostics = limit_measure(family, cfg.R_list.front() + 1, opts.grid, policy).diagnostics;
  }

  bool ok = rep.concentration.verdict == Verdict::pass;
  const std::size_t count = cfg.R_list.back() + 1;
  {
    say("generating functional samples");
    const std::size_t last = family.size() - 1;
    GeneratingFunctional G(family.materialize(last), modes, false, policy);
    const PhasePoint f = family.limit_amplitude().head(count);
    for (const auto& phi : gf_test_grid(count)) {
      const GFValue g = G(0.5 * phi);
      const cplx limit = std::polar(1.0, inner(phi, f).real());
      const double diff = std::abs(g.value - limit);
      rep.gf_samples.push_back({phi, g.value, limit, diff, g.leak});
      if (hyp_ok) ok = ok && diff <= cfg.gf_tolerance;
    }
  }

  PushforwardOptions popts;
  popts.grid = opts.grid;
  popts.delta = cfg.delta;
  for (double t : cfg.t_list) {
    say("pushforward check at t = " + std::to_string(t));
    DynamicsEntry e;
    e.report = pushforward_check(family, t, count, popts, policy);
    e.fourier_tolerance = cfg.fourier_tolerance;
    e.covariance_bound = cfg.covariance_factor * e.report.leak;
    e.invariance_tolerance = cfg.invariance_tolerance;
    e.pass = e.report.fourier_sup <= e.fourier_tolerance && e.report.covariance_residual <= e.covariance_bound &&
             e.report.moment_residual <= e.invariance_tolerance;
    ok = ok && e.pass;
    rep.dynamics.push_back(std::move(e));
  }

  if (!hyp_ok) {
    rep.exit_code = 2;
  } else {
    rep.exit_code = ok ? 0 : 1;
  }
  return rep;
}

// ---- JSON ----------------------------------------------------------------

namespace {

using nlohmann::json;

json cj(cplx z) { return json::array({z.real(), z.imag()}); }
cplx jc(const json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

json pj(const PhasePoint& p) {
  json a = json::array();
  for (cplx z : p) a.push_back(cj(z));
  return a;
}
PhasePoint jp(const json& j) {
  std::vector<cplx> v;
  for (const auto& e : j) v.push_back(jc(e));
  return PhasePoint(std::move(v));
}

template <class T, class F>
json opt(const std::optional<T>& v, F&& f) {
  return v ? f(*v) : json(nullptr);
}
template <class T, class F>
std::optional<T> jopt(const json& j, F&& f) {
  if (j.is_null()) return std::nullopt;
  return f(j);
}

json atom_json(const AtomCheck& a) { return {{"radius", a.radius}, {"fraction", a.fraction}, {"atomic", a.atomic}}; }
AtomCheck json_atom(const json& j) {
  return {j.at("radius").get<double>(), j.at("fraction").get<double>(), j.at("atomic").get<bool>()};
}

json hypothesis_json(const HypothesisReport& h) {
  return {{"operator", h.operator_name},
          {"table", {{"h", h.table.h}, {"moment", h.table.moment}, {"sup", h.table.sup}}},
          {"K_input", h.K_input},
          {"tolerance", h.tolerance},
          {"slope", h.slope},
          {"growth_slope", h.growth_slope},
          {"passed", h.passed},
          {"reason", h.reason}};
}
HypothesisReport json_hypothesis(const json& j) {
  HypothesisReport h;
  h.operator_name = j.at("operator").get<std::string>();
  h.table.h = j.at("table").at("h").get<std::vector<double>>();
  h.table.moment = j.at("table").at("moment").get<std::vector<double>>();
  h.table.sup = j.at("table").at("sup").get<double>();
  h.K_input = j.at("K_input").get<double>();
  h.tolerance = j.at("tolerance").get<double>();
  h.slope = j.at("slope").get<double>();
  h.growth_slope = j.at("growth_slope").get<double>();
  h.passed = j.at("passed").get<bool>();
  h.reason = j.at("reason").get<std::string>();
  return h;
}

json quotient_json(const QuotientReport& q) {
  json tails = json::array();
  for (const auto& t : q.tails) tails.push_back({{"r", t.r}, {"tail", t.tail}, {"bound", t.bound}, {"pass", t.pass}});
  return {{"R", q.R},
          {"mass", q.mass},
          {"mass_deficit", q.mass_deficit},
          {"tails", tails},
          {"fitted_K", q.fitted_K},
          {"q_moment", q.q_moment},
          {"moment_bound", q.moment_bound},
          {"moment_pass", q.moment_pass},
          {"holder", q.holder},
          {"holder_bound", q.holder_bound},
          {"holder_pass", q.holder_pass},
          {"atom", opt(q.atom, atom_json)}};
}
QuotientReport json_quotient(const json& j) {
  QuotientReport q;
  q.R = j.at("R").get<std::size_t>();
  q.mass = j.at("mass").get<double>();
  q.mass_deficit = j.at("mass_deficit").get<double>();
  for (const auto& t : j.at("tails")) {
    q.tails.push_back({t.at("r").get<double>(), t.at("tail").get<double>(), t.at("bound").get<double>(),
                       t.at("pass").get<bool>()});
  }
  q.fitted_K = j.at("fitted_K").get<double>();
  q.q_moment = j.at("q_moment").get<double>();
  q.moment_bound = j.at("moment_bound").get<double>();
  q.moment_pass = j.at("moment_pass").get<bool>();
  q.holder = j.at("holder").get<double>();
  q.holder_bound = j.at("holder_bound").get<double>();
  q.holder_pass = j.at("holder_pass").get<bool>();
  q.atom = jopt<AtomCheck>(j.at("atom"), json_atom);
  return q;
}

json consistency_json(const ConsistencyReport& c) {
  return {{"distances", c.distances},
          {"tolerance", c.tolerance},
          {"pass", c.pass},
          {"first_failure", opt(c.first_failure, [](std::size_t i) { return json(i); })}};
}
ConsistencyReport json_consistency(const json& j) {
  ConsistencyReport c;
  c.distances = j.at("distances").get<std::vector<double>>();
  c.tolerance = j.at("tolerance").get<double>();
  c.pass = j.at("pass").get<bool>();
  c.first_failure = jopt<std::size_t>(j.at("first_failure"), [](const json& v) { return v.get<std::size_t>(); });
  return c;
}

json cmatrix(const std::vector<std::vector<cplx>>& m) {
  json a = json::array();
  for (const auto& row : m) {
    json r = json::array();
    for (cplx z : row) r.push_back(cj(z));
    a.push_back(r);
  }
  return a;
}
std::vector<std::vector<cplx>> jcmatrix(const json& j) {
  std::vector<std::vector<cplx>> m;
  for (const auto& row : j) {
    std::vector<cplx> r;
    for (const auto& z : row) r.push_back(jc(z));
    m.push_back(std::move(r));
  }
  return m;
}

json diagnostics_json(const LimitDiagnostics& d) {
  json freqs = json::array();
  for (const auto& p : d.test_frequencies) freqs.push_back(pj(p));
  json extrap = json::array();
  for (cplx z : d.characteristic_extrapolated) extrap.push_back(cj(z));
  json battery = json::array();
  for (const auto& t : d.battery) battery.push_back({{"center", cj(t.center)}, {"width", t.width}});
  return {{"h", d.h},
          {"mass_deficit", d.mass_deficit},
          {"test_frequencies", freqs},
          {"characteristic", cmatrix(d.characteristic)},
          {"characteristic_extrapolated", extrap},
          {"battery", battery},
          {"weyl_values", d.weyl_values},
          {"weyl_extrapolated", d.weyl_extrapolated},
          {"residuals", d.residuals},
          {"cauchy", d.cauchy}};
}
LimitDiagnostics json_diagnostics(const json& j) {
  LimitDiagnostics d;
  d.h = j.at("h").get<std::vector<double>>();
  d.mass_deficit = j.at("mass_deficit").get<std::vector<double>>();
  for (const auto& p : j.at("test_frequencies")) d.test_frequencies.push_back(jp(p));
  d.characteristic = jcmatrix(j.at("characteristic"));
  for (const auto& z : j.at("characteristic_extrapolated")) d.characteristic_extrapolated.push_back(jc(z));
  for (const auto& t : j.at("battery")) d.battery.push_back({jc(t.at("center")), t.at("width").get<double>()});
  d.weyl_values = j.at("weyl_values").get<std::vector<std::vector<double>>>();
  d.weyl_extrapolated = j.at("weyl_extrapolated").get<std::vector<double>>();
  d.residuals = j.at("residuals").get<std::vector<std::vector<double>>>();
  d.cauchy = j.at("cauchy").get<bool>();
  return d;
}

Verdict json_verdict(const std::string& s) {
  if (s == "pass") return Verdict::pass;
  if (s == "fail") return Verdict::fail;
  if (s == "hypothesis_failed") return Verdict::hypothesis_failed;
  throw ConfigError("concentration.verdict", "unknown verdict '" + s + "'");
}

json dynamics_json(const DynamicsEntry& e) {
  const PushforwardReport& p = e.report;
  json freqs = json::array();
  for (const auto& f : p.test_frequencies) freqs.push_back(pj(f));
  return {{"t", p.t},
          {"h", p.h},
          {"test_frequencies", freqs},
          {"fourier_sup", p.fourier_sup},
          {"fourier_tolerance", e.fourier_tolerance},
          {"tv", p.tv},
          {"covariance_residual", p.covariance_residual},
          {"leak", p.leak},
          {"covariance_bound", e.covariance_bound},
          {"moment_residual", p.moment_residual},
          {"invariance_tolerance", e.invariance_tolerance},
          {"atom", opt(p.atom, atom_json)},
          {"pass", e.pass}};
}
DynamicsEntry json_dynamics(const json& j) {
  DynamicsEntry e;
  PushforwardReport& p = e.report;
  p.t = j.at("t").get<double>();
  p.h = j.at("h").get<double>();
  for (const auto& f : j.at("test_frequencies")) p.test_frequencies.push_back(jp(f));
  p.fourier_sup = j.at("fourier_sup").get<double>();
  e.fourier_tolerance = j.at("fourier_tolerance").get<double>();
  p.tv = j.at("tv").get<double>();
  p.covariance_residual = j.at("covariance_residual").get<double>();
  p.leak = j.at("leak").get<double>();
  e.covariance_bound = j.at("covariance_bound").get<double>();
  p.moment_residual = j.at("moment_residual").get<double>();
  e.invariance_tolerance = j.at("invariance_tolerance").get<double>();
  p.atom = jopt<AtomCheck>(j.at("atom"), json_atom);
  e.pass = j.at("pass").get<bool>();
  return e;
}

}  // namespace

std::string report_to_json(const ScenarioReport& r) {
  json config = json::array();
  for (const auto& [section, entries] : r.config) {
    json e = json::array();
    for (const auto& [k, v] : entries) e.push_back(json::array({k, v}));
    config.push_back({{"section", section}, {"entries", e}});
  }
  const ConcentrationReport& c = r.concentration;
  json quotients = json::array();
  for (const auto& q : c.quotients) quotients.push_back(quotient_json(q));
  json concentration = {{"delta", c.delta},
                        {"slack", c.slack},
                        {"moment_tolerance", c.moment_tolerance},
                        {"hypothesis", hypothesis_json(c.hypothesis)},
                        {"quotients", quotients},
                        {"consistency", opt(c.consistency, consistency_json)},
                        {"diagnostics", opt(c.diagnostics, diagnostics_json)},
                        {"verdict", to_string(c.verdict)}};
  json samples = json::array();
  for (const auto& s : r.gf_samples) {
    samples.push_back({{"phi", pj(s.phi)},
                       {"value", cj(s.value)},
                       {"limit", cj(s.limit)},
                       {"difference", s.difference},
                       {"leak", s.leak}});
  }
  json doc = {{"schema", r.schema},
              {"version", r.version},
              {"tool_version", r.tool_version},
              {"config", config},
              {"execution", r.execution},
              {"concentration", concentration},
              {"comparison", opt(r.comparison, hypothesis_json)},
              {"generating_functional", {{"tolerance", r.gf_tolerance}, {"samples", samples}}},
              {"exit_code", r.exit_code}};
  if (!r.dynamics.empty()) {
    json dyn = json::array();
    for (const auto& e : r.dynamics) dyn.push_back(dynamics_json(e));
    doc["dynamics"] = dyn;
  }
  return doc.dump(2) + "\n";
}

ScenarioReport report_from_json(const std::string& text) {
  try {
    const json doc = json::parse(text);
    ScenarioReport r;
    r.schema = doc.at("schema").get<std::string>();
    r.version = doc.at("version").get<int>();
    if (r.schema != "wigner.report" || r.version != 1) throw ConfigError("schema", "unsupported report schema");
    r.tool_version = doc.at("tool_version").get<std::string>();
    for (const auto& s : doc.at("config")) {
      std::vector<std::pair<std::string, std::string>> entries;
      for (const auto& e : s.at("entries")) entries.emplace_back(e.at(0).get<std::string>(), e.at(1).get<std::string>());
      r.config.emplace_back(s.at("section").get<std::string>(), std::move(entries));
    }
    r.execution = doc.at("execution").get<std::string>();
    const json& c = doc.at("concentration");
    r.concentration.delta = c.at("delta").get<double>();
    r.concentration.slack = c.at("slack").get<double>();
    r.concentration.moment_tolerance = c.at("moment_tolerance").get<double>();
    r.concentration.hypothesis = json_hypothesis(c.at("hypothesis"));
    for (const auto& q : c.at("quotients")) r.concentration.quotients.push_back(json_quotient(q));
    r.concentration.consistency = jopt<ConsistencyReport>(c.at("consistency"), json_consistency);
    r.concentration.diagnostics = jopt<LimitDiagnostics>(c.at("diagnostics"), json_diagnostics);
    r.concentration.verdict = json_verdict(c.at("verdict").get<std::string>());
    r.comparison = jopt<HypothesisReport>(doc.at("comparison"), json_hypothesis);
    const json& g = doc.at("generating_functional");
    r.gf_tolerance = g.at("tolerance").get<double>();
    for (const auto& s : g.at("samples")) {
      r.gf_samples.push_back({jp(s.at("phi")), jc(s.at("value")), jc(s.at("limit")), s.at("difference").get<double>(),
                              s.at("leak").get<double>()});
    }
    if (doc.contains("dynamics")) {
      for (const auto& e : doc.at("dynamics")) r.dynamics.push_back(json_dynamics(e));
    }
    r.exit_code = doc.at("exit_code").get<int>();
    return r;
  } catch (const json::exception& e) {
    throw ConfigError("report", e.what());
  }
}

namespace {

void write_file(const std::filesystem::path& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError(path.string(), "cannot open for writing");
  out << content;
  if (!out) throw IoError(path.string(), "write failed");
}

std::string num(double x) {
  std::ostringstream s;
  s << std::setprecision(17) << x;
  return s.str();
}

std::string phase_point_text(const PhasePoint& p) {
  std::string s;
  for (std::size_t j = 0; j < p.size(); ++j) {
    if (j) s += ' ';
    s += num(p[j].real()) + (p[j].imag() < 0 ? "" : "+") + num(p[j].imag()) + "i";
  }
  return s;
}

}  // namespace

void emit_report(const ScenarioReport& report, const std::filesystem::path& dir, double wall_seconds) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw IoError(dir.string(), ec.message());
  write_file(dir / "report.json", report_to_json(report));

  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::ostringstream stamp;
  stamp << std::put_time(std::gmtime(&now), "%Y-%m-%dT%H:%M:%SZ");
  const nlohmann::json meta = {
      {"tool_version", report.tool_version}, {"wall_time_seconds", wall_seconds}, {"timestamp", stamp.str()}};
  write_file(dir / "metadata.json", meta.dump(2) + "\n");

  std::ostringstream tails;
  tails << "R,r,tail,bound,pass\n";
  for (const auto& q : report.concentration.quotients) {
    for (const auto& t : q.tails) {
      tails << q.R << ',' << num(t.r) << ',' << num(t.tail) << ',' << num(t.bound) << ',' << (t.pass ? 1 : 0) << '\n';
    }
  }
  write_file(dir / "tails.csv", tails.str());

  std::ostringstream moments;
  moments << "operator,h,moment\n";
  auto table = [&](const HypothesisReport& h) {
    for (std::size_t i = 0; i < h.table.h.size(); ++i) {
      moments << h.operator_name << ',' << num(h.table.h[i]) << ',' << num(h.table.moment[i]) << '\n';
    }
  };
  table(report.concentration.hypothesis);
  if (report.comparison) table(*report.comparison);
  write_file(dir / "moments.csv", moments.str());

  std::ostringstream gf;
  gf << "phi,value_re,value_im,limit_re,limit_im,difference,leak\n";
  for (const auto& s : report.gf_samples) {
    gf << phase_point_text(s.phi) << ',' << num(s.value.real()) << ',' << num(s.value.imag()) << ','
       << num(s.limit.real()) << ',' << num(s.limit.imag()) << ',' << num(s.difference) << ',' << num(s.leak) << '\n';
  }
  write_file(dir / "generating_functional.csv", gf.str());
}

}  // namespace wigner
