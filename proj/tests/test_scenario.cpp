#include <fstream>
#include <json.hpp>
#include <sstream>

#include "support.hpp"
#include "wigner/scenario.hpp"

using namespace wigner;

namespace {

const std::filesystem::path kConfigs = WIGNER_CONFIG_DIR;

ScenarioConfig parse(const std::string& text) {
  std::istringstream in(text);
  return parse_config(in);
}

const char* kMinimal = R"(
[scenario]
name = custom
[modes]
k = 1.0, 2.0
weights = unit
[state]
kind = coherent
amplitude = 0.5, -0.25i
[semiclassical]
h = 0.1, 0.05, 0.02
[grid]
points = 8
)";

std::string with(const std::string& section_line, const std::string& extra) {
  std::string text = kMinimal;
  const auto pos = text.find(section_line);
  REQUIRE(pos != std::string::npos);
  text.insert(pos + section_line.size() + 1, extra + "\n");
  return text;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p);
  std::stringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_SUITE("scenario") {
  TEST_CASE("parse the shipped configs") {
    const auto m = load_config(kConfigs / "massless.ini");
    CHECK(m.name == "massless");
    CHECK(m.k_values == std::vector<double>{0.5, 1.0});
    CHECK(m.amplitude[1] == cplx(0.6, -0.5));
    CHECK(m.R_list == std::vector<std::size_t>{0, 1});
    CHECK_FALSE(m.K_input);
    const auto n = load_config(kConfigs / "negative_sobolev.ini");
    CHECK(n.state == "divergent");
    CHECK(n.compare_number_operator);
    const auto f = load_config(kConfigs / "free_evolution.ini");
    CHECK(f.t_list == std::vector<double>{1.0});
  }

  TEST_CASE("complex literals") {
    const auto c = parse(kMinimal);
    CHECK(c.amplitude[0] == cplx(0.5));
    CHECK(c.amplitude[1] == cplx(0.0, -0.25));
    CHECK(parse(with("[state]", "")).amplitude.size() == 2);
    std::string text = kMinimal;
    text.replace(text.find("0.5, -0.25i"), 11, "+1-2i, 3.5i");
    const auto d = parse(text);
    CHECK(d.amplitude[0] == cplx(1.0, -2.0));
    CHECK(d.amplitude[1] == cplx(0.0, 3.5));
    text.replace(text.find("+1-2i, 3.5i"), 11, "1+2, 2");
    CHECK_THROWS_AS(parse(text), ConfigError);
  }

  TEST_CASE("strict schema") {
    CHECK_THROWS_AS(parse(with("[grid]", "colour = red")), ConfigError);
    CHECK_THROWS_AS(parse(std::string(kMinimal) + "[extras]\nx = 1\n"), ConfigError);
    std::string bad_h = kMinimal;
    bad_h.replace(bad_h.find("0.1, 0.05, 0.02"), 15, "0.05, 0.1, 0.02");
    CHECK_THROWS_AS(parse(bad_h), ConfigError);
    CHECK_THROWS_AS(parse(with("[grid]", "n_sigma = x")), ConfigError);
    try {
      load_config(WIGNER_TEST_DATA "/unknown_key.ini");
      FAIL("expected a config error");
    } catch (const ConfigError& e) {
      CHECK(e.path() == "semiclassical.hbar");
    }
    std::string neg = kMinimal;
    neg.replace(neg.find("weights = unit"), 14, "weights = inhomogeneous\nexponent = 0.5");
    CHECK_THROWS_AS(parse(neg), ConfigError);
    CHECK_THROWS_AS(load_config("/nonexistent/scenario.ini"), IoError);
  }

  TEST_CASE("config echo reproduces the input") {
    const auto c = parse(with("[grid]", "n_sigma = 6.5"));
    REQUIRE(c.echo.size() == 5);
    CHECK(c.echo[0].first == "scenario");
    CHECK(c.echo[3].second[0] == std::make_pair(std::string("h"), std::string("0.1, 0.05, 0.02")));
    CHECK(c.echo[4].second[0] == std::make_pair(std::string("n_sigma"), std::string("6.5")));
    CHECK(c.echo[4].second[1] == std::make_pair(std::string("points"), std::string("8")));
  }

  TEST_CASE("resource guard") {
    auto c = parse(kMinimal);
    c.R_list = {0, 1};
    const auto est = estimate_resources(c);
    CHECK(est.grid_cells == doctest::Approx(std::pow(8.0, 4.0)));
    c.max_cells = 100;
    CHECK_THROWS_AS(run_scenario(c), ResourceError);
  }

  TEST_CASE("massless scenario") {
    auto cfg = load_config(kConfigs / "massless.ini");
    const auto rep = run_scenario(cfg);
    CHECK(rep.concentration.verdict == Verdict::pass);
    CHECK(rep.exit_code == 0);
    const double q = quadratic_q(build_modes(cfg), cfg.amplitude);
    CHECK(rep.concentration.quotients.back().q_moment == doctest::Approx(q).epsilon(0.05));
    CHECK(rep.dynamics.empty());
    const auto doc = nlohmann::json::parse(report_to_json(rep));
    CHECK_FALSE(doc.contains("dynamics"));
    CHECK(report_from_json(report_to_json(rep)) == rep);
  }

  TEST_CASE("negative sobolev scenario") {
    const auto rep = run_scenario(load_config(kConfigs / "negative_sobolev.ini"));
    CHECK(rep.concentration.verdict == Verdict::pass);
    REQUIRE(rep.comparison);
    CHECK_FALSE(rep.comparison->passed);
    for (const auto& g : rep.gf_samples) CHECK(g.difference <= rep.gf_tolerance);
    CHECK(report_from_json(report_to_json(rep)) == rep);
  }

  TEST_CASE("free evolution scenario") {
    const auto rep = run_scenario(load_config(kConfigs / "free_evolution.ini"));
    REQUIRE(rep.dynamics.size() == 1);
    CHECK(rep.dynamics[0].pass);
    CHECK(nlohmann::json::parse(report_to_json(rep)).contains("dynamics"));
    CHECK(report_from_json(report_to_json(rep)) == rep);
  }

  TEST_CASE("hypothesis failure sets the exit code") {
    auto cfg = load_config(kConfigs / "negative_sobolev.ini");
    cfg.K_input = 1e-3;
    CHECK(run_scenario(cfg).exit_code == 2);
  }

  TEST_CASE("reports are deterministic and written to disk") {
    const auto cfg = load_config(kConfigs / "massless.ini");
    const std::string a = report_to_json(run_scenario(cfg));
    const std::string b = report_to_json(run_scenario(cfg));
    CHECK(a == b);
    const auto dir = std::filesystem::temp_directory_path() / "wigner_scenario_test";
    std::filesystem::remove_all(dir);
    emit_report(run_scenario(cfg), dir, 0.5);
    for (const char* name : {"report.json", "metadata.json", "tails.csv", "moments.csv", "generating_functional.csv"})
      CHECK(std::filesystem::exists(dir / name));
    CHECK(slurp(dir / "report.json") == a);
    CHECK(nlohmann::json::parse(slurp(dir / "metadata.json")).contains("wall_time_seconds"));
    std::filesystem::remove_all(dir);
    const auto blocker = std::filesystem::temp_directory_path() / "wigner_scenario_blocker";
    std::ofstream(blocker) << "x";
    CHECK_THROWS_AS(emit_report(run_scenario(cfg), blocker / "sub", 0.0), IoError);
    std::filesystem::remove(blocker);
  }
}
