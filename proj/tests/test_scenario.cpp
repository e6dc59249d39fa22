#include <cmath>
#include <numbers>
#include <string>

#include "doctest.h"
#include "rou/scenario.hpp"

using namespace rou;
using std::numbers::pi;

namespace {
std::string bundled(const char* file) {
  return std::string(ROU_SCENARIO_DIR) + "/" + file;
}
}  // namespace

TEST_CASE("bundled scenarios load with the expected structure") {
  SUBCASE("single explicit mode") {
    auto sc = load_scenario(bundled("ou_baseline.json"));
    CHECK(sc.name == "ou_baseline");
    REQUIRE(sc.system.modes.size() == 1);
    CHECK(sc.system.modes[0].mu == doctest::Approx(-1.0));
    CHECK(sc.system.modes[0].f == doctest::Approx(1.0));
    CHECK(sc.kernel.alpha() == 0.0);
    CHECK(sc.kernel.r() == doctest::Approx(1.0));
    CHECK(sc.run.paths == 20000);
    CHECK(sc.run.stationary_init);
    CHECK(sc.eigenfunctions.empty());
  }
  SUBCASE("discrete delay acting through the Laplacian") {
    auto sc = load_scenario(bundled("ex53_discrete.json"));
    REQUIRE(sc.system.modes.size() == 4);
    CHECK(sc.kernel.alpha() == doctest::Approx(0.5));
    CHECK(sc.kernel.r() == doctest::Approx(0.1));
    for (const auto& m : sc.system.modes) {
      CHECK(m.m1 == doctest::Approx(m.mu));  // a1 = laplacian
      CHECK(m.m2 == 0.0);
    }
    CHECK(sc.system.modes[0].mu == doctest::Approx(-pi * pi).epsilon(1e-12));
    CHECK(sc.system.modes[0].f == doctest::Approx(1.0));  // first_mode forcing
    CHECK(sc.system.modes[1].f == 0.0);
    CHECK(sc.eigenfunctions.size() == 4);
  }
  SUBCASE("fractional power channel") {
    auto sc = load_scenario(bundled("ex54_fractional.json"));
    REQUIRE(sc.system.modes.size() == 5);
    CHECK(sc.system.modes[0].m1 == doctest::Approx(pi).epsilon(1e-12));
    CHECK(sc.system.modes[1].m1 == doctest::Approx(2.0 * pi).epsilon(1e-12));
    CHECK(sc.kernel.alpha() == doctest::Approx(1.0));
  }
  SUBCASE("distributed exponential kernel") {
    auto sc = load_scenario(bundled("ex52_heat.json"));
    CHECK(sc.kernel.beta().type == BetaKernel::Type::Exponential);
    CHECK(sc.kernel.beta_at(0.0) == doctest::Approx(0.3));
    CHECK(sc.kernel.beta_l1_norm() < 1.0);
    for (const auto& m : sc.system.modes) CHECK(m.m2 == doctest::Approx(m.mu));
  }
  SUBCASE("supercritical distributed kernel") {
    auto sc = load_scenario(bundled("remark51.json"));
    CHECK(sc.kernel.beta().type == BetaKernel::Type::Constant);
    CHECK(sc.kernel.beta_l1_norm() == doctest::Approx(1.5));
  }
}

TEST_CASE("missing required fields are named in the error") {
  const char* text = R"({
    "model": {"type": "modes", "modes": [{"mu": -1.0}]},
    "kernel": {"alpha": 0.5, "beta": {"type": "zero"}}
  })";
  try {
    parse_scenario(text, "t");
    FAIL("expected a validation error");
  } catch (const ScenarioError& e) {
    bool mentions_r = false;
    for (const auto& msg : e.errors())
      if (msg.find("\"r\"") != std::string::npos) mentions_r = true;
    CHECK(mentions_r);
  }
}

TEST_CASE("unknown keys are rejected by name") {
  const char* text = R"({
    "model": {"type": "modes", "modes": [{"mu": -1.0, "ml": 2.0}]},
    "kernel": {"r": 1.0, "alpha": 0.0, "beta": {"type": "zero"}},
    "run": {"dt": 0.01, "T": 1.0, "pathz": 10}
  })";
  try {
    parse_scenario(text, "t");
    FAIL("expected a validation error");
  } catch (const ScenarioError& e) {
    std::string all = e.what();
    CHECK(all.find("ml") != std::string::npos);
    CHECK(all.find("pathz") != std::string::npos);
    CHECK(e.errors().size() >= 2);  // every problem reported, not just the first
  }
}

TEST_CASE("cross-field check: dt must divide r") {
  const char* text = R"({
    "model": {"type": "modes", "modes": [{"mu": -1.0}]},
    "kernel": {"r": 1.0, "alpha": 0.5, "beta": {"type": "zero"}},
    "run": {"dt": 0.3, "T": 1.0}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(text, "t"),
                       doctest::Contains("dt must divide"), ScenarioError);
}

TEST_CASE("beta kernel validation") {
  const char* bad_tab = R"({
    "model": {"type": "modes", "modes": [{"mu": -1.0}]},
    "kernel": {"r": 1.0, "beta": {"type": "tabulated", "values": [1.0]}}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(bad_tab, "t"),
                       doctest::Contains("at least 2"), ScenarioError);
  const char* bad_type = R"({
    "model": {"type": "modes", "modes": [{"mu": -1.0}]},
    "kernel": {"r": 1.0, "beta": {"type": "gaussian"}}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(bad_type, "t"),
                       doctest::Contains("gaussian"), ScenarioError);
}

TEST_CASE("model validation") {
  const char* delta_misuse = R"({
    "model": {"type": "dirichlet_1d", "L": 1.0, "K": 3, "delta": 0.5, "a1": "laplacian"},
    "kernel": {"r": 1.0, "alpha": 0.5, "beta": {"type": "zero"}},
    "forcing": {"type": "first_mode"}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(delta_misuse, "t"),
                       doctest::Contains("delta"), ScenarioError);
  const char* positive_mu = R"({
    "model": {"type": "modes", "modes": [{"mu": 2.0}]},
    "kernel": {"r": 1.0, "beta": {"type": "zero"}}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(positive_mu, "t"),
                       doctest::Contains("mu must be < 0"), ScenarioError);
}

TEST_CASE("forcing validation") {
  const char* table_on_modes = R"({
    "model": {"type": "modes", "modes": [{"mu": -1.0}]},
    "kernel": {"r": 1.0, "beta": {"type": "zero"}},
    "forcing": {"type": "table", "values": [0.0, 1.0, 0.0]}
  })";
  CHECK_THROWS_WITH_AS(parse_scenario(table_on_modes, "t"),
                       doctest::Contains("dirichlet_1d"), ScenarioError);

  // Constant forcing on a Dirichlet model projects to the sine coefficients.
  const char* constant_forcing = R"({
    "model": {"type": "dirichlet_1d", "L": 1.0, "K": 2, "a2": "laplacian"},
    "kernel": {"r": 1.0, "beta": {"type": "constant", "c": 0.2}},
    "forcing": {"type": "constant", "value": 1.0}
  })";
  auto sc = parse_scenario(constant_forcing, "t");
  CHECK(sc.system.modes[0].f ==
        doctest::Approx(2.0 * std::sqrt(2.0) / pi).epsilon(1e-6));
  CHECK(std::abs(sc.system.modes[1].f) < 1e-10);
}

TEST_CASE("name falls back to the file name, JSON name wins") {
  auto sc = load_scenario(bundled("ex52_heat.json"));
  CHECK(sc.name == "ex52_heat");
  auto sc2 = parse_scenario(R"({
    "name": "custom",
    "model": {"type": "modes", "modes": [{"mu": -1.0}]},
    "kernel": {"r": 1.0, "beta": {"type": "zero"}}
  })",
                            "fallback");
  CHECK(sc2.name == "custom");
}

TEST_CASE("unreadable files raise a scenario error") {
  CHECK_THROWS_WITH_AS(load_scenario("/nonexistent/nope.json"),
                       doctest::Contains("cannot open"), ScenarioError);
}
