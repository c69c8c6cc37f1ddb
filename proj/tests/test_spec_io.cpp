#include "pollnet/spec_io.hpp"

#include <cmath>

#include "doctest.h"
#include "pollnet/branching.hpp"
#include "pollnet/errors.hpp"
#include "pollnet/fluid.hpp"
#include "support/test_specs.hpp"

using namespace pollnet;
using namespace pollnet::testing;

namespace {

const char* kReferenceJson = R"({
  "n": 3,
  "lambda": [1.0, 1.0, 1.0],
  "service": [
    {"kind": "exponential", "params": {"rate": 8.0}},
    {"kind": "exponential", "params": {"rate": 5.0}},
    {"kind": "exponential", "params": {"rate": 2.0}}
  ],
  "routing": [[0.1, 0.25, 0.2], [0.2, 0.1, 0.2], [0.2, 0.1, 0.25]],
  "gating": [
    {"pmf": [{"k": "inf", "p": 1.0}]},
    {"pmf": [{"k": "inf", "p": 1.0}]},
    {"pmf": [{"k": 1, "p": 0.25}, {"k": 2, "p": 0.75}]}
  ],
  "sim": {"seed": 7, "horizon": 120.5, "record_grid": [0.0, 1.0, 2.0]}
})";

}  // namespace

TEST_CASE("spec documents parse into the expected model") {
  const NetworkSpec s = parse_spec_json(kReferenceJson);
  CHECK(s.n == 3);
  CHECK(s.lambda == Vec{1.0, 1.0, 1.0});
  CHECK(s.service[0].kind == ServiceDistribution::Kind::Exponential);
  CHECK(s.service[2].mean() == doctest::Approx(0.5));
  CHECK(s.routing(0, 1) == 0.25);
  CHECK(s.exit_prob(1) == doctest::Approx(0.5));
  CHECK(s.gating[0].is_exhaustive());
  CHECK(s.gating[2].pmf().at(1) == doctest::Approx(0.25));
  CHECK(validate(s).ok());

  const SimConfig cfg = parse_sim_config_json(kReferenceJson);
  CHECK(cfg.seed == 7);
  CHECK(cfg.horizon == doctest::Approx(120.5));
  CHECK(cfg.record_grid.size() == 3);
}

TEST_CASE("round trip: emitted documents reproduce identical analysis numbers") {
  RngStream rng(2);
  for (int rep = 0; rep < 10; ++rep) {
    const NetworkSpec a = random_valid_spec(rng);
    const NetworkSpec b = parse_spec_json(spec_to_json(a));
    const auto da = derive(a);
    const auto db = derive(b);
    CHECK(da.rho == db.rho);
    for (int i = 0; i < a.n; ++i) {
      CHECK(da.gamma[i] == db.gamma[i]);
      CHECK(da.f[i] == db.f[i]);
      CHECK(da.t[i] == db.t[i]);
    }
    const double ta = perron(build_matrices(da, a).M).theta;
    const double tb = perron(build_matrices(db, b).M).theta;
    CHECK(ta == tb);
  }
}

TEST_CASE("schema violations carry a field path") {
  CHECK_THROWS_AS(parse_spec_json("{nonsense"), ParseError);
  CHECK_THROWS_WITH_AS(parse_spec_json("[1,2]"), "$: root must be an object", ParseError);

  auto expect_path = [](const std::string& doc, const char* needle) {
    try {
      parse_spec_json(doc);
      FAIL_CHECK("expected a ParseError for " << needle);
    } catch (const ParseError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect_path(R"({"n": "three"})", "$.n");
  expect_path(R"({"n": 2, "lambda": [1.0]})", "$.lambda");
  expect_path(R"({"n": 2, "lambda": [1.0, -1.0]})", "$.lambda[1]");
  expect_path(R"({"n": 2, "lambda": [1, 1],
                  "service": [{"kind": "exponential", "params": {"rate": 0}},
                              {"kind": "exponential", "params": {"rate": 1}}]})",
              "$.service[0].params.rate");
  expect_path(R"({"n": 2, "lambda": [1, 1],
                  "service": [{"kind": "pareto", "params": {}},
                              {"kind": "exponential", "params": {"rate": 1}}]})",
              "$.service[0].kind");
  expect_path(R"({"n": 2, "lambda": [1, 1],
                  "service": [{"kind": "exponential", "params": {"rate": 9}},
                              {"kind": "exponential", "params": {"rate": 9}}],
                  "routing": [[0.2, 1.2], [0.0, 0.0]]})",
              "$.routing[0][1]");
  expect_path(R"({"n": 2, "lambda": [1, 1],
                  "service": [{"kind": "exponential", "params": {"rate": 9}},
                              {"kind": "exponential", "params": {"rate": 9}}],
                  "routing": [[0.1, 0.2], [0.0, 0.0]],
                  "gating": [{"pmf": [{"k": 0, "p": 1.0}]}, {"pmf": [{"k": 1, "p": 1.0}]}]})",
              "$.gating[0].pmf[0].k");
}

TEST_CASE("doubles format to shortest round-trip decimals") {
  CHECK(format_double(0.5) == "0.5");
  CHECK(format_double(1.0) == "1");
  CHECK(format_double(1.0 / 3.0) == "0.3333333333333333");
  for (double x : {3.7496900946275864, 1e-17, -2.25, 1234567.875}) {
    double back;
    std::sscanf(format_double(x).c_str(), "%lf", &back);
    CHECK(back == x);
  }
}

TEST_CASE("csv exports carry the grid, per-queue columns and totals") {
  const std::vector<double> grid = {0.0, 1.5};
  const std::vector<Vec> vals = {{1.0, 2.0}, {3.0, 4.5}};
  const std::string csv = trajectory_csv(grid, vals);
  CHECK(csv == "t,x1,x2,total\n0,1,2,3\n1.5,3,4.5,7.5\n");

  const std::string cy = cycles_csv({0.0, 0.25, 2.0});
  CHECK(cy == "n,t_cycle\n1,0\n2,0.25\n3,2\n");
}
