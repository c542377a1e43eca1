// SPDX-FileCopyrightText: 2026 pillfit authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <filesystem>
#include <random>
#include <string>

#include "config.hpp"
#include "doctest.h"
#include "error.hpp"
#include "io.hpp"
#include "run.hpp"

using namespace pillfit;
using doctest::Approx;
namespace fs = std::filesystem;

namespace {

struct TempDir {
  fs::path path;
  TempDir() {
    path = fs::temp_directory_path() /
           ("pillfit_test_" + std::to_string(std::random_device{}()));
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
  std::string operator/(const std::string& name) const {
    return (path / name).string();
  }
};

}  // namespace

TEST_SUITE("io") {

TEST_CASE("CSV rows are flipped to bottom-up") {
  const ElementField f = parse_field_csv("1,0\n0,1\n", "mem");
  CHECK(f.nx == 2);
  CHECK(f.ny == 2);
  CHECK(f.at(0, 0) == 0.0);  // bottom-left
  CHECK(f.at(0, 1) == 1.0);  // top-left
  CHECK(f.at(1, 0) == 1.0);
}

TEST_CASE("ragged CSV names the row") {
  try {
    parse_field_csv("1,0,1\n0,1\n", "t.csv");
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
  CHECK_THROWS_AS(parse_field_csv("1,x\n", "t.csv"), ParseError);
}

TEST_CASE("P5 and P2 PGM") {
  std::string p5 = "P5\n3 2\n255\n";
  p5.append(6, static_cast<char>(255));
  const ElementField a = parse_field_pgm(p5, "mem");
  CHECK(a.nx == 3);
  CHECK(a.ny == 2);
  for (double v : a.values) CHECK(v == 1.0);

  const ElementField b = parse_field_pgm("P2\n# c\n2 1\n255\n0 51\n", "mem");
  CHECK(b.at(0, 0) == 0.0);
  CHECK(b.at(1, 0) == Approx(0.2));
  CHECK_THROWS_AS(parse_field_pgm("P5\n2 2\n255\n\x01", "mem"), ParseError);
  CHECK_THROWS_AS(parse_field_pgm("P6\n1 1\n255\n\x01", "mem"), ParseError);
}

TEST_CASE("loaded targets are clamped") {
  TempDir dir;
  write_file(dir / "t.csv", "1.5,-0.2\n0.5,0.25\n");
  const ElementField f = load_target(dir / "t.csv");
  CHECK(f.at(0, 1) == 1.0);
  CHECK(f.at(1, 1) == 0.0);
  CHECK(f.at(0, 0) == 0.5);
  CHECK_THROWS_AS(load_target(dir / "missing.csv"), ValidationError);
}

TEST_CASE("PGM quantization") {
  ElementField zero(3, 2);
  const std::string z = field_to_pgm(zero);
  const std::string raster = z.substr(z.size() - 6);
  for (char c : raster) CHECK(static_cast<unsigned char>(c) == 0);

  const std::string mid = field_to_pgm(zero, -1.0, 1.0);
  for (char c : mid.substr(mid.size() - 6)) {
    CHECK(static_cast<unsigned char>(c) == 128);
  }
  CHECK(field_to_csv(zero) == "0,0,0\n0,0,0\n");
}

TEST_CASE("CSV and PGM agree up to quantization") {
  ElementField f(7, 5);
  for (size_t k = 0; k < f.values.size(); ++k) f.values[k] = std::fmod(0.137 * k, 1.0);
  const ElementField c = parse_field_csv(field_to_csv(f), "csv");
  const ElementField p = parse_field_pgm(field_to_pgm(f), "pgm");
  for (size_t k = 0; k < f.values.size(); ++k) {
    CHECK(c.values[k] == f.values[k]);
    CHECK(std::abs(p.values[k] - f.values[k]) <= 0.5 / 255 + 1e-12);
  }
}

TEST_CASE("pill table round trip is exact") {
  std::mt19937_64 rng(9);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  DesignVector d;
  for (int k = 0; k < 20; ++k) {
    d.push_back(PillParams(u(rng), u(rng), u(rng) + 1.0, u(rng), 0.01 + u(rng)));
  }
  TempDir dir;
  save_pills_csv(d, dir / "p.csv");
  const DesignVector back = load_pills_csv(dir / "p.csv");
  CHECK(back.to_vector() == d.to_vector());
}

TEST_CASE("pill table errors") {
  CHECK_THROWS_AS(parse_pills_csv("id,px,py,qx,qy,r\n0,0,0,1,0\n", "p"),
                  ParseError);
  CHECK_THROWS_AS(
      parse_pills_csv("id,px,py,qx,qy,r\n0,0,0,1,0,0.1\n0,0,0,1,0,0.1\n", "p"),
      ParseError);
  CHECK_THROWS_AS(parse_pills_csv("id,px,py,qx,qy,r\n0,0,0,1,0,-1\n", "p"),
                  ParseError);
  CHECK(parse_pills_csv("id,px,py,qx,qy,r\n", "p").empty());
}

TEST_CASE("synthetic targets") {
  GridSpec g;
  g.nx = g.ny = 30;
  const TransitionSpec ts;
  const ElementField empty = generate_target(DesignVector(), g, ts);
  for (double v : empty.values) CHECK(v == 0.0);

  const PillParams a(0.1, 0.2, 0.4, 0.2, 0.06);
  const PillParams b(0.5, 0.7, 0.9, 0.8, 0.06);
  const ElementField fa = generate_target(DesignVector({a}), g, ts);
  const ElementField fb = generate_target(DesignVector({b}), g, ts);
  const ElementField both = generate_target(DesignVector({a, b}), g, ts);
  const ElementField own =
      project_field(DesignVector({a}), ts, AggregatorSpec::sum(), g);
  for (size_t k = 0; k < both.values.size(); ++k) {
    CHECK(both.values[k] == Approx(std::max(fa.values[k], fb.values[k])));
    CHECK(fa.values[k] == Approx(own.values[k]));
  }
}

TEST_CASE("trace is strictly increasing") {
  ModelSettings ms;
  ms.grid.nx = ms.grid.ny = 30;
  ms.constraints = ConstraintSet::for_grid(ms.grid, 0.05, 0.05);
  const DesignVector truth({PillParams(0.2, 0.3, 0.7, 0.6, 0.1)});
  const ElementField target = generate_target(truth, ms.grid, ms.tspec);
  const StagedResult r = run_staged(
      target, DesignVector({PillParams(0.3, 0.3, 0.6, 0.5, 0.08)}),
      default_stages(), ms);
  for (size_t k = 1; k < r.trace.size(); ++k) {
    CHECK(r.trace[k].eval_index > r.trace[k - 1].eval_index);
  }
  const std::string csv = trace_to_csv(r.trace);
  CHECK(csv.rfind("eval_index,objective,stage\n", 0) == 0);
}

}

TEST_SUITE("config") {

TEST_CASE("defaults follow the desk preset") {
  const RunConfig c;
  CHECK(c.model.grid.quad_order == 3);
  CHECK(c.model.constraints.l_min == 0.05);
  CHECK(c.stages.size() == 3);
  CHECK_NOTHROW(c.validate());
}

TEST_CASE("unknown keys are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"bogus": 1})", "c"), ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"grid": {"nxx": 4}})", "c"),
                  ValidationError);
  try {
    parse_config(R"({"solver": {"hessian": "exact", "tol": 1}})", "c");
    FAIL("expected a validation error");
  } catch (const ValidationError& e) {
    CHECK(std::string(e.what()).find("solver.tol") != std::string::npos);
  }
}

TEST_CASE("malformed JSON is a parse error") {
  CHECK_THROWS_AS(parse_config("{", "c"), ParseError);
}

TEST_CASE("invalid values are rejected") {
  CHECK_THROWS_AS(parse_config(R"({"grid": {"nx": 10}})", "c"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"transition": {"kind": "cubic"}})", "c"),
                  ValidationError);
  CHECK_THROWS_AS(parse_config(R"({"constraints": {"r_min": -1}})", "c"),
                  ValidationError);
  CHECK_THROWS_AS(
      parse_config(R"({"target": {"path": "a.csv", "five_bar": true}})", "c"),
      ValidationError);
}

TEST_CASE("echo is itself a valid config") {
  const RunConfig c = parse_config(R"({
    "grid": {"nx": 40, "ny": 20, "lx": 2.0, "quad_order": 2},
    "transition": {"kind": "tanh", "delta": 0.04},
    "aggregation": {"kind": "softmax", "beta": 12},
    "constraints": {"l_max": 0.8},
    "stages": [{"name": "only", "objective": "tracking", "tol": 1e-5}],
    "heuristics": {"enabled": true, "ar_min": 0.1},
    "refinement": {"enabled": true, "k_max": 2},
    "solver": {"hessian": "lbfgs", "history": 5},
    "seed": 7,
    "target": {"five_bar": true}
  })", "c");
  const std::string echo = config_to_json(c);
  const RunConfig d = parse_config(echo, "echo");
  CHECK(config_to_json(d) == echo);
  CHECK(d.model.grid.nx == 40);
  CHECK(d.stages.size() == 1);
  CHECK(d.seed == 7);
  CHECK(d.heuristics_enabled);
}

}
