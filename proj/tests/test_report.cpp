#include "pmcv/analysis.hpp"
#include "pmcv/catalog.hpp"
#include "pmcv/errors.hpp"
#include "pmcv/report.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <sstream>

using namespace pmcv;

TEST_CASE("deterministic dump prints full precision and nulls") {
  nlohmann::ordered_json j;
  j["b"] = 0.1;
  j["a"] = std::numeric_limits<double>::quiet_NaN();
  j["c"] = nlohmann::ordered_json::array({1, 2.5, "x", true});
  j["d"] = nlohmann::ordered_json::object();
  const std::string s = dump_deterministic(j, 0);
  CHECK(s == R"({"b":0.10000000000000001,"a":null,"c":[1,2.5,"x",true],"d":{}})");
  const auto back = nlohmann::json::parse(dump_deterministic(j));
  CHECK(back["b"].get<double>() == 0.1);
  CHECK(back["a"].is_null());
}

TEST_CASE("matrices round-trip and malformed input is rejected") {
  Eigen::MatrixXd m(2, 3);
  m << 1, 2, 3, 4, 5, 6.25;
  const auto j = matrix_to_json(m);
  CHECK(matrix_from_json(nlohmann::json::parse(j.dump())) == m);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[]")), DomainError);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("[[1,2],[3]]")), DomainError);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse(R"([[1,"a"]])")), DomainError);
  CHECK_THROWS_AS(matrix_from_json(nlohmann::json::parse("{}")), DomainError);
}

TEST_CASE("two curvature values serialize by kind") {
  const auto real = to_json(two_curvature_values(4, 1, 1.0, 1, 4.0, -1));
  CHECK(real.contains("mu2"));
  CHECK_FALSE(real.contains("gamma2"));
  const auto imag = to_json(two_curvature_values(4, 2, -1.0, 1, 1.0, 1, CurvatureKind::kImaginary));
  CHECK(imag["kind"] == "imaginary");
  CHECK(imag.contains("tau2"));
  const auto single = to_json(two_curvature_values(3, 3, 1.0, 1, 6.0, 1));
  CHECK(dump_deterministic(single).find("\"nu2\": null") != std::string::npos);
}

TEST_CASE("report layout and grid csv") {
  InstanceDescriptor d;
  d.example_id = "umbilical";
  d.n = 2;
  d.curvature = 1.0;
  d.mu_or_theta = 0.5;
  d.grid = {3, 3};
  const auto inst = build_instance(d);
  const auto grid = instance_grid(inst, d);
  const auto r = full_report(inst.immersion, grid);
  const auto j = report_to_json(r, d, inst, grid);
  std::vector<std::string> keys;
  for (auto it = j.begin(); it != j.end(); ++it) keys.push_back(it.key());
  const std::vector<std::string> expected{"instance", "grid", "extrinsic_summary", "spectrum", "pmcv", "theorems", "checks"};
  CHECK(keys == expected);
  CHECK(j["theorems"].contains("t33"));
  CHECK(j["theorems"].contains("t35"));
  CHECK(j["theorems"].contains("t45_t46"));
  CHECK(j["grid"]["points"] == 9);
  const auto back = descriptor_from_json(nlohmann::json::parse(j["instance"].dump()));
  CHECK(to_json(back).dump() == to_json(d).dump());
  CHECK(dump_deterministic(j) == dump_deterministic(report_to_json(full_report(inst.immersion, grid), d, inst, grid)));

  std::ostringstream csv;
  write_grid_csv(csv, r);
  std::istringstream in(csv.str());
  std::string line;
  std::getline(in, line);
  CHECK(line == "u1,u2,H,c0,c1,c2");
  int rows = 0;
  while (std::getline(in, line)) ++rows;
  CHECK(rows == 9);
}
