#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include "geobeam/config.hpp"
#include "geobeam/csv.hpp"
#include "geobeam/grid.hpp"
#include "geobeam/linalg.hpp"
#include "geobeam/sequences.hpp"

using namespace geobeam;

TEST_CASE("line fits") {
  const auto f = fit_line({0, 1, 2, 3}, {1, 3, 5, 7});
  CHECK(f.slope == doctest::Approx(2.0));
  CHECK(f.intercept == doctest::Approx(1.0));
  CHECK(f.slope_stderr == doctest::Approx(0.0));
  const auto g = fit_loglog({1, 2, 4, 8}, {3, 3 * std::sqrt(2.0), 6, 6 * std::sqrt(2.0)});
  CHECK(g.slope == doctest::Approx(0.5));
}

TEST_CASE("kendall tau") {
  CHECK(kendall_tau({1, 2, 3, 4}, {10, 20, 30, 40}) == doctest::Approx(1.0));
  CHECK(kendall_tau({1, 2, 3, 4}, {4, 3, 2, 1}) == doctest::Approx(-1.0));
  CHECK(kendall_tau({1, 2, 3}, {5, 5, 5}) == 0.0);
  // one tie in y: tau-b = (2 - 0) / sqrt(3 * 2)
  CHECK(kendall_tau({1, 2, 3}, {1, 2, 2}) == doctest::Approx(2 / std::sqrt(6.0)));
}

TEST_CASE("power and Lanczos on a diagonal matrix") {
  Eigen::VectorXd d(5);
  d << 1, 0.5, 3, 2, 0.1;
  auto A = [&](const CVec& v) -> CVec { return d.cast<cplx>().cwiseProduct(v); };
  CVec start = CVec::Ones(5);
  const auto p = power_norm(A, A, start, 1e-10, 1000);
  CHECK(p.converged);
  CHECK(p.norm == doctest::Approx(3.0));
  const auto l = lanczos_norm(A, A, start, 1e-10, 100);
  CHECK(l.converged);
  CHECK(l.norm == doctest::Approx(3.0));
  CHECK(l.iterations <= p.iterations);
}

TEST_CASE("Lanczos agrees with a dense SVD") {
  Eigen::MatrixXcd M(12, 12);
  for (int i = 0; i < 12; ++i)
    for (int j = 0; j < 12; ++j) M(i, j) = cplx(std::sin(i * 1.3 + j * 0.7), std::cos(i * j * 0.11));
  const double s = Eigen::JacobiSVD<Eigen::MatrixXcd>(M).singularValues()(0);
  auto A = [&](const CVec& v) -> CVec { return M * v; };
  auto As = [&](const CVec& v) -> CVec { return M.adjoint() * v; };
  CHECK(lanczos_norm(A, As, CVec::Ones(12), 1e-12, 200).norm == doctest::Approx(s).epsilon(1e-10));
}

TEST_CASE("low discrepancy sequences") {
  CHECK(radical_inverse(1, 2) == 0.5);
  CHECK(radical_inverse(3, 2) == 0.75);
  CHECK(radical_inverse(1, 3) == doctest::Approx(1.0 / 3));
  for (int d : {1, 2, 3, 4})
    for (const auto& v : sphere_directions(d, 20)) CHECK(v.norm() == doctest::Approx(1.0));
  CHECK(sphere_directions(1, 2).size() == 2);
  CHECK(normal_quantile(0.5) == doctest::Approx(0.0));
  CHECK(normal_quantile(0.975) == doctest::Approx(1.959964).epsilon(1e-5));
  CHECK(direction_covering_radius(3, 400) < direction_covering_radius(3, 100));
}

TEST_CASE("csv output") {
  CsvTable t({{"t", "1", "time"}, {"norm", "1", "operator norm"}});
  t.add_row({"0.5", format_number(0.25)});
  const auto s = t.str({"run test"});
  CHECK(s.find("# run test") != std::string::npos);
  CHECK(s.find("# t: 1; time") != std::string::npos);
  CHECK(s.find("t,norm\n0.5,0.25\n") != std::string::npos);
  CHECK_THROWS(t.add_row({"1"}));

  const auto path = (std::filesystem::temp_directory_path() / "geobeam_csv_test.csv").string();
  write_atomic(path, s);
  std::ifstream in(path);
  std::stringstream buf;
  buf << in.rdbuf();
  CHECK(buf.str() == s);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove(path);
}

TEST_CASE("ini and json parsing") {
  const auto kv = parse_ini("[manifold]\nkind = torus ; inline\nperiods = 1,2\n[micro]\nrho = 0.6\n");
  CHECK(kv.at("manifold.kind") == "torus");
  CHECK(kv.at("manifold.periods") == "1,2");
  const auto js = parse_json(R"({"manifold": {"kind": "sphere", "dim": 3}, "spectral": {"p": [2, "inf"]}})");
  CHECK(js.at("manifold.kind") == "sphere");
  CHECK(js.at("manifold.dim") == "3");
  const auto cfg = config_from_map(js);
  CHECK(cfg.manifold.dim == 3);
  REQUIRE(cfg.spectral.p_list.size() == 2);
  CHECK(std::isinf(cfg.spectral.p_list[1]));
  CHECK(make_manifold(cfg.manifold).dim() == 3);

  const auto c2 = config_from_map(kv);
  CHECK(c2.manifold.periods == std::vector<double>{1, 2});
  CHECK(c2.micro.rho == doctest::Approx(0.6));
}

TEST_CASE("config validation") {
  auto expect = [](std::map<std::string, std::string> kv, const std::string& needle) {
    try {
      config_from_map(kv);
      FAIL("accepted: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };
  expect({}, "missing key manifold.kind");
  expect({{"manifold.kind", "klein"}}, "manifold.kind");
  expect({{"manifold.kind", "torus"}, {"cover.delta1", "0.3"}, {"cover.delta2", "0.2"}}, "cover.delta1 < cover.delta2");
  expect({{"manifold.kind", "torus"}, {"micro.eps", "0.5"}, {"micro.delta", "0.25"}}, "micro.eps < micro.delta");
  expect({{"manifold.kind", "torus"}, {"quantize.grid_factor", "2"}}, "grid_factor");
  expect({{"manifold.kind", "torus"}, {"dynamics.p", "1"}}, "dynamics.p");
  expect({{"manifold.kind", "torus"}, {"bogus.key", "1"}}, "unknown key bogus.key");
  expect({{"manifold.kind", "torus"}, {"micro.t_grid", "0.1,0"}}, "micro.t_grid");
  CHECK_NOTHROW(config_from_map({{"manifold.kind", "torus"}}));
}

TEST_CASE("shipped configs load") {
  for (const char* f : {"default.ini", "sphere.json", "product.ini"}) {
    const auto cfg = load_config(std::string(GEOBEAM_CONFIG_DIR) + "/" + f);
    CHECK_NOTHROW(make_manifold(cfg.manifold));
  }
}
