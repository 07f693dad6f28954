#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geobeam/cover.hpp"
#include "geobeam/errors.hpp"
#include "geobeam/looping.hpp"

using namespace geobeam;
using Eigen::VectorXd;

namespace {

const GoodCover& torus_cover() {
  static const GoodCover c = build_good_cover(ModelManifold::flat_torus({1.0, 1.0}), 0.2, 0.1);
  return c;
}

}  // namespace

TEST_CASE("separated sets") {
  // points on a circle of length 1 at spacing 1/64; r = 0.25 keeps 4 of them
  const std::size_t n = 64;
  auto d = [](std::size_t i, std::size_t j) {
    return std::abs(wrap_centered((double(i) - double(j)) / 64.0, 1.0));
  };
  const auto S = maximal_separated_set(n, d, 0.25, 1.0 / 64);
  CHECK(S.size() == 4);
  for (std::size_t a = 0; a < S.size(); ++a)
    for (std::size_t b = a + 1; b < S.size(); ++b) CHECK(d(S[a], S[b]) >= 0.25);
  CHECK_THROWS_AS(maximal_separated_set(n, d, 0.02, 1.0 / 64), PreconditionError);

  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  const auto P = maximal_separated_set(T, 0.2);
  for (std::size_t a = 0; a < P.size(); ++a)
    for (std::size_t b = a + 1; b < P.size(); ++b) CHECK(base_distance(T, P[a], P[b]) >= 0.2);
  // maximality: every point of the torus is within r of the set
  for (int i = 0; i < 20; ++i) {
    const VectorXd x = Eigen::Vector2d(0.05 * i, std::fmod(0.37 * i, 1.0));
    double best = 1e9;
    for (const auto& p : P) best = std::min(best, base_distance(T, x, p));
    CHECK(best < 0.2);
  }
}

TEST_CASE("greedy partition") {
  // a path 0-1-2-3 with unit steps and conflict radius 1.5 alternates two classes
  auto d = [](std::size_t i, std::size_t j) { return std::abs(double(i) - double(j)); };
  const auto cls = greedy_partition(4, d, 1.5);
  REQUIRE(cls.size() == 2);
  CHECK(cls[0] == std::vector<std::size_t>{0, 2});
  CHECK(cls[1] == std::vector<std::size_t>{1, 3});
  CHECK(greedy_partition(3, d, 0.5).size() == 1);
  CHECK(greedy_partition(3, d, 10.0).size() == 3);
}

TEST_CASE("torus cover") {
  const auto& c = torus_cover();
  CHECK(c.size() == 8320);
  CHECK(c.D == 3200);
  CHECK(class_count_bound() == doctest::Approx(784.0));
  const auto chk = check_cover(c, 2000, 500);
  CHECK(chk.cover_ok);
  CHECK(chk.disjoint_ok);
  CHECK(chk.class_bound_ok);
  CHECK(chk.min_class_separation >= 6.0);
  for (const auto& cl : c.classes) {
    REQUIRE(!cl.empty());
    const int tid = c.tubes[cl[0]].transversal_id;
    for (auto j : cl) CHECK(c.tubes[j].transversal_id == tid);
  }
}

TEST_CASE("cover parameters out of range") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  CHECK_THROWS_AS(build_good_cover(T, 0.2, 0.0), PreconditionError);
  CHECK_THROWS_AS(build_good_cover(T, 5.0, 0.1), PreconditionError);
}

TEST_CASE("tube membership") {
  const auto& c = torus_cover();
  for (std::size_t j : {std::size_t(0), std::size_t(1234), std::size_t(8000)}) {
    const auto hits = tubes_containing(c, c.tubes[j].center);
    CHECK(std::find(hits.begin(), hits.end(), j) != hits.end());
  }
}

TEST_CASE("cover json round trip") {
  const auto& c = torus_cover();
  const auto back = cover_from_json(cover_to_json(c));
  REQUIRE(back.size() == c.size());
  CHECK(back.D == c.D);
  CHECK(back.tau == c.tau);
  CHECK(back.R == c.R);
  CHECK(back.classes.size() == c.classes.size());
  for (std::size_t j = 0; j < c.size(); j += 97) {
    CHECK((back.tubes[j].center.x - c.tubes[j].center.x).norm() == 0.0);
    CHECK((back.tubes[j].center.xi - c.tubes[j].center.xi).norm() == 0.0);
    CHECK(back.tubes[j].class_id == c.tubes[j].class_id);
  }
}

TEST_CASE("loop classification on the torus") {
  const auto& c = torus_cover();
  const VectorXd x1 = Eigen::Vector2d(0.25, 0.25);
  // x2 = x1, t in [1, 1.2]: orbits along a coordinate axis are back at x1 at t = 1
  const auto rep = classify_tubes(c, x1, x1, 1.0, 1.2, c.R);
  REQUIRE(!rep.tubes.empty());
  CHECK(rep.bad.size() + rep.good.size() == rep.tubes.size());
  CHECK_FALSE(rep.good.empty());
  std::size_t axis_tubes = 0;
  for (std::size_t k = 0; k < rep.tubes.size(); ++k) {
    const auto& xi = c.tubes[rep.tubes[k]].center.xi;
    const bool bad = std::find(rep.bad.begin(), rep.bad.end(), rep.tubes[k]) != rep.bad.end();
    CHECK(bad == !std::isnan(rep.first_hit[k]));
    if (bad) CHECK(rep.first_hit[k] >= 1.0 - c.tau - 2 * c.R);
    if (std::min(std::abs(xi[0]), std::abs(xi[1])) < 0.05 * xi.norm()) {
      ++axis_tubes;
      CHECK(bad);
    }
  }
  CHECK(axis_tubes > 0);
  CHECK_THROWS_AS(classify_tubes(c, x1, x1, 0.5, 1.2, c.R), PreconditionError);
}

TEST_CASE("predicted improvement") {
  CHECK(predicted_improvement(8.0, 2, 1.0, 100.0, 0.0, 0.0) == doctest::Approx(0.1));
  CHECK(predicted_improvement(12.0, 2, 1.0, 100.0, 1e-6, 0.0) == doctest::Approx(0.1 + std::pow(1e-6, 1.0 / 12)));
  CHECK(predicted_improvement(std::numeric_limits<double>::infinity(), 2, 1.0, 4.0, 1.0, 0.0) ==
        doctest::Approx(1.5));
}
