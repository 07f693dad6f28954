#include <doctest.h>

#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/manifold.hpp"

using namespace geobeam;
using Eigen::VectorXd;

namespace {
constexpr double kPi = std::numbers::pi;
VectorXd v2(double a, double b) { return Eigen::Vector2d(a, b); }
}  // namespace

TEST_CASE("metric tensors") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  CHECK((metric_at(T, v2(0.3, 0.8)) - Eigen::Matrix2d::Identity()).norm() == doctest::Approx(0.0));

  const auto S = ModelManifold::sphere(2);
  const double th = 0.7;
  const auto g = metric_at(S, v2(th, 1.1), Chart::polar);
  CHECK(g(0, 0) == doctest::Approx(1.0));
  CHECK(g(1, 1) == doctest::Approx(std::sin(th) * std::sin(th)));
  CHECK(std::abs(g(0, 1)) < 1e-12);

  // first fundamental form of the embedding by finite differences
  const double e = 1e-6;
  const auto J = sphere_embed_jacobian(2, Chart::polar, v2(th, 1.1));
  const VectorXd d0 = (sphere_embed(2, Chart::polar, v2(th + e, 1.1)) - sphere_embed(2, Chart::polar, v2(th - e, 1.1))) / (2 * e);
  CHECK((J.col(0) - d0).norm() < 1e-8);
  CHECK(((J.transpose() * J) - g).norm() < 1e-12);

  const auto P = ModelManifold::product(ModelManifold::flat_torus({1.0}), ModelManifold::flat_torus({1.0}));
  CHECK((metric_at(P, v2(0.2, 0.4)) - Eigen::Matrix2d::Identity()).norm() == doctest::Approx(0.0));
}

TEST_CASE("covector norms") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  CHECK(conorm(T, v2(0, 0), v2(3, 4)) == doctest::Approx(5.0));
  const auto S = ModelManifold::sphere(2);
  CHECK(conorm(S, v2(kPi / 2, 0), v2(1, 0), Chart::polar) == doctest::Approx(1.0));
  CHECK(conorm(S, v2(kPi / 4, 0), v2(0, 1), Chart::polar) == doctest::Approx(std::sqrt(2.0)));
}

TEST_CASE("chart round trip keeps the covector norm") {
  const auto S = ModelManifold::sphere(2);
  CotangentPoint p{v2(1.0, 0.4), v2(0.3, -0.7), Chart::polar};
  const auto n = to_native(S, p);
  CHECK(conorm(S, n) == doctest::Approx(conorm(S, p)).epsilon(1e-12));
  const auto back = from_native(S, n, Chart::polar);
  CHECK((back.x - p.x).norm() < 1e-12);
  CHECK((back.xi - p.xi).norm() < 1e-12);
}

TEST_CASE("phase space distance") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  CotangentPoint p{v2(0, 0), v2(1, 0)};
  CHECK(phase_distance(T, p, p) == doctest::Approx(0.0));
  CotangentPoint q{v2(1e-3, 0), v2(1, 0)};
  CHECK(phase_distance(T, p, q) == doctest::Approx(1e-3));

  const auto S = ModelManifold::sphere(2);
  const VectorXd x = Eigen::Vector3d(0, 0, 1), y = Eigen::Vector3d(0, 0, -1);
  CHECK(base_distance(S, x, y) == doctest::Approx(kPi));
}

TEST_CASE("periodic helpers") {
  CHECK(wrap_centered(0.7, 1.0) == doctest::Approx(-0.3));
  CHECK(wrap_positive(-0.25, 1.0) == doctest::Approx(0.75));
}

TEST_CASE("domain errors") {
  const auto S = ModelManifold::sphere(2);
  CotangentPoint bad{Eigen::Vector3d(0, 0, 2), Eigen::Vector3d(1, 0, 0)};
  CHECK_THROWS_AS(validate_native(S, bad), DomainError);
  CHECK_THROWS(ModelManifold::flat_torus({1.0, -1.0}));
}

TEST_CASE("surface of revolution curvature") {
  Profile f;
  f.coeffs = {2.0, 1.0};
  f.period = 2 * kPi;
  // K = -f''/f with f = 2 + cos s
  CHECK(sor_curvature(f, 0.0) == doctest::Approx(1.0 / 3.0));
  CHECK(sor_curvature(f, kPi) == doctest::Approx(-1.0));
}
