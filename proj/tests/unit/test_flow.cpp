#include <doctest.h>

#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/flow.hpp"

using namespace geobeam;
using Eigen::VectorXd;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("straight lines on the torus") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  const auto q = flow_point(T, {Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0)}, 0.5);
  CHECK(q.x[0] == doctest::Approx(0.5));
  CHECK(q.x[1] == doctest::Approx(0.0));
  CHECK(q.xi[0] == doctest::Approx(1.0));
}

TEST_CASE("sphere geodesics are 2 pi periodic") {
  const auto S = ModelManifold::sphere(2);
  for (const auto& p : sample_cosphere(S, 5)) {
    const auto q = flow_point(S, p, 2 * kPi);
    CHECK((q.x - p.x).norm() < 1e-8);
    CHECK((q.xi - p.xi).norm() < 1e-8);
  }
}

TEST_CASE("surface of revolution flow matches a finer integration") {
  Profile f;
  f.coeffs = {2.0, 1.0};
  f.period = 2 * kPi;
  const auto M = ModelManifold::surface_of_revolution(f);
  CotangentPoint p{Eigen::Vector2d(0.0, 0.0), Eigen::Vector2d(0.6, 0.8 * f.value(0.0))};
  p = normalize_covector(M, p);
  const auto coarse = flow_point(M, p, 1.0);
  const auto fine = flow_point(M, p, 1.0, 1e-14);
  CHECK((coarse.x - fine.x).norm() < 1e-7);
  const auto tr = geodesic_flow(M, p, 5.0);
  CHECK(tr.max_energy_drift(M) < 1e-8);
}

TEST_CASE("flow derivative is symplectic") {
  const auto S = ModelManifold::sphere(2);
  CotangentPoint p{Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0)};
  const auto D = flow_jacobian(S, p, 1.3);
  CHECK(D.determinant() == doctest::Approx(1.0).epsilon(1e-6));
  const int n = static_cast<int>(D.rows()) / 2;
  Eigen::MatrixXd Jm = Eigen::MatrixXd::Zero(2 * n, 2 * n);
  Jm.topRightCorner(n, n) = Eigen::MatrixXd::Identity(n, n);
  Jm.bottomLeftCorner(n, n) = -Eigen::MatrixXd::Identity(n, n);
  CHECK((D.transpose() * Jm * D - Jm).norm() < 1e-6);
}

TEST_CASE("conjugate points") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  CHECK(conjugate_points(T, Eigen::Vector2d(0.1, 0.2), Eigen::Vector2d(0.6, 0.8), 10.0).empty());

  const auto S = ModelManifold::sphere(2);
  const auto ev = conjugate_points(S, Eigen::Vector3d(0, 0, 1), Eigen::Vector3d(1, 0, 0), 3.5);
  REQUIRE(ev.size() == 1);
  CHECK(std::abs(ev[0].t - kPi) < 1e-6);
  CHECK(ev[0].multiplicity == 1);

  const auto S3 = ModelManifold::sphere(3);
  const auto e3 = conjugate_points(S3, Eigen::Vector4d(0, 0, 0, 1), Eigen::Vector4d(0.6, 0.8, 0, 0), 7.0);
  REQUIRE(e3.size() == 2);
  CHECK(e3[1].t == doctest::Approx(2 * kPi).epsilon(1e-9));
  CHECK(e3[1].multiplicity == 2);

  // product: the sphere factor moves at speed cos(alpha)
  const auto P = ModelManifold::product(S, ModelManifold::flat_torus({2 * kPi}));
  VectorXd x(4), d(4);
  x << 0, 0, 1, 0;
  d << 0.8, 0, 0, 0.6;
  const auto ep = conjugate_points(P, x, d, 10.0);
  REQUIRE(ep.size() == 2);
  for (std::size_t k = 0; k < ep.size(); ++k) {
    CHECK(ep[k].t == doctest::Approx((k + 1) * kPi / 0.8).epsilon(1e-8));
    CHECK(ep[k].multiplicity == 1);
  }
}

TEST_CASE("maximally conjugate sets") {
  const auto S = ModelManifold::sphere(2);
  const VectorXd x = Eigen::Vector3d(0, 0, 1);
  const auto C = maximally_conjugate_set(S, x, 1, 0.1, kPi, 64);
  REQUIRE(!C.endpoints.empty());
  for (const auto& y : C.endpoints) CHECK((y + x).norm() < 1e-6);

  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  CHECK(maximally_conjugate_set(T, Eigen::Vector2d(0.5, 0.5), 1, 0.1, 3.0, 64).endpoints.empty());

  const auto P = ModelManifold::product(S, ModelManifold::flat_torus({2 * kPi}));
  VectorXd xp(4);
  xp << 0, 0, 1, 0;
  // conjugate points on the product are simple, so m = 2 never qualifies
  CHECK(maximally_conjugate_set(P, xp, 2, r_schedule(1.0, 2.0), 2.0, 600).endpoints.empty());
  CHECK(maximally_conjugate_set(P, xp, 1, 0.2, kPi / 0.8, 600).endpoints.size() > 0);
  CHECK_THROWS_AS(maximally_conjugate_set(P, xp, 1, 0.01, 2.0, 100), PreconditionError);
}

TEST_CASE("conjugacy hypothesis") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  std::vector<VectorXd> U;
  for (const auto& p : sample_cosphere(T, 3)) U.push_back(p.x);
  const auto rt = check_noconj_hypothesis(T, U, 1.0, 1.0, 10.0);
  CHECK(rt.holds);
  CHECK(std::isinf(rt.margin));

  const auto S = ModelManifold::sphere(2);
  std::vector<VectorXd> V;
  for (const auto& p : sample_cosphere(S, 3)) V.push_back(p.x);
  for (std::size_t i = 0, n = V.size(); i < n; ++i) V.push_back(-V[i]);
  const auto rs = check_noconj_hypothesis(S, V, 1.0, 1.0, 4.0);
  CHECK_FALSE(rs.holds);
  CHECK(rs.margin < 0);
  CHECK(std::abs(rs.worst_t - kPi) <= r_schedule(1.0, kPi));
}

TEST_CASE("expansion rates and Ehrenfest time") {
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  // on the flat torus |dphi_T| grows linearly, so the raw rate is about log(T) / T
  const auto e50 = max_expansion_rate(T, 4, 50.0);
  CHECK_FALSE(e50.floored);
  CHECK(e50.raw < std::log(2 * 50.0) / 50.0);
  const auto eT = max_expansion_rate(T, 4, 200.0);
  CHECK(eT.floored);
  CHECK(eT.lambda == doctest::Approx(default_tolerances().lambda_floor));
  const auto eS = max_expansion_rate(ModelManifold::sphere(2), 4, 200.0);
  CHECK(eS.floored);
  CHECK(ehrenfest_time(std::exp(-2.0), 1.0) == doctest::Approx(1.0));
  CHECK(r_schedule(2.0, 0.0) == doctest::Approx(0.5));
}
