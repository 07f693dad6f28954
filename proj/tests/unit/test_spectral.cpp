#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/spectral.hpp"

using namespace geobeam;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("critical exponent and growth exponents") {
  CHECK(critical_exponent(2) == doctest::Approx(6.0));
  CHECK(critical_exponent(3) == doctest::Approx(4.0));
  CHECK(delta_exponent(2, 2) == doctest::Approx(0.0));
  CHECK(delta_exponent(4, 2) == doctest::Approx(1.0 / 8));
  CHECK(delta_exponent(6, 2) == doctest::Approx(1.0 / 6));
  CHECK(delta_exponent(8, 2) == doctest::Approx(1.0 / 4));
  CHECK(delta_exponent(kInfinity, 2) == doctest::Approx(0.5));
  CHECK(delta_exponent(kInfinity, 3) == doctest::Approx(1.0));
  CHECK_THROWS_AS(delta_exponent(1.5, 2), DomainError);
}

TEST_CASE("lattice circles") {
  CHECK(r2(1) == 4);
  CHECK(r2(25) == 12);
  CHECK(r2(3) == 0);
  CHECK(r2(65) == 16);
  for (const auto& k : lattice_circle(25)) CHECK(k.squaredNorm() == 25);
}

TEST_CASE("zonal harmonics") {
  for (int l : {0, 1, 8, 32, 128}) CHECK(lp_norm(EigenFamily::zonal(2, l), 2).norm == doctest::Approx(1.0).epsilon(1e-8));
  CHECK(lp_norm(EigenFamily::zonal(2, 16), kInfinity).norm == doctest::Approx(std::sqrt(33 / (4 * kPi))).epsilon(1e-8));
  const auto z = EigenFamily::zonal(2, 5);
  CHECK(std::abs(z.at_polar(0, 0)) == doctest::Approx(std::sqrt(11 / (4 * kPi))));
  CHECK(z.frequency() == doctest::Approx(std::sqrt(30.0)));
}

TEST_CASE("highest weight harmonics") {
  const auto f = EigenFamily::highest_weight(2, 10);
  CHECK(lp_norm(f, 2).norm == doctest::Approx(1.0).epsilon(1e-8));
  // |Y_ll| peaks on the equator
  CHECK(std::abs(f.at_polar(kPi / 2, 0.3)) > std::abs(f.at_polar(kPi / 3, 0.3)));
  const std::vector<Eigen::VectorXd> pts{Eigen::Vector3d(0.6, 0, 0.8), Eigen::Vector3d(0, 1, 0)};
  CHECK(laplacian_residual(f, pts) < 1e-4);
}

TEST_CASE("torus families") {
  const auto m = EigenFamily::torus_mode(Eigen::Vector2i(3, 4));
  CHECK(m.frequency() == doctest::Approx(10 * kPi));
  CHECK(lp_norm(m, 2).norm == doctest::Approx(1.0));
  CHECK(lp_norm(m, kInfinity).norm == doctest::Approx(1.0));
  const auto c = EigenFamily::lattice_cluster(25);
  CHECK(lp_norm(c, kInfinity).norm / lp_norm(c, 2).norm == doctest::Approx(std::sqrt(12.0)).epsilon(1e-6));
}

TEST_CASE("Lp norms are monotone and interpolate") {
  const auto f = EigenFamily::zonal(2, 12);
  const std::vector<double> ps{2, 4, 6, 8};
  std::vector<double> nv;
  for (double p : ps) nv.push_back(lp_norm(f, p, 0, true).norm);
  for (std::size_t i = 1; i < nv.size(); ++i) CHECK(nv[i] >= nv[i - 1] * (1 - 1e-12));
  // 1/4 = (1/4)/2 + (3/4)/6
  const double n2 = lp_norm(f, 2).norm, n4 = lp_norm(f, 4).norm, n6 = lp_norm(f, 6).norm;
  CHECK(n4 <= std::pow(n2, 0.25) * std::pow(n6, 0.75) * (1 + 1e-12));
}

TEST_CASE("exponent fits") {
  const auto e = exponent_fit(FamilyKind::zonal, 2, kInfinity, {8, 11, 16, 23, 32, 45});
  CHECK(e.target == doctest::Approx(0.5));
  CHECK(std::abs(e.fit.slope - 0.5) < 0.05);
  const auto c = cluster_linf_growth(2000);
  CHECK(c.fit.slope < 0.2);
  CHECK(c.unimproved == 0.5);
}

TEST_CASE("family names") {
  for (auto k : {FamilyKind::zonal, FamilyKind::highest_weight, FamilyKind::torus_mode,
                 FamilyKind::torus_lattice_cluster})
    CHECK(parse_family(family_name(k)) == k);
}
