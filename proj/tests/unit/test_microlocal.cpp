#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/microlocal2.hpp"

using namespace geobeam;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

double bump(double s) { return s <= -1 || s >= 1 ? 0.0 : std::exp(-1.0 / (1 - s * s)); }

// Smooth symbol in (x, eta, lam) with the transverse coordinate x_0 - 1/2.
Symbol2M test_symbol(double phase, double shift) {
  Symbol2M a;
  a.r = 1;
  a.axis = 0;
  a.center = 0.5;
  a.order = 0;
  a.terms.push_back({[=](const VectorXd& x) { return cplx(std::cos(2 * kPi * (x[0] + shift)), 0.0); },
                     [=](const VectorXd& eta) { return cplx(bump(eta[0] - 0.5), 0.0); },
                     [=](double lam) { return std::exp(cplx(0, phase)) / std::sqrt(1 + lam * lam); }});
  return a;
}

GridField random_field(int dim, int N, double h, std::uint64_t seed) {
  GridField u(dim, N, h);
  Stream s(seed, 0);
  for (auto& v : u.values()) v = s.complex_normal();
  return u;
}

}  // namespace

TEST_CASE("symbol regularity checks") {
  Stream s(1, 0);
  const auto a = test_symbol(0.3, 0.0);
  CHECK(support_violation(a, 1, s) == 0.0);
  CHECK(lambda_derivative_ratio(a, 1, s) < 10.0);
  CHECK_THROWS_AS(product(a, [] {
                    Symbol2M b = Symbol2M::identity();
                    b.center = 0.1;
                    return b;
                  }()),
                  DomainError);
}

TEST_CASE("resolution") {
  CHECK(micro_grid_size(8, 0.6) >= 32);
  const double h = std::pow(2.0, -8);
  CHECK_THROWS_AS(check_resolution(16, h, 0.6), PreconditionError);
  CHECK_NOTHROW(check_resolution(micro_grid_size(1 / (2 * kPi * h), 0.6), h, 0.6));
}

TEST_CASE("identity and adjoint") {
  const double h = std::pow(2.0, -6), rho = 0.6;
  const int N = micro_grid_size(1 / (2 * kPi * h), rho);
  auto u = random_field(1, N, h, 9);
  CHECK((op2_apply(Symbol2M::identity(), u, rho) - u).l2() < 1e-12 * u.l2());

  const auto a = test_symbol(0.4, 0.1);
  auto v = random_field(1, N, h, 10);
  const auto Au = op2_apply(a, u, rho);
  const auto Asv = op2_adjoint_apply(a, v, rho);
  const cplx lhs = v.as_vector().dot(Au.as_vector());
  const cplx rhs = Asv.as_vector().dot(u.as_vector());
  CHECK(std::abs(lhs - rhs) < 1e-10 * std::abs(lhs));
}

TEST_CASE("composition with the identity is exact") {
  const auto a = test_symbol(0.7, 0.0);
  Symbol2M one = Symbol2M::identity();
  one.center = a.center;
  const auto sw = composition_residual(a, one, {std::pow(2.0, -6), std::pow(2.0, -7)}, 0.6, 1);
  for (const auto& r : sw.rows) CHECK(r.norm < 1e-10);
}

TEST_CASE("multipliers commute") {
  Symbol2M a, b;
  a.center = b.center = 0.5;
  a.terms.push_back({{}, [](const VectorXd& eta) { return cplx(bump(eta[0]), 0); }, {}});
  b.terms.push_back({{}, [](const VectorXd& eta) { return cplx(std::cos(eta[0]), 0); }, {}});
  const auto sw = commutator_norms(a, b, {std::pow(2.0, -6)}, 0.6, 1);
  CHECK(sw.rows.at(0).norm < 1e-10);
}

TEST_CASE("commutator decay in one dimension") {
  const auto a = test_symbol(0.2, 0.0);
  const auto b = test_symbol(-0.5, 0.25);
  std::vector<double> hs;
  for (int k = 12; k <= 18; k += 2) hs.push_back(std::pow(2.0, -k));
  const auto sw = commutator_norms(a, b, hs, 0.5, 1);
  // principal symbols commute, so the norm is O(h^(1 - rho))
  CHECK(sw.fit.slope >= 0.4);
}

TEST_CASE("rescaling") {
  const double h = std::pow(2.0, -8), delta = 0.25;
  const int D = dilation_factor(h, delta);
  CHECK(D == 4);
  const int N = 256;
  std::vector<cplx> c(N * N, 0.0);
  Stream s(3, 0);
  for (int m0 = -8; m0 <= 8; ++m0)
    for (int m1 = -8; m1 <= 8; ++m1) c[fft_index(D * m0, N) * N + fft_index(D * m1, N)] = s.complex_normal();
  const auto u = fft_inverse(c, 2, N, h);
  const auto r = rescale(u, delta);
  CHECK(r.l2() == doctest::Approx(u.l2()));
  CHECK((rescale_inverse(r, delta) - u).l2() < 1e-10 * u.l2());
  c[fft_index(1, N) * N] = 1.0;
  CHECK_THROWS_AS(rescale(fft_inverse(c, 2, N, h), delta), DomainError);
}

TEST_CASE("Krylov norms agree with the dense oracle") {
  MicroOptions opt;
  opt.eps = 0.4;
  opt.delta = 0.5;
  opt.rho = 0.7;
  const double t = 0.125;
  const double dense = dense_uncertainty_norm(t, 8, opt);
  const auto lz = uncertainty_norm({t}, 8, opt);
  CHECK(lz.at(0).norm == doctest::Approx(dense).epsilon(1e-6));
  opt.power.method = NormMethod::power;
  opt.power.rel_tol = 1e-10;
  opt.power.max_iter = 5000;
  CHECK(uncertainty_norm({t}, 8, opt).at(0).norm == doctest::Approx(dense).epsilon(1e-6));
  opt.power = {};
  CHECK(uncertainty_norm({-t}, 8, opt).at(0).norm == doctest::Approx(dense).epsilon(1e-6));
  CHECK_THROWS_AS(uncertainty_norm({0.5}, 8, opt), PreconditionError);
}

TEST_CASE("coisotropic cutoff on modes equals the grid apply") {
  const double lam = 16, h = 1 / (2 * kPi * lam);
  const auto X = build_coiso_cutoff(Eigen::Vector2d(0.5, 0.5), 0.4, 0.7, 0.5, h, CoisoKind::X_y);
  Stream s(6, 0);
  const auto u = random_shell(16, 2, 256, 0.2, s);
  CHECK((X.apply(u) - X.apply(u.to_grid())).l2() < 1e-10);
  const auto chi = build_coiso_cutoff(Eigen::Vector2d(0.5, 0.5), 0.4, 0.7, 0.5, h, CoisoKind::chi_hy);
  CHECK(chi.width() == doctest::Approx(0.4 * std::pow(h, 0.7)));
  CHECK(kap_profile(0.5) == 1.0);
  CHECK(kap_profile(2.5) == 0.0);
  CHECK(psi_profile(0.2) == 1.0);
  CHECK(psi_profile(0.4) == 0.0);
}
