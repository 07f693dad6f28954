#include <doctest.h>

#include <cmath>
#include <numbers>

#include "geobeam/cover.hpp"
#include "geobeam/errors.hpp"
#include "geobeam/quantize.hpp"

using namespace geobeam;
using Eigen::VectorXd;

namespace {

constexpr double kPi = std::numbers::pi;

GridField random_field(int dim, int N, double h, std::uint64_t seed) {
  GridField u(dim, N, h);
  Stream s(seed, 0);
  for (auto& v : u.values()) v = s.complex_normal();
  return u;
}

double diff(const GridField& a, const GridField& b) { return (a - b).l2(); }

}  // namespace

TEST_CASE("fft round trip and grid norms") {
  auto u = random_field(2, 16, h_from_lambda(4), 3);
  const auto back = fft_inverse(fft_forward(u), 2, 16, u.h());
  CHECK(diff(u, back) < 1e-12 * u.l2());
  GridField one(1, 8, 0.1);
  for (auto& v : one.values()) v = 1.0;
  CHECK(one.l2() == doctest::Approx(1.0));
  CHECK(one.linf() == doctest::Approx(1.0));
  CHECK(one.lp(4) == doctest::Approx(1.0));
  CHECK(h_from_lambda(8) == doctest::Approx(1.0 / (16 * kPi)));
}

TEST_CASE("grid resolution precondition") {
  CHECK_THROWS_AS(validate_grid(GridField(1, 16, h_from_lambda(8))), PreconditionError);
  CHECK_NOTHROW(validate_grid(make_grid(1, 8)));
}

TEST_CASE("quantization of simple symbols") {
  auto u = random_field(2, 32, h_from_lambda(8), 5);
  CHECK(diff(op_apply(Symbol::identity(), u), u) < 1e-12);

  // multiplication by f acts pointwise
  auto f = [](const VectorXd& x) { return cplx(std::cos(2 * kPi * x[0]), 0.5 * std::sin(2 * kPi * x[1])); };
  auto fu = op_apply(Symbol::multiplication(f), u);
  double err = 0;
  for (std::size_t i = 0; i < u.size(); ++i) err = std::max(err, std::abs(fu[i] - f(u.node(i)) * u[i]));
  CHECK(err < 1e-12);

  // a Fourier multiplier scales each coefficient
  auto g = [](const VectorXd& eta) { return cplx(eta.squaredNorm(), 0.0); };
  const auto c = fft_forward(u);
  const auto cg = fft_forward(op_apply(Symbol::multiplier(g), u));
  double errm = 0;
  for (std::size_t k = 0; k < c.size(); ++k)
    errm = std::max(errm, std::abs(cg[k] - g(eta_of_index(k, 2, 32, 8)) * c[k]));
  CHECK(errm < 1e-12);
}

TEST_CASE("P on single modes") {
  const int lam = 8, N = 8 * lam;
  const auto on = single_mode(Eigen::Vector2i(lam, 0), 2, N, lam);
  CHECK(P_apply(on.to_grid()).l2() < 1e-12);
  const auto twice = single_mode(Eigen::Vector2i(0, 2 * lam), 2, N, lam);
  const auto g = twice.to_grid();
  CHECK(diff(P_apply(g), GridField(g) *= 3.0) < 1e-10);
  CHECK(P_multiplier(Eigen::Vector2i(3, 4), 2, 5) == doctest::Approx(0.0));
  CHECK(P_apply(on).coeffs.norm() < 1e-12);
}

TEST_CASE("quasimodes") {
  for (int lam : {16, 32, 64}) {
    Stream s(11, lam);
    const auto u = lattice_cluster(lam, 2, 4 * lam, s);
    CHECK(u.l2() == doctest::Approx(1.0));
    CHECK(P_apply(u).l2() <= 2.0 / lam + 1.0 / (lam * double(lam)) + 1e-12);
    for (const auto& m : u.modes) {
      const double r = m.cast<double>().norm();
      CHECK(r >= lam - 1e-12);
      CHECK(r <= lam + 1 + 1e-12);
    }
  }
  Stream s(4, 0);
  const auto v = random_shell(32, 2, 128, 0.1, s);
  CHECK(v.l2() == doctest::Approx(1.0));
  CHECK(v.to_grid().l2() == doctest::Approx(1.0));
  const auto w = gaussian_packet(32, 128, Eigen::Vector2d(0.5, 0.5), Eigen::Vector2d(1, 0), 0.1);
  CHECK(w.l2() == doctest::Approx(1.0));
}

TEST_CASE("stream reproducibility") {
  Stream a(7, 3), b(7, 3), c(7, 4);
  for (int i = 0; i < 10; ++i) {
    const auto x = a.next_u64();
    CHECK(x == b.next_u64());
    CHECK(x != c.next_u64());
  }
  Stream d(1, 1);
  double mean = 0, sq = 0;
  const int n = 20000;
  for (int i = 0; i < n; ++i) {
    const double z = d.normal();
    mean += z;
    sq += z * z;
  }
  CHECK(std::abs(mean / n) < 0.05);
  CHECK(sq / n == doctest::Approx(1.0).epsilon(0.05));
}

TEST_CASE("flat-top profiles") {
  CHECK(smooth_step(-1) == 0.0);
  CHECK(smooth_step(2) == 1.0);
  CHECK(smooth_step(0.5) == doctest::Approx(0.5));
  FlatTop f{0.25, 0.5};
  CHECK(f(0.2) == 1.0);
  CHECK(f(-0.6) == 0.0);
  CHECK(f(0.4) > 0.0);
  CHECK(f(0.4) < 1.0);
  CHECK(FlatTop{0.0, std::numeric_limits<double>::infinity()}(1e6) == 1.0);
}

TEST_CASE("dyadic buckets") {
  CHECK(dyadic_bucket(0.75) == 0);
  CHECK(dyadic_bucket(0.3) == 1);
  CHECK(dyadic_bucket(0.25) == 1);
  CHECK(dyadic_bucket(1.0) == -1);
  CHECK(dyadic_bucket(5.0) == -1);
  CHECK(dyadic_bucket(0.0) == kOverflowBucket);
  CHECK(dyadic_class(4.0) == 2);
  CHECK(dyadic_class(3.0) == 2);
  CHECK(dyadic_class(0.0) == kOverflowClass);
}

TEST_CASE("masses on the torus cover") {
  const auto cover = build_good_cover(ModelManifold::flat_torus({1.0, 1.0}), 0.2, 0.1);
  const auto cut = make_tube_cutoffs(cover);
  REQUIRE(cut.tilde.size() == cover.size());
  const int lam = 16, N = 4 * lam;
  Stream s(2, 0);
  const auto u = lattice_cluster(lam, 2, N, s);
  const auto gram = mass_filter(u, cut, 1.0);
  const auto grid = mass_filter(u.to_grid(), cut, 1.0);
  REQUIRE(gram.mass.size() == grid.mass.size());
  double worst = 0;
  for (std::size_t j = 0; j < gram.mass.size(); ++j) worst = std::max(worst, std::abs(gram.mass[j] - grid.mass[j]));
  CHECK(worst < 1e-3);

  // the zero function: every tube lands in the overflow bucket
  ModeField zero = u;
  zero.coeffs.setZero();
  const auto z = mass_filter(zero, cut, 1.0);
  REQUIRE(z.buckets.count(kOverflowBucket) == 1);
  CHECK(z.buckets.at(kOverflowBucket).size() == cover.size());
}

TEST_CASE("beam decomposition") {
  const auto cover = build_good_cover(ModelManifold::flat_torus({1.0, 1.0}), 0.2, 0.1);
  const int lam = 64;
  Stream s(5, 0);
  const auto u = lattice_cluster(lam, 2, 4 * lam, s).to_grid();
  CHECK_THROWS_AS(check_beam_regime(0.5, u.h(), 0.2, 0.4), PreconditionError);
  const auto beams = beam_decompose(u, cover, 0.01, 0.45);
  CHECK(beams.size() == cover.size());
  // reconstruction: a sum of beams is the quantization of the summed symbol
  std::vector<std::size_t> subset;
  for (std::size_t j = 0; j < cover.size() && subset.size() < 40; j += 7)
    if (!beams.is_zero(j)) subset.push_back(j);
  REQUIRE(subset.size() == 40);
  const auto& cut = beams.cutoffs();
  Symbol sum;
  for (auto j : subset) {
    const TubeCutoff t = cut.tilde[j];
    const FlatTop shell = cut.shell;
    sum.terms.push_back({[t](const VectorXd& x) { return cplx(t.spatial(Eigen::Vector2d(x[0], x[1]))); },
                         [t, shell](const VectorXd& e) {
                           const Eigen::Vector2d eta(e[0], e[1]);
                           return cplx(t.direction(eta) * shell(eta.norm() - 1.0));
                         }});
  }
  CHECK((beams.sum(subset) - op_apply(sum, u)).l2() < 1e-10);
}
