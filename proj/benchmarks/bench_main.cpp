#include <benchmark/benchmark.h>

#include <numbers>

#include "geobeam/cover.hpp"
#include "geobeam/microlocal2.hpp"
#include "geobeam/quantize.hpp"

using namespace geobeam;

namespace {

const GoodCover& torus_cover() {
  static const GoodCover c = build_good_cover(ModelManifold::flat_torus({1.0, 1.0}), 0.2, 0.1);
  return c;
}

void BM_Fft2d(benchmark::State& st) {
  const int N = static_cast<int>(st.range(0));
  GridField u(2, N, 0.01);
  Stream s(1, 0);
  for (auto& v : u.values()) v = s.complex_normal();
  for (auto _ : st) benchmark::DoNotOptimize(fft_inverse(fft_forward(u), 2, N, u.h()));
}
BENCHMARK(BM_Fft2d)->Arg(64)->Arg(256)->Arg(1024);

void BM_CoverBuild(benchmark::State& st) {
  const double R = st.range(0) / 100.0;
  const auto T = ModelManifold::flat_torus({1.0, 1.0});
  for (auto _ : st) benchmark::DoNotOptimize(build_good_cover(T, 0.2, R).size());
}
BENCHMARK(BM_CoverBuild)->Arg(10)->Unit(benchmark::kMillisecond);

void BM_MassFilter(benchmark::State& st) {
  const int lam = static_cast<int>(st.range(0));
  const auto cut = make_tube_cutoffs(torus_cover());
  Stream s(2, 0);
  const auto u = lattice_cluster(lam, 2, 4 * lam, s);
  for (auto _ : st) benchmark::DoNotOptimize(mass_filter(u, cut, 1.0).norm_PT);
}
BENCHMARK(BM_MassFilter)->Arg(64)->Arg(128)->Unit(benchmark::kMillisecond);

void BM_CoisoApply(benchmark::State& st) {
  const double lam = static_cast<double>(st.range(0));
  const double h = 1 / (2 * std::numbers::pi * lam);
  const auto X = build_coiso_cutoff(Eigen::Vector2d(0.5, 0.5), 0.4, 0.7, 0.5, h, CoisoKind::X_y);
  GridField u = make_grid(2, static_cast<int>(lam));
  Stream s(3, 0);
  for (auto& v : u.values()) v = s.complex_normal();
  X.apply(u);
  for (auto _ : st) benchmark::DoNotOptimize(X.apply(u));
}
BENCHMARK(BM_CoisoApply)->Arg(16)->Arg(32)->Unit(benchmark::kMillisecond);

}  // namespace
