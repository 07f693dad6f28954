#include "geobeam/grid.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "geobeam/errors.hpp"

namespace geobeam {

namespace {

// FFTW plans are created once per (dim, N, direction) with FFTW_ESTIMATE, which is
// deterministic, and executed on caller arrays through the new-array interface.
fftw_plan plan_for(int dim, int N, int sign) {
  static std::mutex mu;
  static std::map<std::tuple<int, int, int>, fftw_plan> plans;
  std::lock_guard<std::mutex> lock(mu);
  auto key = std::make_tuple(dim, N, sign);
  auto it = plans.find(key);
  if (it != plans.end()) return it->second;
  const std::size_t total = dim == 1 ? N : static_cast<std::size_t>(N) * N;
  fftw_complex* in = fftw_alloc_complex(total);
  fftw_complex* out = fftw_alloc_complex(total);
  fftw_plan p = dim == 1 ? fftw_plan_dft_1d(N, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED)
                         : fftw_plan_dft_2d(N, N, in, out, sign, FFTW_ESTIMATE | FFTW_UNALIGNED);
  fftw_free(in);
  fftw_free(out);
  if (!p) throw NumericalError("fftw plan creation failed", 0.0);
  plans.emplace(key, p);
  return p;
}

void execute(int dim, int N, int sign, const cplx* in, cplx* out) {
  fftw_execute_dft(plan_for(dim, N, sign), reinterpret_cast<fftw_complex*>(const_cast<cplx*>(in)),
                   reinterpret_cast<fftw_complex*>(out));
}

}  // namespace

GridField::GridField(int dim, int N, double h) : dim_(dim), N_(N), h_(h) {
  if (dim != 1 && dim != 2) throw DomainError("GridField: dim must be 1 or 2");
  if (N < 2) throw DomainError("GridField: N must be >= 2");
  v_.assign(dim == 1 ? N : static_cast<std::size_t>(N) * N, cplx(0.0));
}

double GridField::lambda() const { return 1.0 / (2.0 * std::numbers::pi * h_); }

Eigen::VectorXd GridField::node(std::size_t idx) const {
  if (dim_ == 1) return Eigen::VectorXd::Constant(1, static_cast<double>(idx) / N_);
  return Eigen::Vector2d(static_cast<double>(idx / N_) / N_, static_cast<double>(idx % N_) / N_);
}

double GridField::l2() const {
  double s = 0;
  for (const auto& z : v_) s += std::norm(z);
  return std::sqrt(s / static_cast<double>(v_.size()));
}

double GridField::linf() const {
  double m = 0;
  for (const auto& z : v_) m = std::max(m, std::abs(z));
  return m;
}

double GridField::lp(double p) const {
  if (std::isinf(p)) return linf();
  double s = 0;
  for (const auto& z : v_) s += std::pow(std::abs(z), p);
  return std::pow(s / static_cast<double>(v_.size()), 1.0 / p);
}

GridField& GridField::operator+=(const GridField& o) {
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] += o.v_[i];
  return *this;
}

GridField& GridField::operator-=(const GridField& o) {
  for (std::size_t i = 0; i < v_.size(); ++i) v_[i] -= o.v_[i];
  return *this;
}

GridField& GridField::operator*=(cplx s) {
  for (auto& z : v_) z *= s;
  return *this;
}

Eigen::VectorXcd GridField::as_vector() const {
  return Eigen::Map<const Eigen::VectorXcd>(v_.data(), static_cast<Eigen::Index>(v_.size()));
}

GridField GridField::from_vector(int dim, int N, double h, const Eigen::VectorXcd& v) {
  GridField g(dim, N, h);
  if (static_cast<std::size_t>(v.size()) != g.size()) throw DomainError("GridField::from_vector: size mismatch");
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = v[static_cast<Eigen::Index>(i)];
  return g;
}

GridField operator+(GridField a, const GridField& b) { return a += b; }
GridField operator-(GridField a, const GridField& b) { return a -= b; }

double h_from_lambda(double lambda) { return 1.0 / (2.0 * std::numbers::pi * lambda); }

GridField make_grid(int dim, int lambda, int grid_factor) {
  if (lambda < 1) throw PreconditionError("make_grid: need lambda >= 1");
  if (grid_factor < 4) throw PreconditionError("make_grid: need grid_factor >= 4 (N >= 4 lambda)");
  return GridField(dim, grid_factor * lambda, h_from_lambda(lambda));
}

void validate_grid(const GridField& u) {
  if (!(u.h() > 0)) throw PreconditionError("grid: need h > 0");
  if (u.N() < 4.0 * u.lambda() * (1 - 1e-12))
    throw PreconditionError("grid: need N >= 4 lambda, got N = " + std::to_string(u.N()) +
                            ", lambda = " + std::to_string(u.lambda()));
  for (const auto& z : u.values())
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) throw PreconditionError("grid: non-finite value");
}

std::vector<cplx> fft_forward(const GridField& u) {
  std::vector<cplx> out(u.size());
  execute(u.dim(), u.N(), FFTW_FORWARD, u.values().data(), out.data());
  const double s = 1.0 / static_cast<double>(u.size());
  for (auto& z : out) z *= s;
  return out;
}

GridField fft_inverse(const std::vector<cplx>& coeffs, int dim, int N, double h) {
  GridField g(dim, N, h);
  if (coeffs.size() != g.size()) throw DomainError("fft_inverse: size mismatch");
  execute(dim, N, FFTW_BACKWARD, coeffs.data(), g.values().data());
  return g;
}

GridField ModeField::to_grid() const {
  std::vector<cplx> c(dim == 1 ? N : static_cast<std::size_t>(N) * N, cplx(0.0));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    const auto& m = modes[k];
    if (2 * std::abs(m[0]) >= N || (dim == 2 && 2 * std::abs(m[1]) >= N))
      throw PreconditionError("ModeField: mode outside the grid band");
    const std::size_t idx = dim == 1 ? fft_index(m[0], N)
                                     : static_cast<std::size_t>(fft_index(m[0], N)) * N + fft_index(m[1], N);
    c[idx] += coeffs[static_cast<Eigen::Index>(k)];
  }
  return fft_inverse(c, dim, N, h);
}

}  // namespace geobeam
