#include "geobeam/quantize.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/manifold.hpp"
#include "geobeam/parallel.hpp"

namespace geobeam {

using Eigen::Vector2d;
using Eigen::Vector2i;
using Eigen::VectorXd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

void require_finite(cplx z, const char* what) {
  if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
    throw DomainError(std::string("op_apply: non-finite ") + what + " value at a grid node");
}

Vector2i mode_of_index(std::size_t idx, int dim, int N) {
  if (dim == 1) return Vector2i(signed_freq(static_cast<int>(idx), N), 0);
  return Vector2i(signed_freq(static_cast<int>(idx / N), N), signed_freq(static_cast<int>(idx % N), N));
}

Vector2d eta2(const Vector2i& m, double lambda) { return Vector2d(m[0], m[1]) / lambda; }

// Indices of coefficients above a relative floor; the rest are treated as exact zeros
// when deciding which beams vanish.
std::vector<std::size_t> significant(const std::vector<cplx>& c) {
  double mx = 0;
  for (const auto& z : c) mx = std::max(mx, std::abs(z));
  std::vector<std::size_t> out;
  if (mx == 0) return out;
  for (std::size_t i = 0; i < c.size(); ++i)
    if (std::abs(c[i]) > 1e-14 * mx) out.push_back(i);
  return out;
}

ModeField normalized(ModeField f) {
  const double n = f.coeffs.norm();
  if (n > 0) f.coeffs /= n;
  return f;
}

// B(nu) = int f(s)^2 cos(2 pi nu s) ds on a uniform table, from a zero-padded FFT.
class ProfileTransform {
 public:
  ProfileTransform(const FlatTop& f, double nu_max) {
    // Sampling must resolve nu_max; the table step stays 1/128.
    int inv_ds = 2048;
    while (nu_max + 8 > inv_ds / 2) inv_ds *= 2;
    const double ds = 1.0 / inv_ds;
    const int M = 128 * inv_ds;
    step_ = 1.0 / (M * ds);
    if (nu_max / step_ + 4 > M / 2) throw PreconditionError("mass_filter: frequency range exceeds table");
    GridField g(1, M, 1.0);
    for (int i = 0; i < M; ++i) {
      const double s = (i < M / 2 ? i : i - M) * ds;
      const double v = f(s);
      g[i] = v * v;
    }
    const auto c = fft_forward(g);
    const int len = static_cast<int>(nu_max / step_) + 4;
    table_.resize(len);
    for (int j = 0; j < len; ++j) table_[j] = c[j].real() * M * ds;
  }
  // Cubic (Catmull-Rom) interpolation; B is even.
  double operator()(double nu) const {
    const double x = std::abs(nu) / step_;
    const int i = static_cast<int>(x);
    const double t = x - i;
    auto at = [&](int k) { return table_[std::abs(k)]; };
    const double p0 = at(i - 1), p1 = at(i), p2 = at(i + 1), p3 = at(i + 2);
    return p1 + 0.5 * t * (p2 - p0 + t * (2 * p0 - 5 * p1 + 4 * p2 - p3 + t * (3 * (p1 - p2) + p3 - p0)));
  }

 private:
  double step_ = 1.0;
  std::vector<double> table_;
};

double torus_distance(const Vector2d& a, const Vector2d& b) {
  return std::hypot(wrap_centered(a[0] - b[0], 1.0), wrap_centered(a[1] - b[1], 1.0));
}

}  // namespace

// ---- symbols --------------------------------------------------------------------------

Symbol Symbol::identity() { return separable({}, {}); }
Symbol Symbol::multiplier(Frequency g) { return separable({}, std::move(g)); }
Symbol Symbol::multiplication(Spatial f) { return separable(std::move(f), {}); }
Symbol Symbol::separable(Spatial f, Frequency g) {
  Symbol s;
  s.terms.push_back({std::move(f), std::move(g)});
  return s;
}
Symbol Symbol::dense(std::function<cplx(const VectorXd&, const VectorXd&)> a) {
  Symbol s;
  s.general = std::move(a);
  return s;
}

cplx Symbol::operator()(const VectorXd& x, const VectorXd& eta) const {
  if (general) return general(x, eta);
  cplx sum = 0;
  for (const auto& t : terms) sum += (t.spatial ? t.spatial(x) : cplx(1)) * (t.frequency ? t.frequency(eta) : cplx(1));
  return sum;
}

VectorXd eta_of_index(std::size_t idx, int dim, int N, double lambda) {
  const Vector2i m = mode_of_index(idx, dim, N);
  if (dim == 1) return VectorXd::Constant(1, m[0] / lambda);
  return eta2(m, lambda);
}

GridField op_apply(const Symbol& a, const GridField& u) {
  validate_grid(u);
  const int dim = u.dim(), N = u.N();
  const double lam = u.lambda();
  const auto c = fft_forward(u);
  GridField out(dim, N, u.h());
  if (a.general) {
    if (u.size() > 8192) throw PreconditionError("op_apply: general symbols need N^n <= 8192");
    const auto sig = significant(c);
    std::vector<VectorXd> etas(sig.size());
    std::vector<Vector2i> ms(sig.size());
    for (std::size_t k = 0; k < sig.size(); ++k) {
      etas[k] = eta_of_index(sig[k], dim, N, lam);
      ms[k] = mode_of_index(sig[k], dim, N);
    }
    parallel_for(u.size(), [&](std::size_t i) {
      const VectorXd x = u.node(i);
      cplx s = 0;
      for (std::size_t k = 0; k < sig.size(); ++k) {
        const cplx av = a.general(x, etas[k]);
        require_finite(av, "symbol");
        const double ph = kTwoPi * (dim == 1 ? ms[k][0] * x[0] : ms[k][0] * x[0] + ms[k][1] * x[1]);
        s += av * c[sig[k]] * cplx(std::cos(ph), std::sin(ph));
      }
      out[i] = s;
    });
    return out;
  }
  for (const auto& t : a.terms) {
    std::vector<cplx> ct = c;
    if (t.frequency)
      for (std::size_t k = 0; k < ct.size(); ++k) {
        const cplx g = t.frequency(eta_of_index(k, dim, N, lam));
        require_finite(g, "frequency");
        ct[k] *= g;
      }
    GridField v = fft_inverse(ct, dim, N, u.h());
    if (t.spatial)
      for (std::size_t i = 0; i < v.size(); ++i) {
        const cplx f = t.spatial(v.node(i));
        require_finite(f, "spatial");
        v[i] *= f;
      }
    out += v;
  }
  return out;
}

double P_multiplier(const Vector2i& m, int dim, double lambda) {
  const double m2 = dim == 1 ? double(m[0]) * m[0] : double(m[0]) * m[0] + double(m[1]) * m[1];
  return m2 / (lambda * lambda) - 1.0;
}

GridField P_apply(const GridField& u) {
  validate_grid(u);
  auto c = fft_forward(u);
  for (std::size_t k = 0; k < c.size(); ++k) c[k] *= P_multiplier(mode_of_index(k, u.dim(), u.N()), u.dim(), u.lambda());
  return fft_inverse(c, u.dim(), u.N(), u.h());
}

ModeField P_apply(const ModeField& u) {
  ModeField out = u;
  const double lam = 1.0 / (kTwoPi * u.h);
  for (std::size_t k = 0; k < u.modes.size(); ++k)
    out.coeffs[static_cast<Eigen::Index>(k)] *= P_multiplier(u.modes[k], u.dim, lam);
  return out;
}

// ---- quasimodes -------------------------------------------------------------------------

namespace {

template <class Keep>
ModeField shell_modes(int lambda, int dim, int N, int reach, Keep keep) {
  if (4 * lambda > N) throw PreconditionError("quasimode: need N >= 4 lambda");
  ModeField f;
  f.dim = dim;
  f.N = N;
  f.h = h_from_lambda(lambda);
  if (dim == 1) {
    for (int a = -reach; a <= reach; ++a)
      if (keep(std::abs(double(a)))) f.modes.emplace_back(a, 0);
  } else {
    for (int a = -reach; a <= reach; ++a)
      for (int b = -reach; b <= reach; ++b)
        if (keep(std::hypot(double(a), double(b)))) f.modes.emplace_back(a, b);
  }
  f.coeffs = Eigen::VectorXcd::Zero(static_cast<Eigen::Index>(f.modes.size()));
  return f;
}

}  // namespace

ModeField lattice_cluster(int lambda, int dim, int N, Stream& rng) {
  ModeField f = shell_modes(lambda, dim, N, lambda + 1, [&](double r) { return r >= lambda && r <= lambda + 1; });
  for (Eigen::Index k = 0; k < f.coeffs.size(); ++k) f.coeffs[k] = rng.complex_normal();
  return normalized(f);
}

ModeField single_mode(const Vector2i& m, int dim, int N, double lambda) {
  if (2 * std::abs(m[0]) >= N || 2 * std::abs(m[1]) >= N) throw PreconditionError("single_mode: mode outside band");
  ModeField f;
  f.dim = dim;
  f.N = N;
  f.h = h_from_lambda(lambda);
  f.modes = {dim == 1 ? Vector2i(m[0], 0) : m};
  f.coeffs = Eigen::VectorXcd::Ones(1);
  return f;
}

ModeField random_shell(int lambda, int dim, int N, double delta, Stream& rng) {
  if (!(delta > 0 && delta < 1)) throw PreconditionError("random_shell: need 0 < delta < 1");
  const int reach = static_cast<int>(std::ceil(lambda * (1 + delta)));
  ModeField f = shell_modes(lambda, dim, N, reach, [&](double r) { return std::abs(r / lambda - 1) < delta; });
  for (Eigen::Index k = 0; k < f.coeffs.size(); ++k) f.coeffs[k] = rng.complex_normal();
  return normalized(f);
}

ModeField gaussian_packet(int lambda, int N, const Vector2d& x0, const Vector2d& omega, double sigma) {
  if (!(sigma > 0)) throw PreconditionError("gaussian_packet: need sigma > 0");
  ModeField f = shell_modes(lambda, 2, N, lambda + 1, [&](double r) { return r >= lambda && r <= lambda + 1; });
  const Vector2d k0 = lambda * omega.normalized();
  const double pi2 = std::numbers::pi * std::numbers::pi;
  for (std::size_t k = 0; k < f.modes.size(); ++k) {
    const Vector2d d = Vector2d(f.modes[k][0], f.modes[k][1]) - k0;
    const double ph = -kTwoPi * Vector2d(f.modes[k][0], f.modes[k][1]).dot(x0);
    f.coeffs[static_cast<Eigen::Index>(k)] = std::exp(-2 * pi2 * sigma * sigma * d.squaredNorm()) * cplx(std::cos(ph), std::sin(ph));
  }
  if (f.coeffs.norm() == 0) throw NumericalError("gaussian_packet: packet underflows on the shell", 0.0);
  return normalized(f);
}

// ---- cutoffs ------------------------------------------------------------------------------

double smooth_step(double s) {
  if (s <= 0) return 0.0;
  if (s >= 1) return 1.0;
  const double a = std::exp(-1.0 / s), b = std::exp(-1.0 / (1.0 - s));
  return a / (a + b);
}

double FlatTop::operator()(double s) const {
  if (std::isinf(support)) return 1.0;
  const double a = std::abs(s);
  if (a <= core) return 1.0;
  if (a >= support) return 0.0;
  return 1.0 - smooth_step((a - core) / (support - core));
}

double TubeCutoff::spatial(const Vector2d& x) const {
  const Vector2d d(wrap_centered(x[0] - x0[0], 1.0), wrap_centered(x[1] - x0[1], 1.0));
  const double s = d.dot(omega), q = omega[0] * d[1] - omega[1] * d[0];
  return along(s) * across(q);
}

double TubeCutoff::direction(const Vector2d& eta) const {
  const double th = std::atan2(omega[0] * eta[1] - omega[1] * eta[0], omega.dot(eta));
  return angle(th);
}

TubeCutoffs make_tube_cutoffs(const GoodCover& cover) {
  const auto& M = cover.manifold;
  if (M.kind() != ManifoldKind::flat_torus || M.dim() != 2 || M.periods()[0] != 1.0 || M.periods()[1] != 1.0)
    throw DomainError("tube cutoffs: only the unit flat 2-torus is quantized");
  const double R = cover.R, L = cover.tau + cover.R;
  const double along = L + R, across = 2 * R;
  if (along * along + across * across >= 0.25)
    throw PreconditionError("tube cutoffs: need (tau + 2R)^2 + (2R)^2 < 1/4 so tubes do not meet their images");
  TubeCutoffs out;
  for (const auto& tb : cover.tubes) {
    TubeCutoff t;
    t.x0 = Vector2d(wrap_positive(tb.center.x[0], 1.0), wrap_positive(tb.center.x[1], 1.0));
    t.omega = Vector2d(tb.center.xi[0], tb.center.xi[1]).normalized();
    t.along = {L, L + R / 2};
    t.across = {R, 1.5 * R};
    t.angle = {R, 1.5 * R};
    out.tilde.push_back(t);
    t.along = {L + R / 2, L + R};
    t.across = {1.5 * R, 2 * R};
    t.angle = {1.5 * R, 2 * R};
    out.wide.push_back(t);
  }
  return out;
}

// ---- beams ----------------------------------------------------------------------------------

void check_beam_regime(double R, double h, double delta1, double delta2) {
  if (!(0 < delta1 && delta1 < delta2 && delta2 < 0.5))
    throw PreconditionError("beam regime: need 0 < delta1 < delta2 < 1/2");
  if (!(h > 0 && h < 1)) throw PreconditionError("beam regime: need 0 < h < 1");
  const double lo = std::pow(h, delta2), hi = std::pow(h, delta1);
  if (R < lo || R > hi)
    throw PreconditionError("beam regime: need h^delta2 <= R <= h^delta1, got R = " + std::to_string(R) +
                            " outside [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
}

BeamSet::BeamSet(const GridField& u, std::shared_ptr<const TubeCutoffs> cutoffs,
                 std::function<double(const Vector2d&)> psi)
    : u_(u), coeffs_(fft_forward(u)), cut_(std::move(cutoffs)), psi_(std::move(psi)) {
  if (u.dim() != 2) throw DomainError("BeamSet: beams live on the 2-torus");
  validate_grid(u);
  if (!psi_) {
    const FlatTop shell = cut_->shell;
    psi_ = [shell](const Vector2d& eta) { return shell(eta.norm() - 1.0); };
  }
  const auto sig = significant(coeffs_);
  zero_.assign(size(), 1);
  std::vector<Vector2d> etas(sig.size());
  std::vector<double> ps(sig.size());
  for (std::size_t k = 0; k < sig.size(); ++k) {
    etas[k] = eta2(mode_of_index(sig[k], 2, u.N()), u.lambda());
    ps[k] = psi_(etas[k]);
  }
  parallel_for(size(), [&](std::size_t j) {
    for (std::size_t k = 0; k < sig.size(); ++k)
      if (ps[k] != 0.0 && cut_->tilde[j].direction(etas[k]) != 0.0) {
        zero_[j] = 0;
        return;
      }
  });
}

std::size_t BeamSet::size() const { return cut_->tilde.size(); }
bool BeamSet::is_zero(std::size_t j) const { return zero_.at(j) != 0; }

std::vector<cplx> BeamSet::frequency_part(std::size_t j) const {
  std::vector<cplx> c = coeffs_;
  const TubeCutoff& t = cut_->tilde.at(j);
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (c[k] == cplx(0)) continue;
    const Vector2d eta = eta2(mode_of_index(k, 2, u_.N()), u_.lambda());
    c[k] *= t.direction(eta) * psi_(eta);
  }
  return c;
}

GridField BeamSet::beam(std::size_t j) const {
  if (is_zero(j)) return GridField(2, u_.N(), u_.h());
  GridField v = fft_inverse(frequency_part(j), 2, u_.N(), u_.h());
  const TubeCutoff& t = cut_->tilde[j];
  for (std::size_t i = 0; i < v.size(); ++i) {
    const VectorXd x = v.node(i);
    v[i] *= t.spatial(Vector2d(x[0], x[1]));
  }
  return v;
}

GridField BeamSet::sum(const std::vector<std::size_t>& subset) const {
  GridField out(2, u_.N(), u_.h());
  for (std::size_t j : subset)
    if (!is_zero(j)) out += beam(j);
  return out;
}

GridField BeamSet::residual() const {
  std::vector<std::size_t> all(size());
  for (std::size_t j = 0; j < all.size(); ++j) all[j] = j;
  return u_ - sum(all);
}

BeamSet beam_decompose(const GridField& u, const GoodCover& cover, double delta1, double delta2) {
  check_beam_regime(cover.R, u.h(), delta1, delta2);
  return BeamSet(u, std::make_shared<const TubeCutoffs>(make_tube_cutoffs(cover)));
}

// ---- masses ---------------------------------------------------------------------------------

int dyadic_bucket(double value) {
  if (!(value > 0)) return kOverflowBucket;
  int e = 0;
  std::frexp(value, &e);  // value in [2^(e-1), 2^e)
  return std::max(-1, -e);
}

int dyadic_class(double value) {
  if (!(value > 0)) return kOverflowClass;
  int e = 0;
  const double f = std::frexp(value, &e);  // value in (2^(e-1), 2^e] unless f == 1/2
  return f == 0.5 ? e - 1 : e;
}

namespace {

void finish_profile(MassProfile& p) {
  const std::size_t n = p.mass_u.size();
  p.mass.resize(n);
  p.bucket.resize(n);
  for (std::size_t j = 0; j < n; ++j) {
    p.mass[j] = p.mass_u[j] + p.mass_Pu[j] / p.h;
    p.bucket[j] = p.norm_PT > 0 ? dyadic_bucket(p.mass[j] / p.norm_PT) : kOverflowBucket;
    p.buckets[p.bucket[j]].push_back(j);
  }
}

}  // namespace

MassProfile mass_filter(const ModeField& u, const TubeCutoffs& cut, double T) {
  if (!(T >= 1)) throw PreconditionError("mass_filter: need T >= 1");
  if (u.dim != 2) throw DomainError("mass_filter: torus(2) only");
  const double lam = 1.0 / (kTwoPi * u.h);
  MassProfile p;
  p.T = T;
  p.h = u.h;
  const std::size_t K = u.modes.size();
  std::vector<double> pm(K), th(K);
  double nu = 0, npu = 0;
  int reach = 0;
  for (std::size_t k = 0; k < K; ++k) {
    pm[k] = P_multiplier(u.modes[k], 2, lam);
    th[k] = std::atan2(double(u.modes[k][1]), double(u.modes[k][0]));
    nu += std::norm(u.coeffs[static_cast<Eigen::Index>(k)]);
    npu += std::norm(u.coeffs[static_cast<Eigen::Index>(k)] * pm[k]);
    reach = std::max(reach, std::max(std::abs(u.modes[k][0]), std::abs(u.modes[k][1])));
  }
  p.norm_PT = std::sqrt(nu) + T / u.h * std::sqrt(npu);
  const std::size_t J = cut.wide.size();
  p.mass_u.assign(J, 0.0);
  p.mass_Pu.assign(J, 0.0);
  if (J == 0 || K == 0) {
    finish_profile(p);
    return p;
  }

  std::vector<std::size_t> order(K);
  for (std::size_t k = 0; k < K; ++k) order[k] = k;
  std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return th[a] < th[b]; });
  std::vector<double> sorted_th(K);
  for (std::size_t k = 0; k < K; ++k) sorted_th[k] = th[order[k]];

  const double nu_max = 2.0 * std::sqrt(2.0) * reach + 4;
  const ProfileTransform BL(cut.wide[0].along, nu_max), BW(cut.wide[0].across, nu_max);

  parallel_for(J, [&](std::size_t j) {
    const TubeCutoff& t = cut.wide[j];
    const double th0 = std::atan2(t.omega[1], t.omega[0]);
    const double w = t.angle.support;
    std::vector<std::size_t> sel;
    auto take = [&](double a, double b) {
      auto it = std::lower_bound(sorted_th.begin(), sorted_th.end(), a);
      for (; it != sorted_th.end() && *it < b; ++it) sel.push_back(order[it - sorted_th.begin()]);
    };
    const double pi = std::numbers::pi;
    double a = th0 - w, b = th0 + w;
    if (a < -pi) {
      take(a + 2 * pi, pi + 1);
      a = -pi - 1;
    }
    if (b > pi) {
      take(-pi - 1, b - 2 * pi);
      b = pi + 1;
    }
    take(a, b);
    std::vector<cplx> v;
    std::vector<double> q;
    std::vector<Vector2d> mm;
    for (std::size_t k : sel) {
      const Vector2d eta = eta2(u.modes[k], lam);
      const double f = t.direction(eta) * cut.shell_wide(eta.norm() - 1.0);
      if (f == 0) continue;
      const Vector2d m(u.modes[k][0], u.modes[k][1]);
      const double ph = kTwoPi * m.dot(t.x0);
      v.push_back(f * u.coeffs[static_cast<Eigen::Index>(k)] * cplx(std::cos(ph), std::sin(ph)));
      q.push_back(pm[k]);
      mm.push_back(m);
    }
    const double g0 = BL(0) * BW(0);
    double su = 0, sp = 0;
    for (std::size_t x = 0; x < v.size(); ++x) {
      su += std::norm(v[x]) * g0;
      sp += std::norm(v[x]) * q[x] * q[x] * g0;
      for (std::size_t y = x + 1; y < v.size(); ++y) {
        const Vector2d k = mm[x] - mm[y];
        const double g = BL(k.dot(t.omega)) * BW(t.omega[0] * k[1] - t.omega[1] * k[0]);
        const double re = std::real(v[x] * std::conj(v[y])) * g;
        su += 2 * re;
        sp += 2 * re * q[x] * q[y];
      }
    }
    p.mass_u[j] = std::sqrt(std::max(0.0, su));
    p.mass_Pu[j] = std::sqrt(std::max(0.0, sp));
  });
  finish_profile(p);
  return p;
}

MassProfile mass_filter(const GridField& u, const TubeCutoffs& cut, double T) {
  if (!(T >= 1)) throw PreconditionError("mass_filter: need T >= 1");
  if (u.dim() != 2) throw DomainError("mass_filter: torus(2) only");
  validate_grid(u);
  MassProfile p;
  p.T = T;
  p.h = u.h();
  const GridField Pu = P_apply(u);
  p.norm_PT = u.l2() + T / u.h() * Pu.l2();
  const auto cu = fft_forward(u), cp = fft_forward(Pu);
  const std::size_t J = cut.wide.size();
  p.mass_u.assign(J, 0.0);
  p.mass_Pu.assign(J, 0.0);
  parallel_for(J, [&](std::size_t j) {
    const TubeCutoff& t = cut.wide[j];
    std::vector<cplx> a(cu.size()), b(cu.size());
    bool any = false;
    for (std::size_t k = 0; k < cu.size(); ++k) {
      const Vector2d eta = eta2(mode_of_index(k, 2, u.N()), u.lambda());
      const double f = t.direction(eta) * cut.shell_wide(eta.norm() - 1.0);
      a[k] = f * cu[k];
      b[k] = f * cp[k];
      any = any || (f != 0 && (cu[k] != cplx(0) || cp[k] != cplx(0)));
    }
    if (!any) return;
    GridField va = fft_inverse(a, 2, u.N(), u.h()), vb = fft_inverse(b, 2, u.N(), u.h());
    for (std::size_t i = 0; i < va.size(); ++i) {
      const VectorXd x = va.node(i);
      const double s = t.spatial(Vector2d(x[0], x[1]));
      va[i] *= s;
      vb[i] *= s;
    }
    p.mass_u[j] = va.l2();
    p.mass_Pu[j] = vb.l2();
  });
  finish_profile(p);
  return p;
}

std::vector<int> ball_filter(const GridField& w, const std::vector<VectorXd>& centers, double R, int k,
                             double norm_PT) {
  if (!(R > 0)) throw PreconditionError("ball_filter: need R > 0");
  const int n = w.dim(), N = w.N();
  const double scale = std::pow(w.h(), 0.5 * (n - 1)) * std::pow(R, 0.5 * (1 - n)) * std::ldexp(1.0, k);
  std::vector<int> out(centers.size(), kOverflowClass);
  const int reach = static_cast<int>(std::ceil(R * N));
  parallel_for(centers.size(), [&](std::size_t a) {
    const VectorXd& c = centers[a];
    double mx = 0;
    const int c0 = static_cast<int>(std::lround(c[0] * N));
    if (n == 1) {
      for (int d0 = -reach; d0 <= reach; ++d0) {
        const int i0 = ((c0 + d0) % N + N) % N;
        if (std::abs(wrap_centered(double(i0) / N - c[0], 1.0)) <= R) mx = std::max(mx, std::abs(w[i0]));
      }
    } else {
      const int c1 = static_cast<int>(std::lround(c[1] * N));
      for (int d0 = -reach; d0 <= reach; ++d0)
        for (int d1 = -reach; d1 <= reach; ++d1) {
          const int i0 = ((c0 + d0) % N + N) % N, i1 = ((c1 + d1) % N + N) % N;
          if (torus_distance(Vector2d(double(i0) / N, double(i1) / N), Vector2d(c[0], c[1])) <= R)
            mx = std::max(mx, std::abs(w[w.index(i0, i1)]));
        }
    }
    out[a] = norm_PT > 0 ? dyadic_class(scale * mx / norm_PT) : kOverflowClass;
  });
  return out;
}

std::pair<GridField, GridField> split_good_bad(const BeamSet& beams, const std::vector<std::size_t>& subset,
                                               const std::vector<char>& is_bad) {
  if (is_bad.size() != beams.size()) throw PreconditionError("split_good_bad: need a loop class for every tube");
  std::vector<std::size_t> good, bad;
  for (std::size_t j : subset) (is_bad.at(j) ? bad : good).push_back(j);
  return {beams.sum(good), beams.sum(bad)};
}

}  // namespace geobeam
