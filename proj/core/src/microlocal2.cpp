#include "geobeam/microlocal2.hpp"

#include <algorithm>
#include <cmath>
#include <mutex>
#include <numeric>
#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/manifold.hpp"
#include "geobeam/parallel.hpp"

namespace geobeam {

using Eigen::VectorXd;

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

const FlatTop kKap{1.0, 2.0};
const FlatTop kPsi{0.25, 0.375};
const FlatTop kChi{0.5, 1.0};

// Linear interpolation table of a flat-top profile on [0, support]; exact 1 on the core.
class ProfileTable {
 public:
  explicit ProfileTable(const FlatTop& f, int intervals = 1 << 16) : support_(f.support) {
    step_ = f.support / intervals;
    inv_step_ = intervals / f.support;
    v_.resize(intervals + 2);
    for (int i = 0; i <= intervals + 1; ++i) v_[i] = f(i * step_);
  }
  double operator()(double s) const {
    if (s >= support_) return 0.0;
    const double x = s * inv_step_;
    const int i = static_cast<int>(x);
    const double t = x - i;
    return v_[i] + t * (v_[i + 1] - v_[i]);
  }

 private:
  double support_, step_, inv_step_;
  std::vector<double> v_;
};

const ProfileTable& kap_table() {
  static const ProfileTable t(kKap);
  return t;
}
const ProfileTable& psi_table() {
  static const ProfileTable t(kPsi);
  return t;
}

std::size_t grid_index(int dim, int N, long long i0, long long i1) {
  const long long a = ((i0 % N) + N) % N;
  if (dim == 1) return static_cast<std::size_t>(a);
  const long long b = ((i1 % N) + N) % N;
  return static_cast<std::size_t>(a * N + b);
}

std::size_t coeff_index(int dim, int N, int m0, int m1) {
  if (dim == 1) return fft_index(m0, N);
  return static_cast<std::size_t>(fft_index(m0, N)) * N + fft_index(m1, N);
}

double torus_dist(const VectorXd& x, const VectorXd& y) {
  double s = 0;
  for (Eigen::Index i = 0; i < x.size(); ++i) {
    const double d = wrap_centered(x[i] - y[i], 1.0);
    s += d * d;
  }
  return std::sqrt(s);
}

GridField random_field(int dim, int N, double h, std::uint64_t seed, std::uint64_t stream) {
  GridField g(dim, N, h);
  Stream rng(seed, stream);
  for (std::size_t i = 0; i < g.size(); ++i) g[i] = rng.complex_normal();
  return g;
}

template <class F, class G>
Symbol2M::Fn combine(const F& f, const G& g) {
  if (!f) return g;
  if (!g) return f;
  return [f, g](const VectorXd& x) { return f(x) * g(x); };
}

}  // namespace

double kap_profile(double s) { return kKap(s); }
double psi_profile(double s) { return kPsi(s); }

// ---- symbols --------------------------------------------------------------------------------

double Symbol2M::transverse(const VectorXd& x) const { return wrap_centered(x[axis] - center, 1.0); }

cplx Symbol2M::operator()(const VectorXd& x, const VectorXd& eta, double lam) const {
  cplx s = 0;
  for (const auto& t : terms)
    s += (t.spatial ? t.spatial(x) : cplx(1)) * (t.frequency ? t.frequency(eta) : cplx(1)) *
         (t.profile ? t.profile(lam) : cplx(1));
  return s;
}

Symbol2M Symbol2M::identity() {
  Symbol2M a;
  a.terms.push_back({});
  return a;
}

Symbol2M product(const Symbol2M& a, const Symbol2M& b) {
  if (a.axis != b.axis || a.center != b.center || a.r != b.r)
    throw DomainError("product: symbols use different transverse coordinates");
  Symbol2M c;
  c.r = a.r;
  c.axis = a.axis;
  c.center = a.center;
  c.order = a.order + b.order;
  for (const auto& s : a.terms)
    for (const auto& t : b.terms) {
      Symbol2M::Term u;
      u.spatial = combine(s.spatial, t.spatial);
      u.frequency = combine(s.frequency, t.frequency);
      if (!s.profile) u.profile = t.profile;
      else if (!t.profile) u.profile = s.profile;
      else u.profile = [p = s.profile, q = t.profile](double l) { return p(l) * q(l); };
      c.terms.push_back(std::move(u));
    }
  if (a.box_lo.size() && b.box_lo.size()) {
    c.box_lo = a.box_lo.cwiseMax(b.box_lo);
    c.box_hi = a.box_hi.cwiseMin(b.box_hi);
  } else {
    c.box_lo = a.box_lo.size() ? a.box_lo : b.box_lo;
    c.box_hi = a.box_hi.size() ? a.box_hi : b.box_hi;
  }
  return c;
}

double support_violation(const Symbol2M& a, int dim, Stream& rng, int samples) {
  if (a.box_lo.size() != 2 * dim) return 0.0;
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    VectorXd x(dim), eta(dim);
    bool inside = true;
    for (int i = 0; i < dim; ++i) {
      x[i] = rng.uniform();
      eta[i] = rng.uniform(-2.0, 2.0);
      inside = inside && x[i] >= a.box_lo[i] && x[i] <= a.box_hi[i] && eta[i] >= a.box_lo[dim + i] &&
               eta[i] <= a.box_hi[dim + i];
    }
    if (!inside) worst = std::max(worst, std::abs(a(x, eta, rng.uniform(-10.0, 10.0))));
  }
  return worst;
}

double lambda_derivative_ratio(const Symbol2M& a, int dim, Stream& rng, int samples) {
  const double e = 1e-3;
  double worst = 0;
  for (int s = 0; s < samples; ++s) {
    VectorXd x(dim), eta(dim);
    for (int i = 0; i < dim; ++i) {
      const bool boxed = a.box_lo.size() == 2 * dim;
      x[i] = boxed ? rng.uniform(a.box_lo[i], a.box_hi[i]) : rng.uniform();
      eta[i] = boxed ? rng.uniform(a.box_lo[dim + i], a.box_hi[dim + i]) : rng.uniform(-1.5, 1.5);
    }
    const double l = rng.uniform(-8.0, 8.0);
    const cplx f0 = a(x, eta, l), fp = a(x, eta, l + e), fm = a(x, eta, l - e);
    const double jl = std::sqrt(1 + l * l);
    worst = std::max({worst, std::abs(f0) / std::pow(jl, a.order), std::abs(fp - fm) / (2 * e) / std::pow(jl, a.order - 1),
                      std::abs(fp - 2.0 * f0 + fm) / (e * e) / std::pow(jl, a.order - 2)});
  }
  return worst;
}

int micro_grid_size(double lambda, double rho) {
  const double h = h_from_lambda(lambda);
  const double need = std::max(4 * lambda, 8 * std::pow(h, -rho));
  int N = 8;
  while (N < need * (1 - 1e-12)) N *= 2;
  return N;
}

void check_resolution(int N, double h, double rho) {
  const double need = 8 * std::pow(h, -rho);
  if (N < need * (1 - 1e-12))
    throw PreconditionError("second-microlocal grid: need N >= 8 h^-rho = " + std::to_string(need) + ", got N = " +
                            std::to_string(N));
}

// ---- quantization -----------------------------------------------------------------------------

Op2Plan::Op2Plan(const Symbol2M& a, int dim, int N, double h, double rho) : dim_(dim), N_(N), h_(h) {
  if (!(rho >= 0 && rho < 1)) throw PreconditionError("Op2Plan: need 0 <= rho < 1");
  if (a.axis < 0 || a.axis >= dim) throw PreconditionError("Op2Plan: transverse axis outside the dimension");
  GridField proto(dim, N, h);
  const double lam_scale = std::pow(h, -rho);
  const double lambda = proto.lambda();
  for (const auto& t : a.terms) {
    std::vector<cplx> sp, fr;
    if (t.spatial || t.profile) {
      sp.resize(proto.size());
      for (std::size_t i = 0; i < sp.size(); ++i) {
        const VectorXd x = proto.node(i);
        cplx v = t.spatial ? t.spatial(x) : cplx(1);
        if (t.profile) v *= t.profile(lam_scale * a.transverse(x));
        if (!std::isfinite(v.real()) || !std::isfinite(v.imag())) throw DomainError("Op2Plan: non-finite symbol");
        sp[i] = v;
      }
    }
    if (t.frequency) {
      fr.resize(proto.size());
      for (std::size_t k = 0; k < fr.size(); ++k) {
        fr[k] = t.frequency(eta_of_index(k, dim, N, lambda));
        if (!std::isfinite(fr[k].real()) || !std::isfinite(fr[k].imag())) throw DomainError("Op2Plan: non-finite symbol");
      }
    }
    spatial_.push_back(std::move(sp));
    frequency_.push_back(std::move(fr));
  }
}

GridField Op2Plan::apply(const GridField& u) const {
  if (u.N() != N_ || u.dim() != dim_) throw PreconditionError("Op2Plan: grid mismatch");
  const auto c = fft_forward(u);
  GridField out(dim_, N_, h_);
  for (std::size_t k = 0; k < spatial_.size(); ++k) {
    std::vector<cplx> ct = c;
    if (!frequency_[k].empty())
      for (std::size_t i = 0; i < ct.size(); ++i) ct[i] *= frequency_[k][i];
    GridField v = fft_inverse(ct, dim_, N_, h_);
    if (!spatial_[k].empty())
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= spatial_[k][i];
    out += v;
  }
  return out;
}

GridField Op2Plan::apply_adjoint(const GridField& u) const {
  if (u.N() != N_ || u.dim() != dim_) throw PreconditionError("Op2Plan: grid mismatch");
  std::vector<cplx> acc(u.size(), cplx(0));
  for (std::size_t k = 0; k < spatial_.size(); ++k) {
    GridField v = u;
    if (!spatial_[k].empty())
      for (std::size_t i = 0; i < v.size(); ++i) v[i] *= std::conj(spatial_[k][i]);
    auto c = fft_forward(v);
    if (!frequency_[k].empty())
      for (std::size_t i = 0; i < c.size(); ++i) c[i] *= std::conj(frequency_[k][i]);
    for (std::size_t i = 0; i < c.size(); ++i) acc[i] += c[i];
  }
  return fft_inverse(acc, dim_, N_, h_);
}

GridField op2_apply(const Symbol2M& a, const GridField& u, double rho) {
  validate_grid(u);
  check_resolution(u.N(), u.h(), rho);
  return Op2Plan(a, u.dim(), u.N(), u.h(), rho).apply(u);
}

GridField op2_adjoint_apply(const Symbol2M& a, const GridField& u, double rho) {
  validate_grid(u);
  check_resolution(u.N(), u.h(), rho);
  return Op2Plan(a, u.dim(), u.N(), u.h(), rho).apply_adjoint(u);
}

// ---- rescaling ---------------------------------------------------------------------------------

int dilation_factor(double h, double delta, double* rounding) {
  if (!(h > 0 && h < 1)) throw PreconditionError("rescale: need 0 < h < 1");
  if (!(delta >= 0 && delta < 1)) throw PreconditionError("rescale: need 0 <= delta < 1");
  const double target = std::pow(h, -delta);
  const long D = std::lround(target);
  if (rounding) *rounding = static_cast<double>(D) - target;
  return static_cast<int>(std::max(1L, D));
}

namespace {

GridField dilate(const GridField& u, double delta, bool inverse) {
  const int D = dilation_factor(u.h(), delta);
  const int dim = u.dim(), N = u.N();
  const auto c = fft_forward(u);
  double mx = 0;
  for (const auto& z : c) mx = std::max(mx, std::abs(z));
  std::vector<cplx> out(c.size(), cplx(0));
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (std::abs(c[k]) <= 1e-14 * mx) continue;
    const int m0 = dim == 1 ? signed_freq(static_cast<int>(k), N) : signed_freq(static_cast<int>(k / N), N);
    const int m1 = dim == 1 ? 0 : signed_freq(static_cast<int>(k % N), N);
    if (inverse) {
      if (2 * std::abs(D * m0) >= N || 2 * std::abs(D * m1) >= N)
        throw DomainError("rescale: dilated mode leaves the grid band (D = " + std::to_string(D) + ")");
      out[coeff_index(dim, N, D * m0, D * m1)] = c[k];
    } else {
      if (m0 % D != 0 || m1 % D != 0)
        throw DomainError("rescale: mode not divisible by the dilation factor D = " + std::to_string(D));
      out[coeff_index(dim, N, m0 / D, m1 / D)] = c[k];
    }
  }
  return fft_inverse(out, dim, N, u.h());
}

}  // namespace

GridField rescale(const GridField& u, double delta) { return dilate(u, delta, false); }
GridField rescale_inverse(const GridField& u, double delta) { return dilate(u, delta, true); }

// ---- norm sweeps -------------------------------------------------------------------------------

PowerResult grid_operator_norm(const std::function<GridField(const GridField&)>& A,
                               const std::function<GridField(const GridField&)>& A_adjoint, const GridField& start,
                               const PowerOptions& opt) {
  const int dim = start.dim(), N = start.N();
  const double h = start.h();
  auto wrap = [&](const std::function<GridField(const GridField&)>& f) {
    return [&f, dim, N, h](const CVec& v) { return f(GridField::from_vector(dim, N, h, v)).as_vector(); };
  };
  PowerResult r = opt.method == NormMethod::power
                      ? power_norm(wrap(A), wrap(A_adjoint), start.as_vector(), opt.rel_tol, opt.max_iter)
                      : lanczos_norm(wrap(A), wrap(A_adjoint), start.as_vector(), opt.rel_tol, opt.max_iter);
  // Residuals at rounding level do not settle; below the floor they count as zero.
  if (!r.converged && r.norm < 1e-11) r.converged = true;
  if (!r.converged)
    throw NumericalError("norm iteration did not converge in " + std::to_string(opt.max_iter) +
                             " iterations (estimate " + std::to_string(r.norm) + ", last change " +
                             std::to_string(r.rel_change) + ")",
                         r.norm);
  return r;
}

namespace {

NormSweep sweep(const Symbol2M& a, const Symbol2M& b, const std::vector<double>& h_list, double rho, int dim,
                const PowerOptions& opt, bool commutator) {
  if (dim != 1 && dim != 2) throw DomainError("norm sweep: dim must be 1 or 2");
  NormSweep out;
  const Symbol2M ab = product(a, b);
  for (std::size_t i = 0; i < h_list.size(); ++i) {
    const double h = h_list[i];
    const double lambda = 1.0 / (kTwoPi * h);
    const int N = micro_grid_size(lambda, rho);
    const Op2Plan A(a, dim, N, h, rho), B(b, dim, N, h, rho), AB(ab, dim, N, h, rho);
    std::function<GridField(const GridField&)> F, Fa;
    if (commutator) {
      F = [&](const GridField& u) { return A.apply(B.apply(u)) - B.apply(A.apply(u)); };
      Fa = [&](const GridField& v) { return B.apply_adjoint(A.apply_adjoint(v)) - A.apply_adjoint(B.apply_adjoint(v)); };
    } else {
      F = [&](const GridField& u) { return A.apply(B.apply(u)) - AB.apply(u); };
      Fa = [&](const GridField& v) { return B.apply_adjoint(A.apply_adjoint(v)) - AB.apply_adjoint(v); };
    }
    const GridField start = random_field(dim, N, h, opt.seed, i);
    const PowerResult r = grid_operator_norm(F, Fa, start, opt);
    out.rows.push_back({h, N, r.norm, r.iterations});
  }
  std::vector<double> hs, ns;
  for (const auto& r : out.rows)
    if (r.norm > 1e-11) {
      hs.push_back(r.h);
      ns.push_back(r.norm);
    }
  if (hs.size() >= 2) out.fit = fit_loglog(hs, ns);
  return out;
}

}  // namespace

NormSweep composition_residual(const Symbol2M& a, const Symbol2M& b, const std::vector<double>& h_list, double rho,
                               int dim, const PowerOptions& opt) {
  return sweep(a, b, h_list, rho, dim, opt, false);
}

NormSweep commutator_norms(const Symbol2M& a, const Symbol2M& b, const std::vector<double>& h_list, double rho,
                           int dim, const PowerOptions& opt) {
  return sweep(a, b, h_list, rho, dim, opt, true);
}

// ---- coisotropic cutoffs -----------------------------------------------------------------------

struct CoisoCutoff::Modes {
  int dim = 2, N = 0;
  std::vector<int> m0, m1;
  std::vector<double> th0, th1, shell;
  std::vector<cplx> roots;  // e^{2 pi i k / N}
};

CoisoCutoff::CoisoCutoff(const VectorXd& y, double eps, double rho, double delta, double h, CoisoKind kind)
    : y_(y), eps_(eps), rho_(rho), delta_(delta), h_(h), kind_(kind) {
  if (y.size() != 1 && y.size() != 2) throw DomainError("coiso cutoff: y must have 1 or 2 coordinates");
  if (!(eps > 0)) throw DomainError("coiso cutoff: need eps > 0");
  if (!(eps < delta)) throw DomainError("coiso cutoff: need eps < delta");
  if (!(delta < 1)) throw DomainError("coiso cutoff: need delta < 1");
  if (!(rho >= 0 && rho < 1)) throw DomainError("coiso cutoff: need 0 <= rho < 1");
  if (!(h > 0 && h < 1)) throw DomainError("coiso cutoff: need 0 < h < 1");
  for (Eigen::Index i = 0; i < y_.size(); ++i) y_[i] = wrap_positive(y_[i], 1.0);
  w_ = eps * std::pow(h, rho);
}

CoisoCutoff build_coiso_cutoff(const VectorXd& y, double eps, double rho, double delta, double h, CoisoKind kind) {
  return CoisoCutoff(y, eps, rho, delta, h, kind);
}

std::shared_ptr<const CoisoCutoff::Modes> CoisoCutoff::modes_for(int dim, int N) const {
  static std::mutex mu;
  std::lock_guard<std::mutex> lock(mu);
  if (cache_ && cache_->dim == dim && cache_->N == N) return cache_;
  auto md = std::make_shared<Modes>();
  md->dim = dim;
  md->N = N;
  const double lambda = 1.0 / (kTwoPi * h_);
  const FlatTop shell{eps_, delta_};
  const int reach = static_cast<int>(std::ceil(lambda * (1 + delta_)));
  if (2 * reach >= N) throw PreconditionError("coiso cutoff: the shell does not fit in the grid band");
  for (int a = -reach; a <= reach; ++a)
    for (int b = (dim == 1 ? 0 : -reach); b <= (dim == 1 ? 0 : reach); ++b) {
      const double r = std::hypot(double(a), double(b));
      const double s = shell(r / lambda - 1.0);
      if (s == 0.0) continue;
      md->m0.push_back(a);
      md->m1.push_back(b);
      md->th0.push_back(a / r);
      md->th1.push_back(b / r);
      md->shell.push_back(s);
    }
  // Angle order: neighbouring modes rasterize nearly the same strip, which keeps the
  // accumulator rows in cache.
  std::vector<std::size_t> order(md->m0.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::vector<double> ang(order.size());
  for (std::size_t k = 0; k < order.size(); ++k) ang[k] = std::atan2(md->th1[k], md->th0[k]);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t i, std::size_t j) { return ang[i] < ang[j]; });
  auto permute = [&](auto& v) {
    auto w = v;
    for (std::size_t k = 0; k < order.size(); ++k) w[k] = v[order[k]];
    v = std::move(w);
  };
  permute(md->m0);
  permute(md->m1);
  permute(md->th0);
  permute(md->th1);
  permute(md->shell);
  md->roots.resize(N);
  for (int k = 0; k < N; ++k) md->roots[k] = std::polar(1.0, kTwoPi * k / N);
  cache_ = md;
  return md;
}

namespace {
// Mode k runs along the second axis; must agree with the choice of p in for_each_node.
template <class M>
bool steep(const M& md, std::size_t k) { return std::abs(md.th0[k]) < std::abs(md.th1[k]); }
}  // namespace

template <class Fn>
void CoisoCutoff::for_each_node(const Modes& md, std::size_t k, int N, Fn&& fn) const {
  const auto& kap = kap_table();
  const auto& psi = psi_table();
  const double sh = md.shell[k];
  const double Ls = kPsi.support * N;
  const long long m0 = md.m0[k], m1 = md.m1[k];
  if (md.dim == 1) {
    const double Y = y_[0] * N;
    for (long long i = static_cast<long long>(std::ceil(Y - Ls)); i <= static_cast<long long>(std::floor(Y + Ls)); ++i) {
      const double wgt = psi(std::abs(i - Y) / N) * sh;
      if (wgt == 0) continue;
      const long long ii = ((i % N) + N) % N;
      fn(static_cast<std::size_t>(ii), static_cast<std::size_t>(((m0 * ii) % N + N) % N), wgt);
    }
    return;
  }
  const double wN = w_ * N;
  const double inv_wN = 1.0 / wN, inv_N = 1.0 / N;
  const double Y[2] = {y_[0] * N, y_[1] * N};
  const double th[2] = {md.th0[k], md.th1[k]};
  const int p = std::abs(th[0]) >= std::abs(th[1]) ? 0 : 1, q = 1 - p;
  const double tp = th[p], tq = th[q];
  // d changes by dd per unit step of the q index.
  const double dd = p == 0 ? th[0] : -th[1];
  const long long mp = p == 0 ? m0 : m1, mq = p == 0 ? m1 : m0;
  const double range = Ls * std::abs(tp) + 2 * wN * std::abs(tq);
  const double half = 2 * wN / std::abs(tp);
  const double core = kPsi.core * N;
  const bool pow2 = (N & (N - 1)) == 0;
  const long long mask = N - 1;
  auto wrapN = [&](long long v) { return pow2 ? (v & mask) : ((v % N) + N) % N; };
  const long long mqN = wrapN(mq);
  for (long long ip = static_cast<long long>(std::ceil(Y[p] - range)); ip <= static_cast<long long>(std::floor(Y[p] + range));
       ++ip) {
    const double dp = ip - Y[p];
    const double cq = Y[q] + dp * tq / tp;
    const long long lo = static_cast<long long>(std::ceil(cq - half)), hi = static_cast<long long>(std::floor(cq + half));
    if (lo > hi) continue;
    const long long a = wrapN(ip);
    long long b = wrapN(lo);
    long long ph = wrapN(wrapN(mp * a) + wrapN(mq * b));
    double dq = lo - Y[q];
    double s = dp * tp + dq * tq;
    double d = p == 0 ? th[0] * dq - th[1] * dp : th[0] * dp - th[1] * dq;
    for (long long iq = lo; iq <= hi; ++iq) {
      const double ad = std::abs(d), as = std::abs(s);
      double wgt = ad <= wN ? 1.0 : kap(ad * inv_wN);
      if (as > core) wgt *= psi(as * inv_N);
      if (wgt != 0) {
        // Index in (p, q) order: callers use a transposed buffer when p == 1.
        fn(static_cast<std::size_t>(a * N + b), static_cast<std::size_t>(ph), wgt * sh);
      }
      s += tq;
      d += dd;
      ph += mqN;
      if (ph >= N) ph -= N;
      if (++b == N) b = 0;
    }
  }
}

double CoisoCutoff::symbol(const VectorXd& x, const VectorXd& eta) const {
  if (x.size() != y_.size() || eta.size() != y_.size()) throw DomainError("coiso symbol: dimension mismatch");
  const double r = eta.norm();
  if (kind_ == CoisoKind::chi_hy) return kChi(torus_dist(x, y_) / w_) * kChi((r - 1.0) / eps_);
  if (r == 0) return 0.0;
  const double sh = FlatTop{eps_, delta_}(r - 1.0);
  VectorXd d(x.size());
  for (Eigen::Index i = 0; i < x.size(); ++i) d[i] = wrap_centered(x[i] - y_[i], 1.0);
  const VectorXd th = eta / r;
  const double s = d.dot(th);
  if (x.size() == 1) return kPsi(s) * sh;
  const double perp = th[0] * d[1] - th[1] * d[0];
  return kKap(perp / w_) * kPsi(s) * sh;
}

GridField CoisoCutoff::apply(const GridField& u) const {
  if (u.dim() != y_.size()) throw DomainError("coiso cutoff: grid dimension differs from y");
  if (std::abs(u.h() / h_ - 1) > 1e-12) throw PreconditionError("coiso cutoff: grid h differs from the cutoff h");
  check_resolution(u.N(), h_, rho_);
  const int dim = u.dim(), N = u.N();
  if (kind_ == CoisoKind::chi_hy) {
    auto c = fft_forward(u);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= kChi((eta_of_index(k, dim, N, u.lambda()).norm() - 1.0) / eps_);
    GridField v = fft_inverse(c, dim, N, h_);
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kChi(torus_dist(v.node(i), y_) / w_);
    return v;
  }
  return apply_coeffs(fft_forward(u), dim, N);
}

GridField CoisoCutoff::apply(const ModeField& u) const {
  if (u.dim != y_.size()) throw DomainError("coiso cutoff: grid dimension differs from y");
  if (std::abs(u.h / h_ - 1) > 1e-12) throw PreconditionError("coiso cutoff: grid h differs from the cutoff h");
  check_resolution(u.N, h_, rho_);
  if (kind_ == CoisoKind::chi_hy) return apply(u.to_grid());
  const int N = u.N;
  std::vector<cplx> c(u.dim == 1 ? N : static_cast<std::size_t>(N) * N, cplx(0));
  for (std::size_t k = 0; k < u.modes.size(); ++k) {
    const auto& m = u.modes[k];
    if (2 * std::abs(m[0]) >= N || (u.dim == 2 && 2 * std::abs(m[1]) >= N))
      throw PreconditionError("coiso cutoff: mode outside the grid band");
    c[coeff_index(u.dim, N, m[0], u.dim == 2 ? m[1] : 0)] += u.coeffs[static_cast<Eigen::Index>(k)];
  }
  return apply_coeffs(c, u.dim, N);
}

GridField CoisoCutoff::apply_coeffs(const std::vector<cplx>& c, int dim, int N) const {
  const auto md = modes_for(dim, N);
  const std::size_t K = md->m0.size();
  const int W = std::max(1, std::min<int>(worker_count(), static_cast<int>(K)));
  const std::size_t M = c.size();
  std::vector<std::vector<cplx>> acc(W, std::vector<cplx>(dim == 1 ? M : 2 * M, cplx(0)));
  parallel_for(W, [&](std::size_t w) {
    auto& out = acc[w];
    for (std::size_t k = K * w / W; k < K * (w + 1) / W; ++k) {
      const cplx cm = c[coeff_index(dim, N, md->m0[k], md->m1[k])];
      if (cm == cplx(0)) continue;
      cplx* dst = out.data() + (dim == 2 && steep(*md, k) ? M : 0);
      for_each_node(*md, k, N, [&](std::size_t idx, std::size_t ph, double wgt) { dst[idx] += wgt * cm * md->roots[ph]; });
    }
  });
  GridField v(dim, N, h_);
  for (int w = 1; w < W; ++w)
    for (std::size_t i = 0; i < acc[0].size(); ++i) acc[0][i] += acc[w][i];
  for (std::size_t i = 0; i < M; ++i) v[i] = acc[0][i];
  if (dim == 2)
    for (std::size_t a = 0; a < static_cast<std::size_t>(N); ++a)
      for (std::size_t b = 0; b < static_cast<std::size_t>(N); ++b) v[b * N + a] += acc[0][M + a * N + b];
  return v;
}

GridField CoisoCutoff::apply_adjoint(const GridField& u) const {
  if (u.dim() != y_.size()) throw DomainError("coiso cutoff: grid dimension differs from y");
  if (std::abs(u.h() / h_ - 1) > 1e-12) throw PreconditionError("coiso cutoff: grid h differs from the cutoff h");
  check_resolution(u.N(), h_, rho_);
  const int dim = u.dim(), N = u.N();
  if (kind_ == CoisoKind::chi_hy) {
    GridField v = u;
    for (std::size_t i = 0; i < v.size(); ++i) v[i] *= kChi(torus_dist(v.node(i), y_) / w_);
    auto c = fft_forward(v);
    for (std::size_t k = 0; k < c.size(); ++k) c[k] *= kChi((eta_of_index(k, dim, N, u.lambda()).norm() - 1.0) / eps_);
    return fft_inverse(c, dim, N, h_);
  }
  const auto md = modes_for(dim, N);
  const std::size_t K = md->m0.size();
  std::vector<cplx> c(u.size(), cplx(0));
  const double inv = 1.0 / static_cast<double>(u.size());
  std::vector<cplx> ut;
  if (dim == 2) {
    ut.resize(u.size());
    for (std::size_t a = 0; a < static_cast<std::size_t>(N); ++a)
      for (std::size_t b = 0; b < static_cast<std::size_t>(N); ++b) ut[a * N + b] = u[b * N + a];
  }
  parallel_for(K, [&](std::size_t k) {
    cplx s = 0;
    const cplx* src = dim == 2 && steep(*md, k) ? ut.data() : u.values().data();
    for_each_node(*md, k, N, [&](std::size_t idx, std::size_t ph, double wgt) { s += wgt * std::conj(md->roots[ph]) * src[idx]; });
    c[coeff_index(dim, N, md->m0[k], md->m1[k])] = s * inv;
  });
  return fft_inverse(c, dim, N, h_);
}

// ---- uncertainty and orthogonality ---------------------------------------------------------------

namespace {

struct UncertaintySetup {
  double h = 0.0;
  int N = 0;
  VectorXd y0, yt;
  double t = 0.0;
};

UncertaintySetup setup_uncertainty(double t, double lambda, const MicroOptions& opt) {
  if (opt.dim != 1 && opt.dim != 2) throw DomainError("uncertainty: dim must be 1 or 2");
  UncertaintySetup s;
  s.h = h_from_lambda(lambda);
  const double lo = std::pow(s.h, opt.rho - opt.eps_q);
  if (!(opt.eps_q > 0)) throw PreconditionError("uncertainty: need eps_q > 0");
  if (!(std::abs(t) >= lo))
    throw PreconditionError("uncertainty: need h^(rho - eps_q) <= |t|, got |t| = " + std::to_string(std::abs(t)) +
                            " < " + std::to_string(lo));
  if (!(std::abs(t) < opt.eps0))
    throw PreconditionError("uncertainty: need |t| < eps0 = " + std::to_string(opt.eps0));
  s.N = micro_grid_size(lambda, opt.rho);
  const long shift = std::lround(t * s.N);
  if (shift == 0) throw PreconditionError("uncertainty: t rounds to 0 on the grid");
  s.t = static_cast<double>(shift) / s.N;
  s.y0 = VectorXd(opt.dim);
  for (int i = 0; i < opt.dim; ++i) s.y0[i] = std::round(opt.y0[i] * s.N) / s.N;
  s.yt = s.y0;
  s.yt[0] = wrap_positive(s.y0[0] + s.t, 1.0);
  return s;
}

}  // namespace

std::vector<UncertaintyRow> uncertainty_norm(const std::vector<double>& t_list, double lambda, const MicroOptions& opt) {
  std::vector<UncertaintyRow> rows;
  for (std::size_t i = 0; i < t_list.size(); ++i) {
    const auto s = setup_uncertainty(t_list[i], lambda, opt);
    const CoisoCutoff X0(s.y0, opt.eps, opt.rho, opt.delta, s.h, CoisoKind::X_y);
    const CoisoCutoff Xt(s.yt, opt.eps, opt.rho, opt.delta, s.h, CoisoKind::X_y);
    Stream rng(opt.power.seed, 0);
    ModeField f = random_shell(static_cast<int>(std::lround(lambda)), opt.dim, s.N, opt.delta, rng);
    GridField start = f.to_grid();
    if (s.t < 0) {
      // Mirror the start about y0 so that t and -t run mirror-image iterations.
      GridField m = start;
      const long c0 = std::lround(s.y0[0] * s.N);
      for (std::size_t idx = 0; idx < m.size(); ++idx) {
        const long i0 = opt.dim == 1 ? static_cast<long>(idx) : static_cast<long>(idx / s.N);
        const long i1 = opt.dim == 1 ? 0 : static_cast<long>(idx % s.N);
        m[idx] = start[grid_index(opt.dim, s.N, 2 * c0 - i0, i1)];
      }
      start = m;
    }
    const PowerResult r = grid_operator_norm([&](const GridField& u) { return X0.apply(Xt.apply(u)); },
                                             [&](const GridField& v) { return Xt.apply_adjoint(X0.apply_adjoint(v)); },
                                             start, opt.power);
    rows.push_back({t_list[i], s.t, lambda, s.h, s.N, r.norm, r.iterations});
  }
  return rows;
}

double dense_uncertainty_norm(double t, double lambda, const MicroOptions& opt) {
  const auto s = setup_uncertainty(t, lambda, opt);
  const std::size_t size = opt.dim == 1 ? s.N : static_cast<std::size_t>(s.N) * s.N;
  if (size > 16384) throw PreconditionError("dense_uncertainty_norm: grid too large for the dense oracle");
  const CoisoCutoff X0(s.y0, opt.eps, opt.rho, opt.delta, s.h, CoisoKind::X_y);
  const CoisoCutoff Xt(s.yt, opt.eps, opt.rho, opt.delta, s.h, CoisoKind::X_y);
  // Shell modes span the range of X(t)^*; columns are X(0) X(t) e_m.
  const int reach = static_cast<int>(std::ceil(lambda * (1 + opt.delta)));
  std::vector<Eigen::Vector2i> modes;
  for (int a = -reach; a <= reach; ++a)
    for (int b = (opt.dim == 1 ? 0 : -reach); b <= (opt.dim == 1 ? 0 : reach); ++b)
      if (std::abs(std::hypot(double(a), double(b)) / lambda - 1) < opt.delta) modes.emplace_back(a, b);
  Eigen::MatrixXcd cols(static_cast<Eigen::Index>(size), static_cast<Eigen::Index>(modes.size()));
  for (std::size_t k = 0; k < modes.size(); ++k) {
    ModeField e;
    e.dim = opt.dim;
    e.N = s.N;
    e.h = s.h;
    e.modes = {modes[k]};
    e.coeffs = Eigen::VectorXcd::Ones(1);
    cols.col(static_cast<Eigen::Index>(k)) = X0.apply(Xt.apply(e.to_grid())).as_vector();
  }
  const Eigen::MatrixXcd G = cols.adjoint() * cols / static_cast<double>(size);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(G, Eigen::EigenvaluesOnly);
  return std::sqrt(std::max(0.0, es.eigenvalues().maxCoeff()));
}

OrthogonalityReport almost_orthogonality(const std::vector<VectorXd>& points, double R, double lambda,
                                         const std::vector<ModeField>& samples, const MicroOptions& opt, double C_max) {
  if (points.empty()) throw PreconditionError("almost_orthogonality: need at least one point");
  if (samples.empty()) throw PreconditionError("almost_orthogonality: need at least one sample");
  if (!(R > 0)) throw PreconditionError("almost_orthogonality: need R > 0");
  const double h = h_from_lambda(lambda);
  const int n = opt.dim;
  OrthogonalityReport rep;
  rep.C_max = C_max;
  rep.a_h = std::pow(h, 2 * opt.rho - 1) / R;
  if (!(rep.a_h < 1))
    throw PreconditionError("almost_orthogonality: need h^(2 rho - 1) / R < 1, got " + std::to_string(rep.a_h));
  for (std::size_t i = 0; i < points.size(); ++i)
    for (std::size_t j = i + 1; j < points.size(); ++j)
      if (torus_dist(points[i], points[j]) < R * (1 - 1e-12))
        throw PreconditionError("almost_orthogonality: points are not R-separated");
  const double J = static_cast<double>(points.size());
  rep.bracket = 1 + std::pow(rep.a_h, 0.5 * (n - 1)) * std::pow(J, (3.0 * n + 1) / (2.0 * n)) *
                        (1 + std::pow(rep.a_h, 0.25 * (n - 1)));
  const int N = micro_grid_size(lambda, opt.rho);
  std::vector<CoisoCutoff> X;
  for (const auto& p : points) X.emplace_back(p, opt.eps, opt.rho, opt.delta, h, CoisoKind::X_y);
  for (const auto& f : samples) {
    ModeField g = f;
    g.N = N;
    g.h = h;
    const double nu = g.l2();
    if (nu == 0) throw PreconditionError("almost_orthogonality: zero sample");
    double s = 0;
    for (const auto& x : X) {
      const double v = x.apply(g).l2();
      s += v * v;
    }
    rep.sums.push_back(s / (nu * nu));
  }
  rep.max_sum = *std::max_element(rep.sums.begin(), rep.sums.end());
  rep.ratio = rep.max_sum / rep.bracket;
  rep.within = rep.ratio <= C_max;
  return rep;
}

}  // namespace geobeam
