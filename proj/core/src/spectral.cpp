#include "geobeam/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "geobeam/errors.hpp"

namespace geobeam {

using Eigen::VectorXd;
using Eigen::VectorXi;

double critical_exponent(int n) {
  if (n < 2) throw DomainError("critical_exponent: n >= 2 required");
  return 2.0 * (n + 1) / (n - 1);
}

double delta_exponent(double p, int n) {
  if (n < 2) throw DomainError("delta_exponent: n >= 2 required");
  if (!(p >= 2.0)) throw DomainError("delta_exponent: p >= 2 required");
  const double pc = critical_exponent(n);
  if (std::isinf(p)) return (n - 1) / 2.0;
  if (p >= pc) return (n - 1) / 2.0 - n / p;
  return (n - 1) / 4.0 - (n - 1) / (2.0 * p);
}

std::string family_name(FamilyKind k) {
  switch (k) {
    case FamilyKind::zonal: return "zonal";
    case FamilyKind::highest_weight: return "highest_weight";
    case FamilyKind::torus_mode: return "torus_mode";
    case FamilyKind::torus_lattice_cluster: return "torus_lattice_cluster";
  }
  return "?";
}

FamilyKind parse_family(const std::string& s) {
  if (s == "zonal") return FamilyKind::zonal;
  if (s == "highest_weight") return FamilyKind::highest_weight;
  if (s == "torus_mode") return FamilyKind::torus_mode;
  if (s == "torus_lattice_cluster") return FamilyKind::torus_lattice_cluster;
  throw DomainError("unknown eigenfunction family '" + s + "'");
}

namespace {

// log h_l for the Gegenbauer weight (1 - t^2)^{alpha - 1/2}:
// h_l = pi 2^{1-2 alpha} Gamma(l + 2 alpha) / (l! (l + alpha) Gamma(alpha)^2)
double log_gegenbauer_norm(int l, double alpha) {
  return std::log(std::numbers::pi) + (1.0 - 2.0 * alpha) * std::log(2.0) + std::lgamma(l + 2.0 * alpha) -
         std::lgamma(l + 1.0) - std::log(l + alpha) - 2.0 * std::lgamma(alpha);
}

double sphere_area(int n) {  // |S^n|
  return 2.0 * std::pow(std::numbers::pi, (n + 1) / 2.0) / std::tgamma((n + 1) / 2.0);
}

}  // namespace

double normalized_gegenbauer(int l, double alpha, double t) {
  // three-term recurrence carried out on normalized values
  double prev = 0.0;
  double cur = std::exp(-0.5 * log_gegenbauer_norm(0, alpha));
  for (int k = 0; k < l; ++k) {
    const double lk = log_gegenbauer_norm(k, alpha);
    const double lk1 = log_gegenbauer_norm(k + 1, alpha);
    const double a = 2.0 * (k + alpha) / (k + 1.0) * std::exp(0.5 * (lk - lk1));
    double b = 0.0;
    if (k > 0) b = (k + 2.0 * alpha - 1.0) / (k + 1.0) * std::exp(0.5 * (log_gegenbauer_norm(k - 1, alpha) - lk1));
    const double next = a * t * cur - b * prev;
    prev = cur;
    cur = next;
  }
  return cur;
}

EigenFamily EigenFamily::zonal(int n, int l) {
  if (n < 2) throw DomainError("zonal: n >= 2 required");
  if (l < 0) throw DomainError("zonal: degree must be >= 0");
  EigenFamily f;
  f.kind_ = FamilyKind::zonal;
  f.n_ = n;
  f.index_ = l;
  f.lambda_ = std::sqrt(static_cast<double>(l) * (l + n - 1));
  f.manifold_ = ModelManifold::sphere(n);
  const double alpha = (n - 1) / 2.0;
  // |S^n| measure: d sigma = |S^{n-1}| (1 - t^2)^{alpha - 1/2} dt d(rest)
  f.norm_ = 1.0 / std::sqrt(sphere_area(n - 1));
  f.zonal_a_.resize(l);
  f.zonal_b_.resize(l);
  for (int k = 0; k < l; ++k) {
    const double lk = log_gegenbauer_norm(k, alpha);
    const double lk1 = log_gegenbauer_norm(k + 1, alpha);
    f.zonal_a_[k] = 2.0 * (k + alpha) / (k + 1.0) * std::exp(0.5 * (lk - lk1));
    f.zonal_b_[k] =
        k > 0 ? (k + 2.0 * alpha - 1.0) / (k + 1.0) * std::exp(0.5 * (log_gegenbauer_norm(k - 1, alpha) - lk1)) : 0.0;
  }
  f.norm_ *= std::exp(-0.5 * log_gegenbauer_norm(0, alpha));
  return f;
}

EigenFamily EigenFamily::highest_weight(int n, int l) {
  if (n < 2) throw DomainError("highest_weight: n >= 2 required");
  if (l < 0) throw DomainError("highest_weight: degree must be >= 0");
  EigenFamily f;
  f.kind_ = FamilyKind::highest_weight;
  f.n_ = n;
  f.index_ = l;
  f.lambda_ = std::sqrt(static_cast<double>(l) * (l + n - 1));
  f.manifold_ = ModelManifold::sphere(n);
  // int_{S^n} |x_0 + i x_1|^{2l} = 2 pi^{(n+1)/2} l! / Gamma(l + (n+1)/2)
  const double logint = std::log(2.0) + 0.5 * (n + 1) * std::log(std::numbers::pi) + std::lgamma(l + 1.0) -
                        std::lgamma(l + 0.5 * (n + 1));
  f.norm_ = std::exp(-0.5 * logint);
  return f;
}

EigenFamily EigenFamily::torus_mode(const VectorXi& k) {
  if (k.size() < 1) throw DomainError("torus_mode: empty mode vector");
  EigenFamily f;
  f.kind_ = FamilyKind::torus_mode;
  f.n_ = static_cast<int>(k.size());
  f.index_ = k.cast<long long>().squaredNorm();
  f.lambda_ = 2.0 * std::numbers::pi * k.cast<double>().norm();
  f.manifold_ = ModelManifold::flat_torus(std::vector<double>(k.size(), 1.0));
  f.modes_ = {k};
  return f;
}

EigenFamily EigenFamily::lattice_cluster(long long N) {
  if (N < 1) throw DomainError("lattice_cluster: |k|^2 >= 1 required");
  EigenFamily f;
  f.kind_ = FamilyKind::torus_lattice_cluster;
  f.n_ = 2;
  f.index_ = N;
  f.lambda_ = 2.0 * std::numbers::pi * std::sqrt(static_cast<double>(N));
  f.manifold_ = ModelManifold::flat_torus({1.0, 1.0});
  f.modes_ = lattice_circle(N);
  if (f.modes_.empty()) throw DomainError("lattice_cluster: " + std::to_string(N) + " is not a sum of two squares");
  f.norm_ = 1.0 / std::sqrt(static_cast<double>(f.modes_.size()));
  return f;
}

std::complex<double> EigenFamily::operator()(const VectorXd& x) const {
  switch (kind_) {
    case FamilyKind::zonal: {
      const double t = std::clamp(x[n_], -1.0, 1.0);
      double prev = 0.0, cur = 1.0;
      for (int k = 0; k < index_; ++k) {
        const double next = zonal_a_[k] * t * cur - zonal_b_[k] * prev;
        prev = cur;
        cur = next;
      }
      return norm_ * cur;
    }
    case FamilyKind::highest_weight: {
      const std::complex<double> z(x[0], x[1]);
      return norm_ * std::pow(z, static_cast<int>(index_));
    }
    case FamilyKind::torus_mode:
    case FamilyKind::torus_lattice_cluster: {
      std::complex<double> s = 0.0;
      for (const auto& k : modes_) s += std::polar(1.0, 2.0 * std::numbers::pi * k.cast<double>().dot(x.head(k.size())));
      return norm_ * s;
    }
  }
  return 0.0;
}

std::complex<double> EigenFamily::at_polar(double theta, double phi) const {
  if (n_ != 2) throw DomainError("at_polar: two-sphere families only");
  VectorXd x(3);
  x << std::sin(theta) * std::cos(phi), std::sin(theta) * std::sin(phi), std::cos(theta);
  return (*this)(x);
}

std::vector<VectorXi> lattice_circle(long long N) {
  std::vector<VectorXi> out;
  if (N < 0) return out;
  const long long r = static_cast<long long>(std::floor(std::sqrt(static_cast<double>(N)))) + 1;
  for (long long a = -r; a <= r; ++a) {
    const long long rest = N - a * a;
    if (rest < 0) continue;
    const long long b = static_cast<long long>(std::llround(std::sqrt(static_cast<double>(rest))));
    if (b * b != rest) continue;
    VectorXi k(2);
    k << static_cast<int>(a), static_cast<int>(b);
    out.push_back(k);
    if (b != 0) {
      k << static_cast<int>(a), static_cast<int>(-b);
      out.push_back(k);
    }
  }
  return out;
}

long long r2(long long N) { return static_cast<long long>(lattice_circle(N).size()); }

// ---- quadrature -------------------------------------------------------------

namespace {

void gauss_legendre(int m, std::vector<double>& x, std::vector<double>& w) {
  x.assign(m, 0.0);
  w.assign(m, 0.0);
  for (int i = 0; i < (m + 1) / 2; ++i) {
    double z = std::cos(std::numbers::pi * (i + 0.75) / (m + 0.5));
    double pp = 0.0;
    for (int it = 0; it < 100; ++it) {
      double p1 = 1.0, p2 = 0.0;
      for (int j = 1; j <= m; ++j) {
        const double p3 = p2;
        p2 = p1;
        p1 = ((2.0 * j - 1.0) * z * p2 - (j - 1.0) * p3) / j;
      }
      pp = m * (z * p1 - p2) / (z * z - 1.0);
      const double dz = p1 / pp;
      z -= dz;
      if (std::abs(dz) < 1e-15) break;
    }
    x[i] = -z;
    x[m - 1 - i] = z;
    w[i] = w[m - 1 - i] = 2.0 / ((1.0 - z * z) * pp * pp);
  }
}

double sphere2_power_integral(const EigenFamily& f, double p, int order) {
  std::vector<double> t, w;
  gauss_legendre(order, t, w);
  const int nphi = 2 * order;
  // zonal and highest-weight moduli are independent of phi: one column suffices,
  // the full grid is only needed for general families
  const bool phi_free = f.kind() == FamilyKind::zonal || f.kind() == FamilyKind::highest_weight;
  double total = 0.0;
  for (int i = 0; i < order; ++i) {
    const double theta = std::acos(t[i]);
    double row = 0.0;
    const int cols = phi_free ? 1 : nphi;
    for (int j = 0; j < cols; ++j) row += std::pow(std::abs(f.at_polar(theta, 2.0 * std::numbers::pi * j / nphi)), p);
    row *= 2.0 * std::numbers::pi / cols;
    total += w[i] * row;
  }
  return total;
}

// |phi| on S^n depends on one angle for both sphere families; reduce to 1D with
// Gauss-Legendre in the angle so that the Jacobian weight stays smooth.
double sphere_n_power_integral(const EigenFamily& f, double p, int order) {
  const int n = f.dim();
  std::vector<double> t, w;
  gauss_legendre(order, t, w);
  double total = 0.0;
  if (f.kind() == FamilyKind::zonal) {
    // d sigma = |S^{n-1}| sin^{n-1}(th) d th, th in [0, pi]
    for (int i = 0; i < order; ++i) {
      const double th = 0.5 * std::numbers::pi * (1 + t[i]);
      VectorXd x = VectorXd::Zero(n + 1);
      x[n] = std::cos(th);
      x[0] = std::sin(th);
      total += 0.5 * std::numbers::pi * w[i] * std::pow(std::sin(th), n - 1) * std::pow(std::abs(f(x)), p);
    }
    return total * sphere_area(n - 1);
  }
  // highest weight: (x0, x1) = cos(psi) * circle, rest = sin(psi) * S^{n-2}, psi in [0, pi/2];
  // d sigma = 2 pi |S^{n-2}| cos(psi) sin^{n-2}(psi) d psi
  for (int i = 0; i < order; ++i) {
    const double psi = 0.25 * std::numbers::pi * (1 + t[i]);
    VectorXd x = VectorXd::Zero(n + 1);
    x[0] = std::cos(psi);
    x[n] = std::sin(psi);
    total += 0.25 * std::numbers::pi * w[i] * std::cos(psi) * std::pow(std::sin(psi), n - 2) * std::pow(std::abs(f(x)), p);
  }
  return total * 2.0 * std::numbers::pi * sphere_area(n - 2);
}

double torus_power_integral(const EigenFamily& f, double p, int N) {
  const int n = f.dim();
  if (n > 3) throw DomainError("lp_norm: torus quadrature supports n <= 3");
  long long total_pts = 1;
  for (int i = 0; i < n; ++i) total_pts *= N;
  double total = 0.0;
  VectorXd x(n);
  for (long long idx = 0; idx < total_pts; ++idx) {
    long long r = idx;
    for (int i = 0; i < n; ++i) {
      x[i] = static_cast<double>(r % N) / N;
      r /= N;
    }
    total += std::pow(std::abs(f(x)), p);
  }
  return total / static_cast<double>(total_pts);
}

double golden_max(const std::function<double(double)>& g, double a, double b) {
  const double gr = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - gr * (b - a), d = a + gr * (b - a);
  double gc = g(c), gd = g(d);
  for (int it = 0; it < 80 && b - a > 1e-14; ++it) {
    if (gc >= gd) {
      b = d; d = c; gd = gc; c = b - gr * (b - a); gc = g(c);
    } else {
      a = c; c = d; gc = gd; d = a + gr * (b - a); gd = g(d);
    }
  }
  return std::max(gc, gd);
}

double sup_norm(const EigenFamily& f, int order) {
  if (f.kind() == FamilyKind::torus_mode || f.kind() == FamilyKind::torus_lattice_cluster) {
    const int n = f.dim();
    const int N = order;
    double best = 0.0;
    VectorXd bestx = VectorXd::Zero(n);
    long long total_pts = 1;
    for (int i = 0; i < n; ++i) total_pts *= N;
    VectorXd x(n);
    for (long long idx = 0; idx < total_pts; ++idx) {
      long long r = idx;
      for (int i = 0; i < n; ++i) {
        x[i] = static_cast<double>(r % N) / N;
        r /= N;
      }
      const double v = std::abs(f(x));
      if (v > best) {
        best = v;
        bestx = x;
      }
    }
    // coordinate-wise golden refinement around the grid argmax
    for (int sweep = 0; sweep < 2; ++sweep) {
      for (int i = 0; i < n; ++i) {
        auto g = [&](double s) {
          VectorXd y = bestx;
          y[i] = s;
          return std::abs(f(y));
        };
        const double lo = bestx[i] - 1.0 / N, hi = bestx[i] + 1.0 / N;
        const double v = golden_max(g, lo, hi);
        if (v > best) {
          best = v;
          // locate the refined coordinate again by a short scan
          double bs = bestx[i], bv = -1;
          for (int k = 0; k <= 64; ++k) {
            const double s = lo + (hi - lo) * k / 64.0;
            if (g(s) > bv) { bv = g(s); bs = s; }
          }
          bestx[i] = bs;
        }
      }
    }
    return best;
  }
  if (f.dim() != 2) {
    // one-angle reduction, as for the integrals
    double best = 0.0;
    for (int i = 0; i <= order; ++i) {
      const double a = std::numbers::pi * i / order;
      VectorXd x = VectorXd::Zero(f.dim() + 1);
      x[0] = std::sin(a);
      x[f.dim()] = std::cos(a);
      best = std::max(best, std::abs(f(x)));
    }
    return best;
  }
  const int nth = order, nph = 2 * order;
  double best = -1;
  double bt = 0, bp = 0;
  for (int i = 0; i <= nth; ++i) {
    const double th = std::numbers::pi * i / nth;
    for (int j = 0; j < nph; ++j) {
      const double ph = 2.0 * std::numbers::pi * j / nph;
      const double v = std::abs(f.at_polar(th, ph));
      if (v > best) { best = v; bt = th; bp = ph; }
    }
  }
  const double dth = std::numbers::pi / nth;
  const double refined = golden_max([&](double th) { return std::abs(f.at_polar(th, bp)); },
                                    std::max(0.0, bt - dth), std::min(std::numbers::pi, bt + dth));
  return std::max(best, refined);
}

}  // namespace

LpResult lp_norm(const EigenFamily& f, double p, int order, bool volume_normalized) {
  if (!(p >= 1.0)) throw DomainError("lp_norm: p >= 1 required");
  const bool torus = f.kind() == FamilyKind::torus_mode || f.kind() == FamilyKind::torus_lattice_cluster;
  int kmax = 0;
  for (const auto& k : f.modes()) kmax = std::max(kmax, k.cwiseAbs().maxCoeff());
  const double lam = torus ? static_cast<double>(kmax) : f.frequency();
  const int min_order = static_cast<int>(std::ceil(4.0 * lam));
  if (order == 0) {
    if (std::isinf(p)) order = std::max(16, min_order);
    else if (torus) order = std::max({16, min_order, static_cast<int>(std::ceil(p * kmax)) + 1});
    else order = std::max({16, min_order, static_cast<int>(std::ceil(p * f.index() / 2.0)) + 2});
  }
  if (order < min_order)
    throw PreconditionError("lp_norm: quadrature order " + std::to_string(order) + " below 4*lambda = " +
                            std::to_string(min_order));
  const double vol = torus ? 1.0 : sphere_area(f.dim());
  LpResult res;
  res.order = order;
  if (std::isinf(p)) {
    res.norm = sup_norm(f, order);
    const double twice = sup_norm(f, 2 * order);
    res.doubling_change = std::abs(twice - res.norm) / std::max(twice, 1e-300);
    res.norm = std::max(res.norm, twice);
  } else {
    auto integral = [&](int m) {
      if (torus) return torus_power_integral(f, p, m);
      if (f.dim() == 2) return sphere2_power_integral(f, p, m);
      return sphere_n_power_integral(f, p, m);
    };
    const double a = integral(order);
    const double b = integral(2 * order);
    res.norm = std::pow(b, 1.0 / p);
    res.doubling_change = std::abs(std::pow(a, 1.0 / p) - res.norm) / std::max(res.norm, 1e-300);
    if (volume_normalized) res.norm *= std::pow(vol, -1.0 / p);
  }
  if (res.doubling_change > 1e-4)
    throw NumericalError("lp_norm: quadrature under-resolved (doubling change " + std::to_string(res.doubling_change) + ")",
                         res.doubling_change);
  return res;
}

ExponentFit exponent_fit(FamilyKind kind, int n, double p, const std::vector<int>& degrees) {
  if (degrees.size() < 5) throw PreconditionError("exponent_fit: at least 5 family members required");
  const auto [mn, mx] = std::minmax_element(degrees.begin(), degrees.end());
  ExponentFit out;
  for (int l : degrees) {
    EigenFamily f = kind == FamilyKind::zonal ? EigenFamily::zonal(n, l)
                    : kind == FamilyKind::highest_weight ? EigenFamily::highest_weight(n, l)
                                                         : throw DomainError("exponent_fit: sphere families only");
    out.lambdas.push_back(f.frequency());
    out.norms.push_back(lp_norm(f, p).norm);
  }
  const double octaves = std::log2(out.lambdas[mx - degrees.begin()] / out.lambdas[mn - degrees.begin()]);
  if (octaves < 2.0 - 1e-9) throw PreconditionError("exponent_fit: members must span >= 2 octaves of lambda");
  out.fit = fit_loglog(out.lambdas, out.norms);
  out.target = delta_exponent(p, n);
  return out;
}

ClusterGrowth cluster_linf_growth(long long max_n, long long min_n) {
  ClusterGrowth g;
  std::vector<double> lx, ly, rx, ry;
  double record = 0.0;
  for (long long N = std::max(1LL, min_n); N <= max_n; ++N) {
    const long long c = r2(N);
    if (c == 0) continue;
    const double ratio = std::sqrt(static_cast<double>(c));
    g.radii_squared.push_back(N);
    g.ratios.push_back(ratio);
    lx.push_back(0.5 * std::log(static_cast<double>(N)));
    ly.push_back(std::log(ratio));
    if (ratio > record) {
      record = ratio;
      rx.push_back(lx.back());
      ry.push_back(ly.back());
    }
  }
  if (lx.size() < 2) throw DomainError("cluster_linf_growth: no admissible radii in range");
  g.fit = fit_line(lx, ly);
  if (rx.size() >= 2) g.record_fit = fit_line(rx, ry);
  return g;
}

double laplacian_residual(const EigenFamily& f, const std::vector<VectorXd>& points) {
  const double lam2 = f.frequency() * f.frequency();
  double worst = 0.0, scale = 0.0;
  const bool torus = f.kind() == FamilyKind::torus_mode || f.kind() == FamilyKind::torus_lattice_cluster;
  for (const auto& x : points) {
    std::complex<double> lap = 0.0;
    const std::complex<double> v = f(x);
    scale = std::max(scale, std::abs(v));
    if (torus) {
      const double hs = 1e-4;
      for (int i = 0; i < f.dim(); ++i) {
        VectorXd a = x, b = x;
        a[i] += hs;
        b[i] -= hs;
        lap += (f(a) - 2.0 * v + f(b)) / (hs * hs);
      }
    } else {
      if (f.dim() != 2) throw DomainError("laplacian_residual: two-sphere or torus families only");
      const double th = std::acos(std::clamp(x[2], -1.0, 1.0));
      const double ph = std::atan2(x[1], x[0]);
      const double hs = 1e-4;
      auto F = [&](double a, double b) { return f.at_polar(a, b); };
      const std::complex<double> ftt = (F(th + hs, ph) - 2.0 * v + F(th - hs, ph)) / (hs * hs);
      const std::complex<double> ft = (F(th + hs, ph) - F(th - hs, ph)) / (2 * hs);
      const std::complex<double> fpp = (F(th, ph + hs) - 2.0 * v + F(th, ph - hs)) / (hs * hs);
      lap = ftt + std::cos(th) / std::sin(th) * ft + fpp / (std::sin(th) * std::sin(th));
    }
    worst = std::max(worst, std::abs(-lap - lam2 * v));
  }
  return worst / (lam2 * std::max(scale, 1e-300));
}

}  // namespace geobeam
