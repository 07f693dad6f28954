#include "geobeam/manifold.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <sstream>

#include "geobeam/errors.hpp"

namespace geobeam {

using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string chart_name(Chart c) {
  switch (c) {
    case Chart::native: return "native";
    case Chart::polar: return "polar";
    case Chart::stereo_north: return "stereo_north";
    case Chart::stereo_south: return "stereo_south";
  }
  return "?";
}

double wrap_centered(double d, double period) {
  double r = std::fmod(d + 0.5 * period, period);
  if (r < 0) r += period;
  return r - 0.5 * period;
}

double wrap_positive(double x, double period) {
  double r = std::fmod(x, period);
  if (r < 0) r += period;
  if (r >= period) r -= period;
  return r;
}

double Profile::d1(double s) const {
  const double w = 2.0 * std::numbers::pi / period;
  double out = 0.0;
  if (basis == Basis::trigonometric) {
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
      const double a = coeffs[2 * k - 1];
      const double b = 2 * k < coeffs.size() ? coeffs[2 * k] : 0.0;
      const double kw = k * w;
      out += kw * (-a * std::sin(kw * s) + b * std::cos(kw * s));
    }
    return out;
  }
  const double c = std::cos(w * s);
  const double dc = -w * std::sin(w * s);
  for (std::size_t k = 1; k < coeffs.size(); ++k) out += k * coeffs[k] * std::pow(c, k - 1.0) * dc;
  return out;
}

double Profile::d2(double s) const {
  const double w = 2.0 * std::numbers::pi / period;
  double out = 0.0;
  if (basis == Basis::trigonometric) {
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
      const double a = coeffs[2 * k - 1];
      const double b = 2 * k < coeffs.size() ? coeffs[2 * k] : 0.0;
      const double kw = k * w;
      out -= kw * kw * (a * std::cos(kw * s) + b * std::sin(kw * s));
    }
    return out;
  }
  const double c = std::cos(w * s);
  const double dc = -w * std::sin(w * s);
  const double ddc = -w * w * c;
  for (std::size_t k = 1; k < coeffs.size(); ++k) {
    if (k >= 2) out += k * (k - 1.0) * coeffs[k] * std::pow(c, k - 2.0) * dc * dc;
    out += k * coeffs[k] * std::pow(c, k - 1.0) * ddc;
  }
  return out;
}

double sor_curvature(const Profile& f, double s) { return -f.d2(s) / f.value(s); }

namespace {

// Injectivity radius of ds^2 + f^2 dphi^2: bounded by the conjugate radius pi/sqrt(Kmax),
// by half the length of the closed meridians, and by half the length of the closed
// parallels sitting at critical points of f.
double sor_injectivity(const Profile& f) {
  const int samples = 4096;
  double kmax = 0.0;
  double bound = 0.5 * f.period;
  double prev_d = f.d1(0.0);
  for (int i = 1; i <= samples; ++i) {
    const double s = f.period * i / samples;
    kmax = std::max(kmax, sor_curvature(f, s));
    const double d = f.d1(s);
    if ((prev_d > 0) != (d > 0) || d == 0.0) {
      // bisect the critical point
      double lo = f.period * (i - 1) / samples, hi = s;
      for (int it = 0; it < 60; ++it) {
        const double mid = 0.5 * (lo + hi);
        if ((f.d1(lo) > 0) == (f.d1(mid) > 0)) lo = mid; else hi = mid;
      }
      bound = std::min(bound, std::numbers::pi * f.value(0.5 * (lo + hi)));
    }
    prev_d = d;
  }
  if (kmax > 0) bound = std::min(bound, std::numbers::pi / std::sqrt(kmax));
  return bound;
}

}  // namespace

ModelManifold ModelManifold::sphere(int n) {
  if (n < 1) throw DomainError("sphere: dimension must be >= 1");
  ModelManifold m;
  m.kind_ = ManifoldKind::sphere;
  m.dim_ = n;
  m.native_dim_ = n + 1;
  m.inj_ = std::numbers::pi;
  return m;
}

ModelManifold ModelManifold::flat_torus(std::vector<double> periods) {
  if (periods.empty()) throw DomainError("flat_torus: need at least one period");
  for (double p : periods)
    if (!(p > 0)) throw DomainError("flat_torus: periods must be positive");
  ModelManifold m;
  m.kind_ = ManifoldKind::flat_torus;
  m.dim_ = static_cast<int>(periods.size());
  m.native_dim_ = m.dim_;
  m.inj_ = 0.5 * *std::min_element(periods.begin(), periods.end());
  m.periods_ = std::move(periods);
  return m;
}

ModelManifold ModelManifold::product(const ModelManifold& a, const ModelManifold& b) {
  ModelManifold m;
  m.kind_ = ManifoldKind::product;
  m.dim_ = a.dim() + b.dim();
  m.native_dim_ = a.native_dim() + b.native_dim();
  m.inj_ = std::min(a.injectivity_radius(), b.injectivity_radius());
  m.factors_ = {std::make_shared<const ModelManifold>(a), std::make_shared<const ModelManifold>(b)};
  return m;
}

ModelManifold ModelManifold::surface_of_revolution(Profile profile) {
  if (!(profile.period > 0)) throw DomainError("surface_of_revolution: period must be positive");
  if (profile.coeffs.empty()) throw DomainError("surface_of_revolution: empty profile");
  for (int i = 0; i < 2048; ++i) {
    if (!(profile.value(profile.period * i / 2048.0) > 0))
      throw DomainError("surface_of_revolution: profile must be positive");
  }
  ModelManifold m;
  m.kind_ = ManifoldKind::surface_of_revolution;
  m.dim_ = 2;
  m.native_dim_ = 2;
  m.profile_ = std::move(profile);
  m.inj_ = sor_injectivity(m.profile_);
  return m;
}

std::string ModelManifold::describe() const {
  std::ostringstream os;
  switch (kind_) {
    case ManifoldKind::sphere: os << "sphere(" << dim_ << ")"; break;
    case ManifoldKind::flat_torus:
      os << "flat_torus(" << dim_ << ";";
      for (std::size_t i = 0; i < periods_.size(); ++i) os << (i ? "," : "") << periods_[i];
      os << ")";
      break;
    case ManifoldKind::product: os << "product(" << factors_[0]->describe() << "," << factors_[1]->describe() << ")"; break;
    case ManifoldKind::surface_of_revolution: os << "surface_of_revolution(period=" << profile_.period << ")"; break;
  }
  return os.str();
}

// ---- sphere charts -------------------------------------------------------

namespace {

template <class T>
Eigen::Matrix<T, Eigen::Dynamic, 1> polar_embed(int n, const Eigen::Matrix<T, Eigen::Dynamic, 1>& u) {
  using std::cos;
  using std::sin;
  // y_n = cos th1, (y_0..y_{n-1}) = sin th1 * embed_{n-1}(th2..), S^1: (cos phi, sin phi).
  Eigen::Matrix<T, Eigen::Dynamic, 1> y(n + 1);
  T scale = T(1.0);
  for (int k = 0; k < n - 1; ++k) {
    y[n - k] = scale * cos(u[k]);
    scale = scale * sin(u[k]);
  }
  y[0] = scale * cos(u[n - 1]);
  y[1] = scale * sin(u[n - 1]);
  return y;
}

void check_polar_domain(int n, const VectorXd& u) {
  for (int k = 0; k < n - 1; ++k) {
    if (!(u[k] > 0.0 && u[k] < std::numbers::pi))
      throw DomainError("polar chart: angle " + std::to_string(k) + " must lie in (0, pi)");
  }
}

}  // namespace

VectorXd sphere_embed(int n, Chart chart, const VectorXd& u) {
  if (u.size() != n) throw DomainError("sphere chart: expected " + std::to_string(n) + " coordinates");
  if (!u.allFinite()) throw DomainError("sphere chart: non-finite coordinates");
  VectorXd y(n + 1);
  const double s = u.squaredNorm();
  switch (chart) {
    case Chart::polar:
      check_polar_domain(n, u);
      return polar_embed<double>(n, u);
    case Chart::stereo_north:
      y.head(n) = 2.0 * u / (1.0 + s);
      y[n] = (s - 1.0) / (s + 1.0);
      return y;
    case Chart::stereo_south:
      y.head(n) = 2.0 * u / (1.0 + s);
      y[n] = (1.0 - s) / (1.0 + s);
      return y;
    case Chart::native: break;
  }
  throw DomainError("sphere_embed: native coordinates are already ambient");
}

MatrixXd sphere_embed_jacobian(int n, Chart chart, const VectorXd& u) {
  MatrixXd J(n + 1, n);
  const double s = u.squaredNorm();
  switch (chart) {
    case Chart::polar: {
      check_polar_domain(n, u);
      // complex-step differentiation of the trigonometric embedding
      const double step = 1e-30;
      for (int j = 0; j < n; ++j) {
        Eigen::VectorXcd uc = u.cast<std::complex<double>>();
        uc[j] += std::complex<double>(0.0, step);
        Eigen::VectorXcd yc = polar_embed<std::complex<double>>(n, uc);
        J.col(j) = yc.imag() / step;
      }
      return J;
    }
    case Chart::stereo_north:
    case Chart::stereo_south: {
      const double sign = chart == Chart::stereo_north ? 1.0 : -1.0;
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j)
          J(i, j) = (i == j ? 2.0 / (1.0 + s) : 0.0) - 4.0 * u[i] * u[j] / ((1.0 + s) * (1.0 + s));
      for (int j = 0; j < n; ++j) J(n, j) = sign * 4.0 * u[j] / ((1.0 + s) * (1.0 + s));
      return J;
    }
    case Chart::native: break;
  }
  throw DomainError("sphere_embed_jacobian: native coordinates are already ambient");
}

VectorXd sphere_chart_coords(int n, Chart chart, const VectorXd& y) {
  if (y.size() != n + 1) throw DomainError("sphere point has wrong ambient dimension");
  VectorXd u(n);
  switch (chart) {
    case Chart::polar: {
      VectorXd rest = y;
      for (int k = 0; k < n - 1; ++k) {
        const int top = n - k;
        const double r = rest.head(top + 1).norm();
        const double c = std::clamp(rest[top] / r, -1.0, 1.0);
        u[k] = std::acos(c);
        if (!(u[k] > 0.0 && u[k] < std::numbers::pi)) throw DomainError("polar chart: point on a coordinate pole");
      }
      u[n - 1] = std::atan2(y[1], y[0]);
      if (y[0] == 0.0 && y[1] == 0.0) throw DomainError("polar chart: point on a coordinate pole");
      return u;
    }
    case Chart::stereo_north:
      if (1.0 - y[n] < 1e-14) throw DomainError("stereo_north: point is the north pole");
      return y.head(n) / (1.0 - y[n]);
    case Chart::stereo_south:
      if (1.0 + y[n] < 1e-14) throw DomainError("stereo_south: point is the south pole");
      return y.head(n) / (1.0 + y[n]);
    case Chart::native: break;
  }
  return y;
}

// ---- metric and conorm ---------------------------------------------------

MatrixXd metric_at(const ModelManifold& M, const VectorXd& x, Chart chart) {
  if (!x.allFinite()) throw DomainError("metric_at: non-finite coordinates");
  switch (M.kind()) {
    case ManifoldKind::sphere: {
      if (chart == Chart::native)
        throw DomainError("metric_at: sphere native coordinates are ambient; pick polar or stereographic");
      const int n = M.dim();
      if (x.size() != n) throw DomainError("metric_at: wrong coordinate count");
      if (chart == Chart::polar) {
        check_polar_domain(n, x);
        MatrixXd g = MatrixXd::Zero(n, n);
        double w = 1.0;
        for (int k = 0; k < n; ++k) {
          g(k, k) = w;
          if (k < n - 1) w *= std::sin(x[k]) * std::sin(x[k]);
        }
        return g;
      }
      const double s = x.squaredNorm();
      return MatrixXd::Identity(n, n) * (4.0 / ((1.0 + s) * (1.0 + s)));
    }
    case ManifoldKind::flat_torus:
      if (chart != Chart::native) throw DomainError("metric_at: torus has a single periodic chart");
      if (x.size() != M.dim()) throw DomainError("metric_at: wrong coordinate count");
      return MatrixXd::Identity(M.dim(), M.dim());
    case ManifoldKind::surface_of_revolution: {
      if (chart != Chart::native) throw DomainError("metric_at: surface of revolution uses (s, phi)");
      if (x.size() != 2) throw DomainError("metric_at: wrong coordinate count");
      MatrixXd g = MatrixXd::Identity(2, 2);
      const double f = M.profile().value(x[0]);
      g(1, 1) = f * f;
      return g;
    }
    case ManifoldKind::product: {
      if (chart != Chart::native) throw DomainError("metric_at: products use native coordinates");
      if (x.size() != M.native_dim()) throw DomainError("metric_at: wrong coordinate count");
      const auto& a = M.factor(0);
      const auto& b = M.factor(1);
      MatrixXd ga = metric_at(a, x.head(a.native_dim()));
      MatrixXd gb = metric_at(b, x.tail(b.native_dim()));
      MatrixXd g = MatrixXd::Zero(ga.rows() + gb.rows(), ga.cols() + gb.cols());
      g.topLeftCorner(ga.rows(), ga.cols()) = ga;
      g.bottomRightCorner(gb.rows(), gb.cols()) = gb;
      return g;
    }
  }
  throw DomainError("metric_at: unknown manifold");
}

double conorm(const ModelManifold& M, const VectorXd& x, const VectorXd& xi, Chart chart) {
  if (chart == Chart::native) {
    switch (M.kind()) {
      case ManifoldKind::sphere:
      case ManifoldKind::flat_torus:
        if (xi.size() != M.native_dim()) throw DomainError("conorm: wrong covector size");
        return xi.norm();
      case ManifoldKind::surface_of_revolution: {
        const double f = M.profile().value(x[0]);
        return std::hypot(xi[0], xi[1] / f);
      }
      case ManifoldKind::product: {
        const auto& a = M.factor(0);
        const auto& b = M.factor(1);
        const int na = a.native_dim(), nb = b.native_dim();
        return std::hypot(conorm(a, x.head(na), xi.head(na)), conorm(b, x.tail(nb), xi.tail(nb)));
      }
    }
  }
  const MatrixXd g = metric_at(M, x, chart);
  Eigen::LLT<MatrixXd> llt(g);
  if (llt.info() != Eigen::Success) throw NumericalError("conorm: singular metric", 0.0);
  return std::sqrt(std::max(0.0, xi.dot(llt.solve(xi))));
}

CotangentPoint to_native(const ModelManifold& M, const CotangentPoint& p) {
  if (p.chart == Chart::native) return p;
  if (M.kind() != ManifoldKind::sphere) throw DomainError("to_native: only spheres carry extra charts");
  const int n = M.dim();
  CotangentPoint q;
  q.chart = Chart::native;
  q.x = sphere_embed(n, p.chart, p.x);
  const MatrixXd J = sphere_embed_jacobian(n, p.chart, p.x);
  const MatrixXd g = J.transpose() * J;
  q.xi = J * g.ldlt().solve(p.xi);
  return q;
}

CotangentPoint from_native(const ModelManifold& M, const CotangentPoint& p, Chart chart) {
  if (chart == Chart::native) return p;
  if (M.kind() != ManifoldKind::sphere) throw DomainError("from_native: only spheres carry extra charts");
  const int n = M.dim();
  CotangentPoint q;
  q.chart = chart;
  q.x = sphere_chart_coords(n, chart, p.x);
  const MatrixXd J = sphere_embed_jacobian(n, chart, q.x);
  q.xi = J.transpose() * p.xi;
  return q;
}

CotangentPoint canonicalize(const ModelManifold& M, const CotangentPoint& p) {
  CotangentPoint q = p;
  switch (M.kind()) {
    case ManifoldKind::flat_torus:
      for (int i = 0; i < M.dim(); ++i) q.x[i] = wrap_positive(q.x[i], M.periods()[i]);
      break;
    case ManifoldKind::sphere: {
      q.x.normalize();
      q.xi -= q.xi.dot(q.x) * q.x;
      break;
    }
    case ManifoldKind::surface_of_revolution:
      q.x[0] = wrap_positive(q.x[0], M.profile().period);
      q.x[1] = wrap_positive(q.x[1], 2.0 * std::numbers::pi);
      break;
    case ManifoldKind::product: {
      const auto& a = M.factor(0);
      const auto& b = M.factor(1);
      const int na = a.native_dim(), nb = b.native_dim();
      CotangentPoint pa{q.x.head(na), q.xi.head(na)}, pb{q.x.tail(nb), q.xi.tail(nb)};
      pa = canonicalize(a, pa);
      pb = canonicalize(b, pb);
      q.x << pa.x, pb.x;
      q.xi << pa.xi, pb.xi;
      break;
    }
  }
  return q;
}

CotangentPoint normalize_covector(const ModelManifold& M, const CotangentPoint& p) {
  const double c = conorm(M, p);
  if (!(c > 0)) throw DomainError("normalize_covector: zero covector");
  CotangentPoint q = p;
  q.xi /= c;
  return q;
}

void validate_native(const ModelManifold& M, const CotangentPoint& p) {
  if (p.chart != Chart::native) throw DomainError("expected native coordinates");
  if (p.x.size() != M.native_dim() || p.xi.size() != M.native_dim())
    throw DomainError("point has wrong native dimension (expected " + std::to_string(M.native_dim()) + ")");
  if (!p.x.allFinite() || !p.xi.allFinite()) throw DomainError("point has non-finite coordinates");
  if (M.kind() == ManifoldKind::sphere) {
    if (std::abs(p.x.norm() - 1.0) > 1e-8) throw DomainError("sphere point is off the unit sphere");
    if (std::abs(p.xi.dot(p.x)) > 1e-8 * std::max(1.0, p.xi.norm()))
      throw DomainError("sphere covector is not tangent");
  }
  if (M.kind() == ManifoldKind::product) {
    validate_native(M.factor(0), {p.x.head(M.factor(0).native_dim()), p.xi.head(M.factor(0).native_dim())});
    validate_native(M.factor(1), {p.x.tail(M.factor(1).native_dim()), p.xi.tail(M.factor(1).native_dim())});
  }
}

// ---- distances -----------------------------------------------------------

double base_distance(const ModelManifold& M, const VectorXd& x, const VectorXd& y) {
  switch (M.kind()) {
    case ManifoldKind::flat_torus: {
      double s = 0;
      for (int i = 0; i < M.dim(); ++i) {
        const double d = wrap_centered(x[i] - y[i], M.periods()[i]);
        s += d * d;
      }
      return std::sqrt(s);
    }
    case ManifoldKind::sphere: {
      // atan2 form is accurate at both small and near-antipodal separations
      const double c = x.dot(y);
      const double s = (x - c * y).norm();
      return std::atan2(s, c);
    }
    case ManifoldKind::surface_of_revolution: {
      const double ds = wrap_centered(x[0] - y[0], M.profile().period);
      const double dphi = wrap_centered(x[1] - y[1], 2.0 * std::numbers::pi);
      const double fm = M.profile().value(y[0] + 0.5 * ds);
      return std::hypot(ds, fm * dphi);
    }
    case ManifoldKind::product: {
      const auto& a = M.factor(0);
      const auto& b = M.factor(1);
      const int na = a.native_dim(), nb = b.native_dim();
      return std::hypot(base_distance(a, x.head(na), y.head(na)), base_distance(b, x.tail(nb), y.tail(nb)));
    }
  }
  return 0.0;
}

VectorXd sphere_transport(const VectorXd& y, const VectorXd& x, const VectorXd& v) {
  const double c = 1.0 + x.dot(y);
  if (c < 1e-12) return v - v.dot(x) * x;  // antipodal: transport is not unique
  return v - (v.dot(x) / c) * (x + y);
}

namespace {

double sphere2_frame_distance(const CotangentPoint& p, const CotangentPoint& q) {
  const double a = p.xi.norm();
  const double b = q.xi.norm();
  if (a == 0.0 || b == 0.0) {
    const VectorXd diff = p.xi - sphere_transport(q.x, p.x, q.xi);
    const double d = std::atan2((p.x - p.x.dot(q.x) * q.x).norm(), p.x.dot(q.x));
    return std::sqrt(d * d + diff.squaredNorm());
  }
  Eigen::Matrix3d F, G;
  const Eigen::Vector3d x = p.x, e = p.xi / a, y = q.x, f = q.xi / b;
  F << x, e, x.cross(e);
  G << y, f, y.cross(f);
  // the Sasaki metric on the unit tangent bundle of the round S^2 is the bi-invariant
  // metric of SO(3) in which rotation by angle theta has length theta
  const double chord = (F - G).norm() / std::sqrt(8.0);
  const double theta = 2.0 * std::asin(std::min(1.0, chord));
  return std::hypot(theta, a - b);
}

}  // namespace

double phase_distance(const ModelManifold& M, const CotangentPoint& p, const CotangentPoint& q) {
  if (p.chart != Chart::native || q.chart != Chart::native)
    return phase_distance(M, to_native(M, p), to_native(M, q));
  switch (M.kind()) {
    case ManifoldKind::flat_torus:
      return std::hypot(base_distance(M, p.x, q.x), (p.xi - q.xi).norm());
    case ManifoldKind::sphere: {
      if (M.dim() == 2) return sphere2_frame_distance(p, q);
      const double d = base_distance(M, p.x, q.x);
      const VectorXd diff = p.xi - sphere_transport(q.x, p.x, q.xi);
      return std::sqrt(d * d + diff.squaredNorm());
    }
    case ManifoldKind::surface_of_revolution: {
      const double ds = wrap_centered(p.x[0] - q.x[0], M.profile().period);
      const double dphi = wrap_centered(p.x[1] - q.x[1], 2.0 * std::numbers::pi);
      const double fm = M.profile().value(q.x[0] + 0.5 * ds);
      const double a = p.xi[0] - q.xi[0];
      const double b = (p.xi[1] - q.xi[1]) / fm;
      return std::sqrt(ds * ds + fm * fm * dphi * dphi + a * a + b * b);
    }
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const int na = A.native_dim(), nb = B.native_dim();
      // factor spheres may carry a zero covector, so they use the transport formula
      auto factor_dist = [](const ModelManifold& F, const CotangentPoint& u, const CotangentPoint& v) {
        if (F.kind() == ManifoldKind::sphere) {
          const double d = base_distance(F, u.x, v.x);
          const VectorXd diff = u.xi - sphere_transport(v.x, u.x, v.xi);
          return std::sqrt(d * d + diff.squaredNorm());
        }
        return phase_distance(F, u, v);
      };
      const double da = factor_dist(A, {p.x.head(na), p.xi.head(na)}, {q.x.head(na), q.xi.head(na)});
      const double db = factor_dist(B, {p.x.tail(nb), p.xi.tail(nb)}, {q.x.tail(nb), q.xi.tail(nb)});
      return std::hypot(da, db);
    }
  }
  return 0.0;
}

}  // namespace geobeam
