#include "geobeam/flow.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/sequences.hpp"

namespace geobeam {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

// ---- surface of revolution: H = sqrt(xi_s^2 + xi_phi^2 / f(s)^2) ------------

template <class T>
using Vec4 = Eigen::Matrix<T, 4, 1>;

template <class T>
Vec4<T> sor_field(const Profile& prof, const Vec4<T>& y) {
  using std::sqrt;
  const T f = prof.eval(y[0]);
  const T fp = prof.eval_d1(y[0]);
  const T H = sqrt(y[2] * y[2] + y[3] * y[3] / (f * f));
  Vec4<T> d;
  d[0] = y[2] / H;
  d[1] = y[3] / (f * f * H);
  d[2] = y[3] * y[3] * fp / (f * f * f * H);
  d[3] = T(0.0);
  return d;
}

template <class T>
Vec4<T> rk4_step(const Profile& prof, const Vec4<T>& y, double h) {
  const Vec4<T> k1 = sor_field(prof, y);
  const Vec4<T> k2 = sor_field<T>(prof, y + (0.5 * h) * k1);
  const Vec4<T> k3 = sor_field<T>(prof, y + (0.5 * h) * k2);
  const Vec4<T> k4 = sor_field<T>(prof, y + h * k3);
  return y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

// One accepted step is two half steps of size h/2; replaying the same step list
// reproduces the discrete map exactly, which is what complex-step differentiation needs.
template <class T>
Vec4<T> sor_replay(const Profile& prof, Vec4<T> y, const std::vector<double>& steps) {
  for (double h : steps) {
    y = rk4_step<T>(prof, y, 0.5 * h);
    y = rk4_step<T>(prof, y, 0.5 * h);
  }
  return y;
}

struct SorRun {
  Vec4<double> y;
  std::vector<double> steps;
  std::vector<double> times;  // time after each step
  std::vector<Vec4<double>> states;
  double error_bound = 0.0;
};

double sor_curvature_scale(const Profile& prof) {
  double fmin = 1e300, dmax = 0.0;
  for (int i = 0; i < 512; ++i) {
    const double s = prof.period * i / 512.0;
    fmin = std::min(fmin, prof.value(s));
    dmax = std::max(dmax, std::abs(prof.d1(s)));
  }
  return 1.0 + dmax / (fmin * fmin * fmin) + 1.0 / fmin;
}

SorRun sor_integrate(const Profile& prof, const Vec4<double>& y0, double t, double tol, double max_step,
                     bool keep_states) {
  SorRun run;
  run.y = y0;
  if (t == 0.0) return run;
  const double dir = t > 0 ? 1.0 : -1.0;
  const double span = std::abs(t);
  double h = std::min(max_step, 0.05);
  double done = 0.0;
  int rejects = 0;
  while (done < span) {
    if (done + h > span) h = span - done;
    const Vec4<double> big = rk4_step<double>(prof, run.y, dir * h);
    const Vec4<double> half = rk4_step<double>(prof, rk4_step<double>(prof, run.y, 0.5 * dir * h), 0.5 * dir * h);
    const double err = (half - big).cwiseAbs().maxCoeff() / 15.0;
    if (err <= tol * h || h < 1e-12) {
      if (h < 1e-12 && err > tol * h) throw NumericalError("surface-of-revolution flow: step size underflow", err);
      run.y = half;
      run.steps.push_back(dir * h);
      run.error_bound += err;
      done += h;
      if (keep_states) {
        run.times.push_back(dir * done);
        run.states.push_back(run.y);
      }
      const double grow = err > 0 ? 0.9 * std::pow(tol * h / err, 0.25) : 2.0;
      h = std::min({max_step, 2.0 * h, h * std::max(grow, 0.2)});
      rejects = 0;
    } else {
      h *= std::max(0.2, 0.9 * std::pow(tol * h / err, 0.25));
      if (++rejects > 200) throw NumericalError("surface-of-revolution flow: repeated step rejection", err);
    }
  }
  return run;
}

Vec4<double> sor_state(const CotangentPoint& p) {
  Vec4<double> y;
  y << p.x[0], p.x[1], p.xi[0], p.xi[1];
  return y;
}

CotangentPoint sor_point(const Vec4<double>& y) {
  CotangentPoint p;
  p.x = VectorXd(2);
  p.xi = VectorXd(2);
  p.x << y[0], y[1];
  p.xi << y[2], y[3];
  return p;
}

// Unit-speed flow (Hamiltonian |xi|) for the closed-form families.
CotangentPoint closed_flow(const ModelManifold& M, const CotangentPoint& p, double t, double tol) {
  switch (M.kind()) {
    case ManifoldKind::flat_torus: {
      CotangentPoint q = p;
      const double a = p.xi.norm();
      if (a == 0.0) return q;
      q.x += t * p.xi / a;
      for (int i = 0; i < M.dim(); ++i) q.x[i] = wrap_positive(q.x[i], M.periods()[i]);
      return q;
    }
    case ManifoldKind::sphere: {
      CotangentPoint q = p;
      const double a = p.xi.norm();
      if (a == 0.0) return q;
      const VectorXd e = p.xi / a;
      const double c = std::cos(t), s = std::sin(t);
      q.x = c * p.x + s * e;
      q.xi = a * (c * e - s * p.x);
      return q;
    }
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const int na = A.native_dim(), nb = B.native_dim();
      const double a = conorm(A, p.x.head(na), p.xi.head(na));
      const double b = conorm(B, p.x.tail(nb), p.xi.tail(nb));
      const double total = std::hypot(a, b);
      CotangentPoint q = p;
      if (total == 0.0) return q;
      const CotangentPoint qa = flow_point(A, {p.x.head(na), p.xi.head(na)}, t * a / total, tol);
      const CotangentPoint qb = flow_point(B, {p.x.tail(nb), p.xi.tail(nb)}, t * b / total, tol);
      q.x << qa.x, qb.x;
      q.xi << qa.xi, qb.xi;
      return q;
    }
    case ManifoldKind::surface_of_revolution: {
      const SorRun run = sor_integrate(M.profile(), sor_state(p), t, tol, 0.1, false);
      CotangentPoint q = sor_point(run.y);
      q.x[0] = wrap_positive(q.x[0], M.profile().period);
      q.x[1] = wrap_positive(q.x[1], 2.0 * std::numbers::pi);
      return q;
    }
  }
  return p;
}

// ---- canonical chart coordinates used for dphi_t ---------------------------

struct Canon {
  VectorXd z;        // (u, eta), length 2n
  MatrixXd g;        // metric at u
};

void choose_charts(const ModelManifold& M, const VectorXd& x, std::vector<Chart>& out) {
  switch (M.kind()) {
    case ManifoldKind::sphere:
      out.push_back(x[M.dim()] >= 0 ? Chart::stereo_south : Chart::stereo_north);
      return;
    case ManifoldKind::product:
      choose_charts(M.factor(0), x.head(M.factor(0).native_dim()), out);
      choose_charts(M.factor(1), x.tail(M.factor(1).native_dim()), out);
      return;
    default:
      return;
  }
}

Canon to_canon(const ModelManifold& M, const CotangentPoint& p, const std::vector<Chart>& charts, std::size_t& k) {
  const int n = M.dim();
  Canon c;
  c.z = VectorXd(2 * n);
  switch (M.kind()) {
    case ManifoldKind::sphere: {
      const CotangentPoint q = from_native(M, p, charts.at(k++));
      c.z << q.x, q.xi;
      c.g = metric_at(M, q.x, q.chart);
      return c;
    }
    case ManifoldKind::flat_torus:
      c.z << p.x, p.xi;
      c.g = MatrixXd::Identity(n, n);
      return c;
    case ManifoldKind::surface_of_revolution:
      c.z << p.x, p.xi;
      c.g = metric_at(M, p.x);
      return c;
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const int na = A.native_dim(), nb = B.native_dim();
      const Canon ca = to_canon(A, {p.x.head(na), p.xi.head(na)}, charts, k);
      const Canon cb = to_canon(B, {p.x.tail(nb), p.xi.tail(nb)}, charts, k);
      const int da = A.dim(), db = B.dim();
      c.z << ca.z.head(da), cb.z.head(db), ca.z.tail(da), cb.z.tail(db);
      c.g = MatrixXd::Zero(n, n);
      c.g.topLeftCorner(da, da) = ca.g;
      c.g.bottomRightCorner(db, db) = cb.g;
      return c;
    }
  }
  return c;
}

CotangentPoint from_canon(const ModelManifold& M, const VectorXd& z, const std::vector<Chart>& charts, std::size_t& k) {
  const int n = M.dim();
  switch (M.kind()) {
    case ManifoldKind::sphere: {
      CotangentPoint q{z.head(n), z.tail(n), charts.at(k++)};
      return to_native(M, q);
    }
    case ManifoldKind::flat_torus:
    case ManifoldKind::surface_of_revolution:
      return {z.head(n), z.tail(n), Chart::native};
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const int da = A.dim(), db = B.dim();
      VectorXd za(2 * da), zb(2 * db);
      za << z.segment(0, da), z.segment(n, da);
      zb << z.segment(da, db), z.segment(n + da, db);
      const CotangentPoint pa = from_canon(A, za, charts, k);
      const CotangentPoint pb = from_canon(B, zb, charts, k);
      CotangentPoint q;
      q.x = VectorXd(M.native_dim());
      q.xi = VectorXd(M.native_dim());
      q.x << pa.x, pb.x;
      q.xi << pa.xi, pb.xi;
      return q;
    }
  }
  return {};
}

// Periods of canonical base coordinates (0 = not periodic).
void canon_periods(const ModelManifold& M, std::vector<double>& out) {
  switch (M.kind()) {
    case ManifoldKind::flat_torus:
      for (double p : M.periods()) out.push_back(p);
      return;
    case ManifoldKind::surface_of_revolution:
      out.push_back(M.profile().period);
      out.push_back(2.0 * std::numbers::pi);
      return;
    case ManifoldKind::sphere:
      for (int i = 0; i < M.dim(); ++i) out.push_back(0.0);
      return;
    case ManifoldKind::product:
      canon_periods(M.factor(0), out);
      canon_periods(M.factor(1), out);
      return;
  }
}

MatrixXd sym_sqrt(const MatrixXd& g, bool inverse) {
  Eigen::SelfAdjointEigenSolver<MatrixXd> es(g);
  VectorXd ev = es.eigenvalues().cwiseSqrt();
  if (inverse) ev = ev.cwiseInverse();
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

MatrixXd orthonormalize_jacobian(const MatrixXd& D, const MatrixXd& g0, const MatrixXd& g1) {
  const int n = static_cast<int>(g0.rows());
  MatrixXd L = MatrixXd::Zero(2 * n, 2 * n), Rm = MatrixXd::Zero(2 * n, 2 * n);
  L.topLeftCorner(n, n) = sym_sqrt(g1, false);
  L.bottomRightCorner(n, n) = sym_sqrt(g1, true);
  Rm.topLeftCorner(n, n) = sym_sqrt(g0, true);
  Rm.bottomRightCorner(n, n) = sym_sqrt(g0, false);
  return L * D * Rm;
}

// ---- Jacobi responses for closed-form families --------------------------

// Velocity of the unit-speed flow at time s.
VectorXd unit_velocity(const ModelManifold& M, const CotangentPoint& p, double s) {
  switch (M.kind()) {
    case ManifoldKind::flat_torus: {
      const double a = p.xi.norm();
      return a > 0 ? VectorXd(p.xi / a) : VectorXd::Zero(p.xi.size());
    }
    case ManifoldKind::sphere: {
      const double a = p.xi.norm();
      if (a == 0) return VectorXd::Zero(p.xi.size());
      return VectorXd(-std::sin(s) * p.x + std::cos(s) * p.xi / a);
    }
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const int na = A.native_dim(), nb = B.native_dim();
      const double a = conorm(A, p.x.head(na), p.xi.head(na));
      const double b = conorm(B, p.x.tail(nb), p.xi.tail(nb));
      const double tot = std::hypot(a, b);
      VectorXd v(M.native_dim());
      v << (a / tot) * unit_velocity(A, {p.x.head(na), p.xi.head(na)}, s * a / tot),
          (b / tot) * unit_velocity(B, {p.x.tail(nb), p.xi.tail(nb)}, s * b / tot);
      return v;
    }
    case ManifoldKind::surface_of_revolution: break;
  }
  throw DomainError("unit_velocity: closed forms only");
}

VectorXd tangent_part(const ModelManifold& M, const VectorXd& x, const VectorXd& v) {
  switch (M.kind()) {
    case ManifoldKind::sphere: return v - v.dot(x) * x;
    case ManifoldKind::product: {
      const int na = M.factor(0).native_dim(), nb = M.factor(1).native_dim();
      VectorXd out(v.size());
      out << tangent_part(M.factor(0), x.head(na), v.head(na)), tangent_part(M.factor(1), x.tail(nb), v.tail(nb));
      return out;
    }
    default: return v;
  }
}

// Base displacement at unit-speed time s caused by covector perturbation v.
VectorXd unit_response(const ModelManifold& M, const CotangentPoint& p, double s, const VectorXd& v) {
  switch (M.kind()) {
    case ManifoldKind::flat_torus: {
      const double a = p.xi.norm();
      const VectorXd e = p.xi / a;
      return s * (v - v.dot(e) * e) / a;
    }
    case ManifoldKind::sphere: {
      const double a = p.xi.norm();
      const VectorXd e = p.xi / a;
      const VectorXd w = v - v.dot(e) * e - v.dot(p.x) * p.x;
      return std::sin(s) * w / a;
    }
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const int na = A.native_dim(), nb = B.native_dim();
      const CotangentPoint pa{p.x.head(na), p.xi.head(na)}, pb{p.x.tail(nb), p.xi.tail(nb)};
      const double a = conorm(A, pa), b = conorm(B, pb);
      const double tot = std::hypot(a, b);
      const double xi_dot_v = p.xi.dot(v) / tot;
      auto part = [&](const ModelManifold& F, const CotangentPoint& pf, double nf, const VectorXd& vf) -> VectorXd {
        if (nf == 0.0) return s * tangent_part(F, pf.x, vf) / tot;
        const double c = nf / tot;
        const double dc = (pf.xi.dot(vf) / nf) / tot - c * xi_dot_v / tot;
        return unit_response(F, pf, c * s, vf) + s * dc * unit_velocity(F, pf, c * s);
      };
      VectorXd out(M.native_dim());
      out << part(A, pa, a, v.head(na)), part(B, pb, b, v.tail(nb));
      return out;
    }
    case ManifoldKind::surface_of_revolution: break;
  }
  throw DomainError("unit_response: closed forms only");
}

bool has_sor(const ModelManifold& M) {
  if (M.kind() == ManifoldKind::surface_of_revolution) return true;
  if (M.kind() == ManifoldKind::product) return has_sor(M.factor(0)) || has_sor(M.factor(1));
  return false;
}

void tangent_constraints(const ModelManifold& M, const VectorXd& x, int offset, std::vector<VectorXd>& out, int total) {
  switch (M.kind()) {
    case ManifoldKind::sphere: {
      VectorXd c = VectorXd::Zero(total);
      c.segment(offset, x.size()) = x;
      out.push_back(c);
      return;
    }
    case ManifoldKind::product: {
      const int na = M.factor(0).native_dim(), nb = M.factor(1).native_dim();
      tangent_constraints(M.factor(0), x.head(na), offset, out, total);
      tangent_constraints(M.factor(1), x.tail(nb), offset + na, out, total);
      return;
    }
    default: return;
  }
}

}  // namespace

CotangentPoint flow_point(const ModelManifold& M, const CotangentPoint& p, double t, double tol) {
  if (p.chart != Chart::native) return flow_point(M, to_native(M, p), t, tol);
  return closed_flow(M, p, t, tol);
}

double Trajectory::max_energy_drift(const ModelManifold& M) const {
  if (samples.empty()) return 0.0;
  const double e0 = conorm(M, samples.front().point);
  double worst = 0.0;
  for (const auto& s : samples) worst = std::max(worst, std::abs(conorm(M, s.point) - e0));
  return worst;
}

Trajectory geodesic_flow(const ModelManifold& M, const CotangentPoint& rho0_in, double t_final, double tolerance,
                         int jacobi_every) {
  const CotangentPoint rho0 = rho0_in.chart == Chart::native ? rho0_in : to_native(M, rho0_in);
  validate_native(M, rho0);
  const double e = conorm(M, rho0);
  if (std::abs(e - 1.0) > std::max(tolerance, default_tolerances().unit_covector))
    throw PreconditionError("geodesic_flow: |xi|_g = 1 required at the initial point (|xi|_g = " + std::to_string(e) + ")");
  if (!(tolerance > 0)) throw PreconditionError("geodesic_flow: tolerance > 0 required");
  Trajectory tr;
  const double span = std::abs(t_final);
  const double dir = t_final >= 0 ? 1.0 : -1.0;
  if (!has_sor(M)) {
    // unit-speed base curves have |x''| <= 1 in ambient coordinates
    const double dt = std::sqrt(8.0 * tolerance);
    const int steps = std::max(1, static_cast<int>(std::ceil(span / dt)));
    tr.meta.method = "closed_form";
    tr.meta.steps = steps;
    tr.meta.min_step = tr.meta.max_step = span / steps;
    for (int i = 0; i <= steps; ++i) {
      const double t = dir * span * i / steps;
      tr.samples.push_back({t, closed_flow(M, rho0, t, tolerance)});
    }
  } else {
    if (M.kind() != ManifoldKind::surface_of_revolution)
      throw DomainError("geodesic_flow: products with a surface of revolution are not supported");
    const double kappa = sor_curvature_scale(M.profile());
    const double max_step = std::sqrt(8.0 * tolerance / kappa);
    const double local = std::min(default_tolerances().flow_local, tolerance * 1e-3);
    const SorRun run = sor_integrate(M.profile(), sor_state(rho0), t_final, local, max_step, true);
    tr.meta.method = "rk4_step_doubling";
    tr.meta.steps = static_cast<int>(run.steps.size());
    tr.meta.error_bound = run.error_bound;
    if (run.error_bound > tolerance)
      throw NumericalError("geodesic_flow: accumulated error exceeds tolerance", run.error_bound);
    tr.meta.min_step = 1e300;
    for (double h : run.steps) {
      tr.meta.min_step = std::min(tr.meta.min_step, std::abs(h));
      tr.meta.max_step = std::max(tr.meta.max_step, std::abs(h));
    }
    tr.samples.push_back({0.0, rho0});
    for (std::size_t i = 0; i < run.states.size(); ++i) tr.samples.push_back({run.times[i], sor_point(run.states[i])});
  }
  if (jacobi_every > 0) {
    for (std::size_t i = 0; i < tr.samples.size(); i += jacobi_every)
      tr.jacobi.emplace_back(tr.samples[i].t, flow_jacobian(M, rho0, tr.samples[i].t));
  }
  return tr;
}

MatrixXd flow_jacobian(const ModelManifold& M, const CotangentPoint& p_in, double t) {
  const CotangentPoint p = p_in.chart == Chart::native ? p_in : to_native(M, p_in);
  const int n = M.dim();
  if (M.kind() == ManifoldKind::surface_of_revolution) {
    const Vec4<double> y0 = sor_state(p);
    const SorRun run = sor_integrate(M.profile(), y0, t, default_tolerances().flow_local, 0.1, false);
    MatrixXd D(4, 4);
    const double step = 1e-30;
    for (int j = 0; j < 4; ++j) {
      Vec4<std::complex<double>> yc = y0.cast<std::complex<double>>();
      yc[j] += std::complex<double>(0.0, step);
      const Vec4<std::complex<double>> out = sor_replay(M.profile(), yc, run.steps);
      for (int i = 0; i < 4; ++i) D(i, j) = out[i].imag() / step;
    }
    return orthonormalize_jacobian(D, metric_at(M, p.x), metric_at(M, run.y.head<2>()));
  }
  if (has_sor(M)) throw DomainError("flow_jacobian: products with a surface of revolution are not supported");
  std::vector<Chart> c0, c1;
  choose_charts(M, p.x, c0);
  const CotangentPoint q = closed_flow(M, p, t, 0.0);
  choose_charts(M, q.x, c1);
  std::size_t k = 0;
  const Canon z0 = to_canon(M, p, c0, k);
  k = 0;
  const Canon z1 = to_canon(M, q, c1, k);
  std::vector<double> periods;
  canon_periods(M, periods);
  MatrixXd D(2 * n, 2 * n);
  for (int j = 0; j < 2 * n; ++j) {
    const double h = 1e-6 * std::max(1.0, std::abs(z0.z[j]));
    VectorXd zp = z0.z, zm = z0.z;
    zp[j] += h;
    zm[j] -= h;
    std::size_t kp = 0, km = 0;
    const CotangentPoint pp = closed_flow(M, from_canon(M, zp, c0, kp), t, 0.0);
    const CotangentPoint pm = closed_flow(M, from_canon(M, zm, c0, km), t, 0.0);
    kp = km = 0;
    const VectorXd fp = to_canon(M, pp, c1, kp).z;
    const VectorXd fm = to_canon(M, pm, c1, km).z;
    VectorXd diff = fp - fm;
    for (int i = 0; i < n; ++i)
      if (periods[i] > 0) diff[i] = wrap_centered(diff[i], periods[i]);
    D.col(j) = diff / (2 * h);
  }
  return orthonormalize_jacobian(D, z0.g, z1.g);
}

MatrixXd transverse_basis(const ModelManifold& M, const CotangentPoint& p) {
  if (M.kind() == ManifoldKind::surface_of_revolution) {
    // orthonormal frame (d_s, f^{-1} d_phi): xi in that frame is (xi_s, xi_phi / f)
    const double f = M.profile().value(p.x[0]);
    Eigen::Vector2d e(p.xi[0], p.xi[1] / f);
    e.normalize();
    MatrixXd W(2, 1);
    W << -e[1], e[0];
    return W;
  }
  const int N = M.native_dim();
  std::vector<VectorXd> cons;
  tangent_constraints(M, p.x, 0, cons, N);
  cons.push_back(p.xi);
  MatrixXd C(N, static_cast<int>(cons.size()));
  for (std::size_t i = 0; i < cons.size(); ++i) C.col(static_cast<int>(i)) = cons[i];
  Eigen::HouseholderQR<MatrixXd> qr(C);
  const MatrixXd Q = qr.householderQ();
  return Q.rightCols(N - static_cast<int>(cons.size()));
}

MatrixXd jacobi_base(const ModelManifold& M, const CotangentPoint& p_in, double t) {
  const CotangentPoint p = p_in.chart == Chart::native ? p_in : to_native(M, p_in);
  const MatrixXd W = transverse_basis(M, p);
  if (M.kind() == ManifoldKind::surface_of_revolution) {
    const MatrixXd D = flow_jacobian(M, p, t);
    // columns: response of orthonormal base displacement to orthonormal covector input
    MatrixXd out = D.block(0, 2, 2, 2) * W;
    return out;
  }
  if (has_sor(M)) throw DomainError("jacobi_base: products with a surface of revolution are not supported");
  MatrixXd out(M.native_dim(), W.cols());
  for (int j = 0; j < W.cols(); ++j) out.col(j) = unit_response(M, p, t, W.col(j));
  return out;
}

// ---- sampling -------------------------------------------------------------

namespace {

int halton_dims(const ModelManifold& M) {
  switch (M.kind()) {
    case ManifoldKind::sphere: return 2 * (M.dim() + 1);
    case ManifoldKind::flat_torus: return 2 * M.dim();
    case ManifoldKind::surface_of_revolution: return 3;
    case ManifoldKind::product: return halton_dims(M.factor(0)) + halton_dims(M.factor(1));
  }
  return 0;
}

// Consumes coordinates of u starting at k; returns a native point with a nonzero covector.
CotangentPoint point_from_unit(const ModelManifold& M, const VectorXd& u, int& k) {
  auto nq = [](double v) { return normal_quantile(std::clamp(v, 1e-12, 1.0 - 1e-12)); };
  CotangentPoint p;
  switch (M.kind()) {
    case ManifoldKind::sphere: {
      const int d = M.dim() + 1;
      p.x = VectorXd(d);
      p.xi = VectorXd(d);
      for (int i = 0; i < d; ++i) p.x[i] = nq(u[k++]);
      for (int i = 0; i < d; ++i) p.xi[i] = nq(u[k++]);
      p.x.normalize();
      p.xi -= p.xi.dot(p.x) * p.x;
      return p;
    }
    case ManifoldKind::flat_torus: {
      const int d = M.dim();
      p.x = VectorXd(d);
      p.xi = VectorXd(d);
      for (int i = 0; i < d; ++i) p.x[i] = u[k++] * M.periods()[i];
      for (int i = 0; i < d; ++i) p.xi[i] = nq(u[k++]);
      return p;
    }
    case ManifoldKind::surface_of_revolution: {
      p.x = VectorXd(2);
      p.xi = VectorXd(2);
      p.x << u[k] * M.profile().period, u[k + 1] * 2.0 * std::numbers::pi;
      const double a = 2.0 * std::numbers::pi * u[k + 2];
      k += 3;
      p.xi << std::cos(a), std::sin(a) * M.profile().value(p.x[0]);
      return p;
    }
    case ManifoldKind::product: {
      const CotangentPoint a = point_from_unit(M.factor(0), u, k);
      const CotangentPoint b = point_from_unit(M.factor(1), u, k);
      p.x = VectorXd(M.native_dim());
      p.xi = VectorXd(M.native_dim());
      p.x << a.x, b.x;
      p.xi << a.xi, b.xi;
      return p;
    }
  }
  return p;
}

}  // namespace

std::vector<CotangentPoint> sample_cosphere(const ModelManifold& M, int count, std::uint64_t offset) {
  const int dims = halton_dims(M);
  if (dims > 16) throw DomainError("sample_cosphere: manifold too large for the Halton sampler");
  std::vector<CotangentPoint> out;
  out.reserve(count);
  for (int i = 0; i < count; ++i) {
    const VectorXd u = halton(offset + i, dims);
    int k = 0;
    CotangentPoint p = point_from_unit(M, u, k);
    out.push_back(normalize_covector(M, p));
  }
  return out;
}

}  // namespace geobeam
