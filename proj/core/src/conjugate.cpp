#include <algorithm>
#include <cmath>
#include <numbers>

#include "geobeam/errors.hpp"
#include "geobeam/flow.hpp"
#include "geobeam/sequences.hpp"

namespace geobeam {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

VectorXd singular_values(const MatrixXd& B) {
  if (B.cols() == 0) return VectorXd();
  Eigen::JacobiSVD<MatrixXd> svd(B);
  return svd.singularValues();
}

double golden_min(const std::function<double(double)>& f, double a, double b, double tol) {
  const double g = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = b - g * (b - a), d = a + g * (b - a);
  double fc = f(c), fd = f(d);
  while (b - a > tol) {
    if (fc <= fd) {
      b = d;
      d = c;
      fd = fc;
      c = b - g * (b - a);
      fc = f(c);
    } else {
      a = c;
      c = d;
      fc = fd;
      d = a + g * (b - a);
      fd = f(d);
    }
  }
  return fc <= fd ? c : d;
}

// Orthonormal basis of T_x M in native coordinates; for surfaces of revolution the
// columns are covectors (1, 0) and (0, f) so that the basis is g-orthonormal.
MatrixXd tangent_frame(const ModelManifold& M, const VectorXd& x) {
  switch (M.kind()) {
    case ManifoldKind::flat_torus: return MatrixXd::Identity(M.dim(), M.dim());
    case ManifoldKind::sphere: {
      MatrixXd C = x;
      Eigen::HouseholderQR<MatrixXd> qr(C);
      const MatrixXd Q = qr.householderQ();
      return Q.rightCols(M.dim());
    }
    case ManifoldKind::surface_of_revolution: {
      MatrixXd E = MatrixXd::Zero(2, 2);
      E(0, 0) = 1.0;
      E(1, 1) = M.profile().value(x[0]);
      return E;
    }
    case ManifoldKind::product: {
      const auto& A = M.factor(0);
      const auto& B = M.factor(1);
      const MatrixXd Ea = tangent_frame(A, x.head(A.native_dim()));
      const MatrixXd Eb = tangent_frame(B, x.tail(B.native_dim()));
      MatrixXd E = MatrixXd::Zero(M.native_dim(), M.dim());
      E.topLeftCorner(Ea.rows(), Ea.cols()) = Ea;
      E.bottomRightCorner(Eb.rows(), Eb.cols()) = Eb;
      return E;
    }
  }
  return {};
}

}  // namespace

std::vector<VectorXd> cosphere_directions(const ModelManifold& M, const VectorXd& x, int count, double* covering_radius) {
  const int n = M.dim();
  const MatrixXd E = tangent_frame(M, x);
  std::vector<VectorXd> out;
  for (const VectorXd& d : sphere_directions(n, count)) out.push_back(E * d);
  if (covering_radius) *covering_radius = direction_covering_radius(n, static_cast<int>(out.size()));
  return out;
}

std::vector<ConjugateEvent> conjugate_points(const ModelManifold& M, const VectorXd& x, const VectorXd& direction,
                                             double T, const ConjugateOptions& opt) {
  if (!(T > 0)) throw PreconditionError("conjugate_points: T > 0 required");
  CotangentPoint p{x, direction, Chart::native};
  validate_native(M, p);
  p = normalize_covector(M, p);
  std::vector<ConjugateEvent> events;
  if (M.dim() < 2) return events;
  const double dt = std::min(opt.grid_step, T / 50.0);
  const int steps = static_cast<int>(std::ceil(T / dt));
  std::vector<double> ts(steps + 2), smin(steps + 2), scale(steps + 2);
  double running = 0.0;
  for (int k = 0; k <= steps + 1; ++k) {
    ts[k] = k * dt;
    const VectorXd sv = singular_values(jacobi_base(M, p, ts[k]));
    running = std::max(running, sv.size() ? sv[0] : 0.0);
    scale[k] = running;
    smin[k] = sv.size() ? sv[sv.size() - 1] : 0.0;
  }
  auto ratio = [&](int k) { return scale[k] > 0 ? smin[k] / scale[k] : 1.0; };
  for (int k = 1; k <= steps; ++k) {
    const double gk = ratio(k);
    if (gk >= opt.candidate_level) continue;
    if (!(gk <= ratio(k - 1) && gk <= ratio(k + 1))) continue;
    if (k > 1 && gk == ratio(k - 1)) continue;  // plateau: counted once
    const double sc = scale[k];
    auto g = [&](double t) {
      const VectorXd sv = singular_values(jacobi_base(M, p, t));
      return sv[sv.size() - 1] / sc;
    };
    const double tstar = golden_min(g, ts[k - 1], ts[k + 1], 1e-13);
    if (tstar > T + 1e-9) continue;
    const VectorXd sv = singular_values(jacobi_base(M, p, tstar));
    const double thr = opt.rel_threshold * sc;
    int mult = 0, band = 0;
    for (int i = 0; i < sv.size(); ++i) {
      if (sv[i] < thr) ++mult;
      else if (sv[i] < opt.flag_factor * thr) ++band;
    }
    if (mult == 0 && band == 0) continue;
    ConjugateEvent ev;
    ev.t = tstar;
    ev.witness = sv;
    ev.scale = sc;
    ev.flagged = band > 0;
    ev.multiplicity = mult > 0 ? mult : band;
    if (!events.empty() && std::abs(events.back().t - tstar) < 1e-9) continue;
    events.push_back(ev);
  }
  return events;
}

int count_in_window(const std::vector<ConjugateEvent>& events, double lo, double hi, bool* boundary_hit) {
  int c = 0;
  const double eps = 1e-9;
  for (const auto& e : events) {
    if (e.t > lo - eps && e.t < hi + eps) {
      c += e.multiplicity;
      if (boundary_hit && (std::abs(e.t - lo) <= eps || std::abs(e.t - hi) <= eps)) *boundary_hit = true;
    }
  }
  return c;
}

ConjugateSet maximally_conjugate_set(const ModelManifold& M, const VectorXd& x, int m, double r, double t,
                                     int direction_count, const ConjugateOptions& opt) {
  if (m < 1 || m > M.dim() - 1) throw PreconditionError("maximally_conjugate_set: 1 <= m <= n-1 required");
  if (!(r > 0)) throw PreconditionError("maximally_conjugate_set: r > 0 required");
  ConjugateSet out;
  const auto dirs = cosphere_directions(M, x, direction_count, &out.covering_radius);
  if (out.covering_radius > r)
    throw PreconditionError("maximally_conjugate_set: direction covering radius " + std::to_string(out.covering_radius) +
                            " exceeds r = " + std::to_string(r) + "; increase the direction count");
  out.directions_sampled = static_cast<int>(dirs.size());
  for (const auto& d : dirs) {
    const auto ev = conjugate_points(M, x, d, t + r, opt);
    bool boundary = false;
    if (count_in_window(ev, t - r, t + r, &boundary) >= m) {
      out.boundary_events = out.boundary_events || boundary;
      out.directions.push_back(d);
      out.endpoints.push_back(flow_point(M, normalize_covector(M, {x, d}), t).x);
    }
  }
  return out;
}

double r_schedule(double a, double t) { return std::exp(-a * t) / a; }

HypothesisReport check_noconj_hypothesis(const ModelManifold& M, const std::vector<VectorXd>& U, double a, double t0,
                                         double T, const HypothesisOptions& opt) {
  if (!(a > 0)) throw PreconditionError("check_noconj_hypothesis: a > 0 required");
  if (!(t0 > 0)) throw PreconditionError("check_noconj_hypothesis: t0 > 0 required");
  if (!(T > t0)) throw PreconditionError("check_noconj_hypothesis: T > t0 required");
  if (U.empty()) throw PreconditionError("check_noconj_hypothesis: U must be nonempty");
  const int n = M.dim();
  if (n < 2) throw PreconditionError("check_noconj_hypothesis: n >= 2 required");
  const int m = n - 1;
  int count = opt.direction_count;
  if (count <= 0) count = n == 2 ? 64 : (n == 3 ? 400 : 600);

  HypothesisReport rep;
  rep.directions = count;
  const double rmax = r_schedule(a, t0);

  struct Fan {
    std::vector<VectorXd> dirs;
    std::vector<std::vector<ConjugateEvent>> events;
  };
  std::vector<Fan> fans(U.size());
  std::vector<double> times;
  for (double t = t0; t <= T + 1e-12; t += opt.report_step) times.push_back(t);
  times.push_back(T);
  for (std::size_t j = 0; j < U.size(); ++j) {
    fans[j].dirs = cosphere_directions(M, U[j], count, &rep.direction_covering_radius);
    for (const auto& d : fans[j].dirs) {
      fans[j].events.push_back(conjugate_points(M, U[j], d, T + rmax, opt.conj));
      for (const auto& e : fans[j].events.back()) {
        if (e.t < t0 - rmax || e.t > T + rmax) continue;
        const double re = r_schedule(a, e.t);
        for (double tc : {e.t, e.t - 0.5 * re, e.t + 0.5 * re})
          if (tc >= t0 && tc <= T) times.push_back(tc);
      }
    }
  }
  std::sort(times.begin(), times.end());
  times.erase(std::unique(times.begin(), times.end(), [](double x, double y) { return std::abs(x - y) < 1e-12; }),
              times.end());

  for (std::size_t j2 = 0; j2 < U.size(); ++j2) {
    for (double t : times) {
      const double rt = r_schedule(a, t);
      std::vector<VectorXd> C;
      int mult_max = 0;
      bool boundary = false;
      for (std::size_t d = 0; d < fans[j2].dirs.size(); ++d) {
        const int c = count_in_window(fans[j2].events[d], t - rt, t + rt, &boundary);
        mult_max = std::max(mult_max, c);
        if (c >= m) C.push_back(flow_point(M, normalize_covector(M, {U[j2], fans[j2].dirs[d]}), t).x);
      }
      for (std::size_t j1 = 0; j1 < U.size(); ++j1) {
        if (j1 == j2 && !opt.include_diagonal) continue;
        HypothesisRow row;
        row.i1 = static_cast<int>(j1);
        row.i2 = static_cast<int>(j2);
        row.t = t;
        row.r_t = rt;
        row.multiplicity_max = mult_max;
        row.boundary = boundary;
        for (const auto& c : C) row.distance = std::min(row.distance, base_distance(M, U[j1], c));
        row.margin = row.distance - rt;
        row.inconclusive = !C.empty() && rep.direction_covering_radius > rt;
        if (row.inconclusive) ++rep.inconclusive;
        if (row.margin < rep.margin) {
          rep.margin = row.margin;
          rep.worst_t = t;
          rep.worst_i1 = row.i1;
          rep.worst_i2 = row.i2;
        }
        rep.rows.push_back(row);
      }
    }
  }
  rep.pairs = static_cast<int>(U.size() * (U.size() - (opt.include_diagonal ? 0 : 1)));
  rep.holds = rep.margin >= 0.0;
  return rep;
}

ExpansionEstimate max_expansion_rate(const ModelManifold& M, int sample_size, double T, double floor) {
  if (sample_size < 1) throw PreconditionError("max_expansion_rate: sample_size >= 1 required");
  if (!(T > 0)) throw PreconditionError("max_expansion_rate: T > 0 required");
  ExpansionEstimate est;
  est.T = T;
  est.samples = sample_size;
  est.raw = -1e300;
  est.half_time = -1e300;
  for (const auto& p : sample_cosphere(M, sample_size)) {
    const double full = std::log(Eigen::JacobiSVD<MatrixXd>(flow_jacobian(M, p, T)).singularValues()[0]) / T;
    const double half = std::log(Eigen::JacobiSVD<MatrixXd>(flow_jacobian(M, p, 0.5 * T)).singularValues()[0]) / (0.5 * T);
    est.raw = std::max(est.raw, full);
    est.half_time = std::max(est.half_time, half);
  }
  est.drift = std::abs(est.raw - est.half_time);
  est.floored = est.raw < floor;
  est.lambda = est.floored ? floor : est.raw;
  return est;
}

double ehrenfest_time(double h, double Lambda) {
  if (!(h > 0 && h < 1)) throw DomainError("ehrenfest_time: h in (0,1) required");
  if (!(Lambda > 0)) throw DomainError("ehrenfest_time: Lambda > 0 required");
  return std::log(1.0 / h) / (2.0 * Lambda);
}

}  // namespace geobeam
