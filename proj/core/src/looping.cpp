#include "geobeam/looping.hpp"

#include <cmath>

#include "geobeam/errors.hpp"
#include "geobeam/parallel.hpp"
#include "geobeam/spectral.hpp"

namespace geobeam {

using Eigen::VectorXd;

namespace {

// Transversal ball points of T_j on a grid of step R / per_radius, center first.
std::vector<CotangentPoint> ball_points(const GoodCover& cover, std::size_t j, int per_radius) {
  const Tube& tb = cover.tubes[j];
  const Transversal& H = cover.transversals[tb.transversal_id];
  const double step = cover.R / per_radius;
  const Eigen::Vector2d w = H.search_window(cover.R);
  const auto ec = H.embed(tb.params[0], tb.params[1]);
  std::vector<CotangentPoint> out{tb.center};
  const int nu = static_cast<int>(std::ceil(w[0] / step)), np = static_cast<int>(std::ceil(w[1] / step));
  for (int a = -nu; a <= nu; ++a)
    for (int b = -np; b <= np; ++b) {
      if (a == 0 && b == 0) continue;
      const double u = tb.params[0] + a * step, psi = tb.params[1] + b * step;
      if (H.embed_distance(H.embed(u, psi), ec) <= cover.R) out.push_back(H.point(u, psi));
    }
  return out;
}

}  // namespace

LoopReport classify_tubes(const GoodCover& cover, const VectorXd& x1, const VectorXd& x2, double t0, double T,
                          double R, const LoopOptions& opt) {
  if (!(t0 >= 1.0)) throw PreconditionError("classify_tubes: need t0 >= 1, got " + std::to_string(t0));
  if (!(T > t0)) throw PreconditionError("classify_tubes: need T > t0");
  if (!(R > 0)) throw PreconditionError("classify_tubes: need R > 0");
  const double step = opt.time_step > 0 ? opt.time_step : R / 4;
  if (step > R / 4 * (1 + 1e-12))
    throw PreconditionError("classify_tubes: time step " + std::to_string(step) + " exceeds R/4 = " +
                            std::to_string(R / 4));

  LoopReport rep;
  rep.x1 = x1;
  rep.x2 = x2;
  rep.t0 = t0;
  rep.T = T;
  rep.R = R;
  rep.time_step = step;
  rep.tubes = opt.tubes.empty() ? tubes_over_ball(cover, x1, R) : opt.tubes;
  rep.first_hit.assign(rep.tubes.size(), std::numeric_limits<double>::quiet_NaN());

  const ModelManifold& M = cover.manifold;
  const double reach = cover.tau + cover.R;
  const double start = t0 - reach, end = T + reach;
  const int nsteps = static_cast<int>(std::ceil((end - start) / step));
  const double radius = 2 * R;

  const Eigen::Vector3d y = to_vec3(x2);
  parallel_for(rep.tubes.size(), [&](std::size_t k) {
    const auto ball = ball_points(cover, rep.tubes[k], opt.ball_per_radius);
    double best = std::numeric_limits<double>::infinity();
    for (const auto& s : ball) {
      const BaseOrbit orbit(M, s);
      if (orbit.distance_at(start, y) <= radius) {
        best = std::min(best, start);
        continue;
      }
      for (int i = 1; i <= nsteps; ++i) {
        const double t = start + i * step;
        if (t >= best) break;
        if (orbit.distance_at(t, y) > radius) continue;
        double lo = t - step, hi = t;
        for (int it = 0; it < 40; ++it) {
          const double mid = 0.5 * (lo + hi);
          (orbit.distance_at(mid, y) <= radius ? hi : lo) = mid;
        }
        best = std::min(best, hi);
        break;
      }
    }
    if (std::isfinite(best)) rep.first_hit[k] = best;
  });

  for (std::size_t k = 0; k < rep.tubes.size(); ++k)
    (std::isnan(rep.first_hit[k]) ? rep.good : rep.bad).push_back(rep.tubes[k]);
  return rep;
}

BadCount bad_count_sup(const GoodCover& cover, const std::vector<VectorXd>& U, double t0, double T,
                       const LoopOptions& opt) {
  if (U.empty()) throw PreconditionError("bad_count_sup: U_sample is empty");
  BadCount out;
  const std::size_t n = U.size();
  std::vector<std::vector<std::size_t>> J(n);
  for (std::size_t i = 0; i < n; ++i) {
    J[i] = opt.tubes.empty() ? tubes_over_ball(cover, U[i], cover.R) : opt.tubes;
    out.j_sizes.push_back(J[i].size());
  }
  out.counts.assign(n * n, 0);
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b) {
      LoopOptions o = opt;
      o.tubes = J[a];
      if (o.tubes.empty()) continue;
      out.counts[a * n + b] = classify_tubes(cover, U[a], U[b], t0, T, cover.R, o).bad.size();
    }
  for (std::size_t a = 0; a < n; ++a)
    for (std::size_t b = 0; b < n; ++b)
      if (out.counts[a * n + b] > out.sup || (a == 0 && b == 0)) {
        out.sup = out.counts[a * n + b];
        out.arg_i1 = a;
        out.arg_i2 = b;
      }
  return out;
}

double predicted_improvement(double p, int n, double t0, double T, double badfrac, double eps0) {
  const double pc = critical_exponent(n);
  if (!(p > pc))
    throw DomainError("predicted_improvement: need p > p_c = " + std::to_string(pc) + ", got p = " +
                      std::to_string(p));
  if (!(t0 > 0) || !(T > 0)) throw DomainError("predicted_improvement: need t0 > 0 and T > 0");
  if (badfrac < 0) throw DomainError("predicted_improvement: need badfrac >= 0");
  if (eps0 < 0) throw DomainError("predicted_improvement: need eps0 >= 0");
  const double ratio = std::isinf(p) ? 0.0 : pc / p;
  return std::sqrt(t0 / T) + std::pow(badfrac, (1.0 - ratio) / (6.0 + eps0));
}

}  // namespace geobeam
