#include "geobeam/cover.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "geobeam/errors.hpp"
#include "geobeam/flow.hpp"
#include "geobeam/parallel.hpp"
#include "geobeam/random.hpp"
#include "geobeam/sequences.hpp"

namespace geobeam {

using Eigen::Vector2d;
using Eigen::Vector3d;
using Eigen::VectorXd;
using json = nlohmann::json;

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kSphereCell = 0.83;
constexpr double kSphereTauMin = 0.17;  // worst crossing time of the circle family is ~0.16
const double kSphereLevels[] = {-0.5, -0.25, 0.0, 0.25, 0.5};

std::vector<Vector3d> icosahedral_axes() {
  const double g = std::numbers::phi;
  std::vector<Vector3d> a = {{0, 1, g}, {0, 1, -g}, {1, g, 0}, {1, -g, 0}, {g, 0, 1}, {-g, 0, 1}};
  for (auto& v : a) v.normalize();
  return a;
}

bool supported(const ModelManifold& M) {
  return (M.kind() == ManifoldKind::flat_torus && M.dim() == 2) ||
         (M.kind() == ManifoldKind::sphere && M.dim() == 2);
}

void require_supported(const ModelManifold& M, const char* what) {
  if (!supported(M))
    throw DomainError(std::string(what) + ": covers are built on flat_torus(2) and sphere(2) only, got " +
                      M.describe());
}

// Uniform bucket grid over (u, psi) with periodic u.
class Buckets {
 public:
  Buckets(double u_period, double psi_lo, double psi_hi, double cell) : period_(u_period), lo_(psi_lo) {
    nu_ = std::max(1, static_cast<int>(std::floor(u_period / cell)));
    cu_ = u_period / nu_;
    cp_ = cell;
    np_ = std::max(1, static_cast<int>(std::ceil((psi_hi - psi_lo) / cell)) + 1);
    cells_.resize(static_cast<std::size_t>(nu_) * np_);
  }
  void insert(const Vector2d& p, std::uint32_t idx) { cells_[index(iu(p[0]), ip(p[1]))].push_back(idx); }

  template <class F>
  void query(const Vector2d& p, const Vector2d& window, F&& visit) const {
    const long u0 = static_cast<long>(std::floor((p[0] - window[0]) / cu_));
    const long u1 = static_cast<long>(std::floor((p[0] + window[0]) / cu_));
    const long p0 = static_cast<long>(std::floor((p[1] - window[1] - lo_) / cp_));
    const long p1 = static_cast<long>(std::floor((p[1] + window[1] - lo_) / cp_));
    const int ilo = static_cast<int>(std::max<long>(0, p0));
    const int ihi = static_cast<int>(std::min<long>(np_ - 1, p1));
    if (ilo > ihi) return;
    const bool all_u = u1 - u0 + 1 >= nu_;
    const long ubeg = all_u ? 0 : u0, uend = all_u ? nu_ - 1 : u1;
    for (long a = ubeg; a <= uend; ++a) {
      const int ia = static_cast<int>(((a % nu_) + nu_) % nu_);
      for (int b = ilo; b <= ihi; ++b)
        for (std::uint32_t idx : cells_[index(ia, b)]) visit(idx);
    }
  }

 private:
  int iu(double u) const {
    int a = static_cast<int>(std::floor(wrap_positive(u, period_) / cu_));
    return std::min(a, nu_ - 1);
  }
  int ip(double psi) const {
    return std::clamp(static_cast<int>(std::floor((psi - lo_) / cp_)), 0, np_ - 1);
  }
  std::size_t index(int a, int b) const { return static_cast<std::size_t>(a) * np_ + b; }

  double period_, lo_, cu_ = 1, cp_ = 1;
  int nu_ = 1, np_ = 1;
  std::vector<std::vector<std::uint32_t>> cells_;
};

}  // namespace

// Per-transversal lookup of tube centers.
struct CenterIndex {
  std::vector<std::vector<std::uint32_t>> members;  // tube indices per transversal
  std::vector<Buckets> buckets;
  std::vector<std::vector<std::array<double, 9>>> embeds;  // parallel to members
};

struct CoverIndex {
  CenterIndex centers;
};

namespace {

CenterIndex index_centers(const GoodCover& cover, double cell) {
  CenterIndex ix;
  const std::size_t nt = cover.transversals.size();
  ix.members.resize(nt);
  ix.embeds.resize(nt);
  for (const auto& H : cover.transversals) {
    const double margin = 3.5 * cover.R;
    ix.buckets.emplace_back(H.u_period, -H.psi_max - margin, H.psi_max + margin, cell);
  }
  for (std::size_t j = 0; j < cover.tubes.size(); ++j) {
    const auto& tb = cover.tubes[j];
    const auto& H = cover.transversals[tb.transversal_id];
    auto& mem = ix.members[tb.transversal_id];
    ix.buckets[tb.transversal_id].insert(tb.params, static_cast<std::uint32_t>(mem.size()));
    mem.push_back(static_cast<std::uint32_t>(j));
    ix.embeds[tb.transversal_id].push_back(H.embed(tb.params[0], tb.params[1]));
  }
  return ix;
}

const CenterIndex& index_of(const GoodCover& cover, std::shared_ptr<const CoverIndex>& keep) {
  if (cover.index) return cover.index->centers;
  keep = std::make_shared<const CoverIndex>(CoverIndex{index_centers(cover, cover.R)});
  return keep->centers;
}

Vector3d any_perp(const Vector3d& a) {
  Vector3d t = std::abs(a[0]) < 0.9 ? Vector3d::UnitX() : Vector3d::UnitY();
  t -= t.dot(a) * a;
  return t.normalized();
}

}  // namespace

// ---- Transversal -------------------------------------------------------------

CotangentPoint Transversal::point(double u, double psi) const {
  CotangentPoint p;
  if (kind == ManifoldKind::flat_torus) {
    const int i = axis_index, j = 1 - axis_index;
    p.x = VectorXd::Zero(2);
    p.xi = VectorXd::Zero(2);
    p.x[i] = level;
    p.x[j] = wrap_positive(u, u_period);
    p.xi[i] = sign * std::cos(psi);
    p.xi[j] = std::sin(psi);
    return p;
  }
  const double cb = std::cos(level), sb = std::sin(level);
  const Vector3d r = std::cos(u) * e1 + std::sin(u) * e2;
  const Vector3d x = cb * r + sb * axis;
  const Vector3d n = -sb * r + cb * axis;
  const Vector3d ephi = -std::sin(u) * e1 + std::cos(u) * e2;
  p.x = x;
  p.xi = std::cos(psi) * sign * n + std::sin(psi) * ephi;
  return p;
}

Vector2d Transversal::params(const CotangentPoint& p) const {
  if (kind == ManifoldKind::flat_torus) {
    const int i = axis_index, j = 1 - axis_index;
    return {wrap_positive(p.x[j], u_period), std::atan2(p.xi[j], sign * p.xi[i])};
  }
  const Vector3d x = p.x.head<3>(), xi = p.xi.head<3>();
  const double u = std::atan2(x.dot(e2), x.dot(e1));
  const double cb = std::cos(level), sb = std::sin(level);
  const Vector3d r = std::cos(u) * e1 + std::sin(u) * e2;
  const Vector3d n = -sb * r + cb * axis;
  const Vector3d ephi = -std::sin(u) * e1 + std::cos(u) * e2;
  return {wrap_positive(u, u_period), std::atan2(xi.dot(ephi), sign * xi.dot(n))};
}

std::array<double, 9> Transversal::embed(double u, double psi) const {
  std::array<double, 9> e{};
  if (kind == ManifoldKind::flat_torus) {
    e[0] = wrap_positive(u, u_period);
    e[1] = std::cos(psi);
    e[2] = std::sin(psi);
    return e;
  }
  const CotangentPoint p = point(u, psi);
  const Vector3d x = p.x, xi = p.xi, w = x.cross(xi);
  for (int k = 0; k < 3; ++k) {
    e[k] = x[k];
    e[3 + k] = xi[k];
    e[6 + k] = w[k];
  }
  return e;
}

double Transversal::embed_distance(const std::array<double, 9>& a, const std::array<double, 9>& b) const {
  if (kind == ManifoldKind::flat_torus) {
    const double du = wrap_centered(a[0] - b[0], u_period);
    const double dc = a[1] - b[1], ds = a[2] - b[2];
    return std::sqrt(du * du + dc * dc + ds * ds);
  }
  double s = 0;
  for (int k = 0; k < 9; ++k) s += (a[k] - b[k]) * (a[k] - b[k]);
  return 2.0 * std::asin(std::min(1.0, std::sqrt(s / 8.0)));
}

Vector2d Transversal::search_window(double d) const {
  if (kind == ManifoldKind::flat_torus) {
    // distance^2 = du^2 + 4 sin^2(dpsi / 2)
    return {d, d >= 2 ? kPi : 2.0 * std::asin(d / 2.0)};
  }
  // rotation angle of R_axis(du) R_x(dpsi): sin(theta/2) >= |sin(du/2)| cos(level), same for dpsi
  const double s = std::sin(std::min(d, kPi) / 2.0) / std::cos(level);
  const double w = s >= 1 ? kPi : 2.0 * std::asin(s);
  return {w, w};
}

std::string Transversal::describe() const {
  std::ostringstream os;
  if (kind == ManifoldKind::flat_torus)
    os << "plane x" << axis_index << "=" << level << " sign " << sign;
  else
    os << "circle axis " << axis_index << " latitude " << level << " sign " << sign;
  return os.str();
}

std::vector<Crossing> crossings(const ModelManifold& M, const Transversal& H, const CotangentPoint& q,
                                double tmax) {
  std::vector<Crossing> out;
  if (H.kind == ManifoldKind::flat_torus) {
    const int i = H.axis_index, j = 1 - i;
    const double wi = q.xi[i];
    if (H.sign * wi <= 0) return out;
    const double L = M.periods()[i];
    const double step = L / std::abs(wi);
    const double t0 = wrap_centered(q.x[i] - H.level, L) / wi;
    const int kmax = static_cast<int>(std::ceil(tmax / step)) + 1;
    for (int k = -kmax; k <= kmax; ++k) {
      const double t = t0 + k * step;
      if (std::abs(t) > tmax) continue;
      out.push_back({t, {wrap_positive(q.x[j] - t * q.xi[j], H.u_period), std::atan2(q.xi[j], H.sign * wi)}});
    }
    std::sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) { return std::abs(a.t) < std::abs(b.t); });
    return out;
  }
  // orbit x(s) = x cos s + v sin s; sigma = x(-t)
  const Vector3d x = q.x.head<3>(), v = q.xi.head<3>();
  const double A = x.dot(H.axis), B = v.dot(H.axis);
  const double Rr = std::hypot(A, B);
  const double c = std::sin(H.level);
  if (Rr <= std::abs(c)) return out;
  const double ph = std::atan2(B, A), d = std::acos(c / Rr);
  for (double base : {ph + d, ph - d}) {
    for (int k = -2; k <= 2; ++k) {
      const double s = wrap_centered(base, 2 * kPi) + 2 * kPi * k;
      if (std::abs(s) > tmax) continue;
      const double vs = -A * std::sin(s) + B * std::cos(s);  // d/ds <x(s), axis>
      if (H.sign * vs <= 0) continue;
      CotangentPoint sig;
      sig.x = x * std::cos(s) + v * std::sin(s);
      sig.xi = -x * std::sin(s) + v * std::cos(s);
      out.push_back({-s, H.params(sig)});
    }
  }
  std::sort(out.begin(), out.end(), [](const Crossing& a, const Crossing& b) { return std::abs(a.t) < std::abs(b.t); });
  return out;
}

std::vector<Transversal> canonical_transversals(const ModelManifold& M, double tau) {
  require_supported(M, "canonical_transversals");
  std::vector<Transversal> out;
  if (M.kind() == ManifoldKind::flat_torus) {
    for (int i = 0; i < 2; ++i) {
      const double L = M.periods()[i];
      // nearest plane within spacing / 2 at speed >= 1/sqrt 2
      const int count = std::max(1, static_cast<int>(std::ceil(L * std::numbers::sqrt2 / (2 * 0.9 * tau))));
      for (int k = 0; k < count; ++k)
        for (int sign : {1, -1}) {
          Transversal H;
          H.id = static_cast<int>(out.size());
          H.kind = ManifoldKind::flat_torus;
          H.axis_index = i;
          H.level = L * k / count;
          H.sign = sign;
          H.psi_max = kPi / 4;
          H.u_period = M.periods()[1 - i];
          H.recross_time = L;
          out.push_back(H);
        }
    }
    return out;
  }
  const auto axes = icosahedral_axes();
  for (std::size_t a = 0; a < axes.size(); ++a)
    for (double beta : kSphereLevels)
      for (int sign : {1, -1}) {
        Transversal H;
        H.id = static_cast<int>(out.size());
        H.kind = ManifoldKind::sphere;
        H.axis_index = static_cast<int>(a);
        H.axis = axes[a];
        H.e1 = any_perp(axes[a]);
        H.e2 = axes[a].cross(H.e1);
        H.level = beta;
        H.sign = sign;
        H.psi_max = std::acos(kSphereCell);
        H.u_period = 2 * kPi;
        H.recross_time = 2 * kPi;
        out.push_back(H);
      }
  return out;
}

CoverLimits cover_limits(const ModelManifold& M, double tau) {
  require_supported(M, "cover_limits");
  CoverLimits lim;
  const auto Hs = canonical_transversals(M, tau);
  double recross = 1e300, psi_max = 0;
  for (const auto& H : Hs) {
    recross = std::min(recross, H.recross_time);
    psi_max = std::max(psi_max, H.psi_max);
  }
  lim.tau_injH = recross / 2;
  lim.tau_M = lim.tau_injH / 2;
  if (M.kind() == ManifoldKind::flat_torus) {
    double worst = 0;
    for (int i = 0; i < 2; ++i) {
      const double L = M.periods()[i];
      const int count = std::max(1, static_cast<int>(std::ceil(L * std::numbers::sqrt2 / (2 * 0.9 * tau))));
      worst = std::max(worst, L / count / 2 * std::numbers::sqrt2);
    }
    lim.tau_min = worst;
  } else {
    lim.tau_min = kSphereTauMin;
  }
  lim.R0 = std::min((lim.tau_injH - tau) / 3, (kPi / 2 - psi_max) / 3);
  return lim;
}

// ---- base orbits ----------------------------------------------------------------

Vector3d to_vec3(const VectorXd& x) {
  Vector3d v = Vector3d::Zero();
  for (int i = 0; i < std::min<int>(3, static_cast<int>(x.size())); ++i) v[i] = x[i];
  return v;
}

BaseOrbit::BaseOrbit(const ModelManifold& M, const CotangentPoint& p) {
  require_supported(M, "BaseOrbit");
  sphere_ = M.kind() == ManifoldKind::sphere;
  p_ = to_vec3(p.x);
  w_ = to_vec3(p.xi);
  if (!sphere_) {
    L0_ = M.periods()[0];
    L1_ = M.periods()[1];
  }
}

double BaseOrbit::distance_at(double t, const Vector3d& y) const {
  if (sphere_) {
    const double c = (p_ * std::cos(t) + w_ * std::sin(t)).dot(y);
    return std::acos(std::clamp(c, -1.0, 1.0));
  }
  const double a = wrap_centered(p_[0] + t * w_[0] - y[0], L0_);
  const double b = wrap_centered(p_[1] + t * w_[1] - y[1], L1_);
  return std::hypot(a, b);
}

double BaseOrbit::segment_distance(double L, const Vector3d& y) const {
  if (sphere_) {
    const double A = p_.dot(y), B = w_.dot(y);
    const double ts = std::atan2(B, A);
    double best = std::max(A * std::cos(L) + B * std::sin(L), A * std::cos(L) - B * std::sin(L));
    if (std::abs(ts) <= L) best = std::max(best, std::hypot(A, B));
    return std::acos(std::clamp(best, -1.0, 1.0));
  }
  // nearest translates of y around the segment midpoint
  const double dx = wrap_centered(y[0] - p_[0], L0_), dy = wrap_centered(y[1] - p_[1], L1_);
  double best = 1e300;
  for (int a = -1; a <= 1; ++a)
    for (int b = -1; b <= 1; ++b) {
      const double qx = dx + a * L0_, qy = dy + b * L1_;
      const double t = std::clamp(qx * w_[0] + qy * w_[1], -L, L);
      best = std::min(best, std::hypot(qx - t * w_[0], qy - t * w_[1]));
    }
  return best;
}

// ---- separated sets -------------------------------------------------------------

std::vector<std::size_t> maximal_separated_set(std::size_t count,
                                               const std::function<double(std::size_t, std::size_t)>& dist,
                                               double r, double reference_spacing) {
  if (!(r > 0)) throw PreconditionError("maximal_separated_set: need r > 0");
  if (reference_spacing > r / 4 * (1 + 1e-12))
    throw PreconditionError("maximal_separated_set: reference spacing " + std::to_string(reference_spacing) +
                            " exceeds r/4 = " + std::to_string(r / 4));
  std::vector<std::size_t> chosen;
  for (std::size_t i = 0; i < count; ++i) {
    bool ok = true;
    for (std::size_t c : chosen)
      if (dist(i, c) < r) {
        ok = false;
        break;
      }
    if (ok) chosen.push_back(i);
  }
  return chosen;
}

std::vector<VectorXd> maximal_separated_set(const ModelManifold& M, double r) {
  std::vector<VectorXd> ref;
  double spacing = 0;
  if (M.kind() == ManifoldKind::flat_torus && M.dim() <= 2) {
    const auto& L = M.periods();
    std::vector<int> n(L.size());
    for (std::size_t i = 0; i < L.size(); ++i) {
      n[i] = static_cast<int>(std::ceil(L[i] / (r / 4)));
      spacing = std::max(spacing, L[i] / n[i]);
    }
    if (L.size() == 1) {
      for (int a = 0; a < n[0]; ++a) ref.push_back(VectorXd::Constant(1, L[0] * a / n[0]));
    } else {
      for (int a = 0; a < n[0]; ++a)
        for (int b = 0; b < n[1]; ++b) ref.push_back(Eigen::Vector2d(L[0] * a / n[0], L[1] * b / n[1]));
    }
  } else if (M.kind() == ManifoldKind::sphere && M.dim() == 2) {
    int count = 16;
    while (direction_covering_radius(3, count) > r / 4) count *= 2;
    ref = sphere_directions(3, count);
    spacing = direction_covering_radius(3, count);
  } else {
    throw DomainError("maximal_separated_set: supported on circles, flat_torus(2) and sphere(2), got " +
                      M.describe());
  }
  const auto idx = maximal_separated_set(
      ref.size(), [&](std::size_t a, std::size_t b) { return base_distance(M, ref[a], ref[b]); }, r, spacing);
  std::vector<VectorXd> out;
  for (std::size_t i : idx) out.push_back(ref[i]);
  return out;
}

std::vector<std::vector<std::size_t>> greedy_partition(
    std::size_t count, const std::function<double(std::size_t, std::size_t)>& dist, double conflict_radius) {
  std::vector<int> color(count, -1);
  std::vector<std::vector<std::size_t>> classes;
  std::vector<char> used;
  for (std::size_t i = 0; i < count; ++i) {
    used.assign(classes.size() + 1, 0);
    for (std::size_t k = 0; k < i; ++k)
      if (dist(i, k) <= conflict_radius) used[color[k]] = 1;
    int c = 0;
    while (used[c]) ++c;
    color[i] = c;
    if (c == static_cast<int>(classes.size())) classes.emplace_back();
    classes[c].push_back(i);
  }
  return classes;
}

// ---- covers ----------------------------------------------------------------

double class_count_bound() { return std::pow(14.0 / 0.5, 2); }

GoodCover build_good_cover(const ModelManifold& M, double tau, double R) {
  require_supported(M, "build_good_cover");
  const CoverLimits lim = cover_limits(M, tau);
  if (!(tau > 0) || !(tau < lim.tau_M))
    throw PreconditionError("build_good_cover: need 0 < tau < tau_M = " + std::to_string(lim.tau_M) +
                            ", got tau = " + std::to_string(tau));
  if (tau < lim.tau_min)
    throw PreconditionError("build_good_cover: need tau >= " + std::to_string(lim.tau_min) +
                            " so every orbit meets a transversal cell, got tau = " + std::to_string(tau));
  if (!(R > 0) || R > lim.R0 * (1 + 1e-9))
    throw PreconditionError("build_good_cover: need 0 < R <= R_0 = " + std::to_string(lim.R0) +
                            ", got R = " + std::to_string(R));

  GoodCover cover;
  cover.manifold = M;
  cover.tau = tau;
  cover.R = R;
  cover.transversals = canonical_transversals(M, tau);

  const double r = R / 2;       // separation of the centers
  const double spacing = r / 4;  // reference grid step in both parameters
  for (const auto& H : cover.transversals) {
    const int nu = static_cast<int>(std::ceil(H.u_period / spacing));
    const int np = static_cast<int>(std::ceil(2 * H.psi_max / spacing)) + 1;
    Buckets buckets(H.u_period, -H.psi_max - r, H.psi_max + r, r);
    std::vector<std::array<double, 9>> chosen;
    std::vector<Vector2d> chosen_params;
    const Vector2d window = H.search_window(r);
    for (int a = 0; a < nu; ++a) {
      const double u = H.u_period * a / nu;
      for (int b = 0; b < np; ++b) {
        const double psi = -H.psi_max + 2 * H.psi_max * b / (np - 1);
        const Vector2d p(u, psi);
        const auto e = H.embed(u, psi);
        bool ok = true;
        buckets.query(p, window, [&](std::uint32_t k) {
          if (ok && H.embed_distance(e, chosen[k]) < r) ok = false;
        });
        if (!ok) continue;
        buckets.insert(p, static_cast<std::uint32_t>(chosen.size()));
        chosen.push_back(e);
        chosen_params.push_back(p);
      }
    }

    // first-fit classes, conflict when centers are within 6R
    const double conflict = 6 * R;
    const Vector2d cwin = H.search_window(conflict);
    Buckets cb(H.u_period, -H.psi_max - r, H.psi_max + r, R);
    std::vector<int> color(chosen.size(), -1);
    std::vector<char> used;
    int nclass = 0;
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      used.assign(nclass + 1, 0);
      cb.query(chosen_params[i], cwin, [&](std::uint32_t k) {
        if (H.embed_distance(chosen[i], chosen[k]) <= conflict) used[color[k]] = 1;
      });
      int c = 0;
      while (used[c]) ++c;
      color[i] = c;
      nclass = std::max(nclass, c + 1);
      cb.insert(chosen_params[i], static_cast<std::uint32_t>(i));
    }

    const int offset = static_cast<int>(cover.classes.size());
    cover.classes.resize(offset + nclass);
    cover.classes_per_transversal.push_back(nclass);
    for (std::size_t i = 0; i < chosen.size(); ++i) {
      Tube tb;
      tb.center = H.point(chosen_params[i][0], chosen_params[i][1]);
      tb.tau = tau;
      tb.radius = R;
      tb.transversal_id = H.id;
      tb.params = chosen_params[i];
      tb.class_id = offset + color[i];
      cover.classes[tb.class_id].push_back(cover.tubes.size());
      cover.tubes.push_back(std::move(tb));
    }
  }
  cover.D = static_cast<int>(cover.classes.size());
  reindex(cover);
  return cover;
}

std::vector<std::size_t> tubes_containing(const GoodCover& cover, const CotangentPoint& q, double inflation) {
  std::shared_ptr<const CoverIndex> keep;
  const CenterIndex& ix = index_of(cover, keep);
  const double rad = cover.R * inflation;
  std::vector<std::size_t> out;
  for (const auto& H : cover.transversals) {
    const auto& mem = ix.members[H.id];
    if (mem.empty()) continue;
    const Vector2d window = H.search_window(rad);
    for (const Crossing& c : crossings(cover.manifold, H, q, cover.tau + rad)) {
      const auto e = H.embed(c.params[0], c.params[1]);
      ix.buckets[H.id].query(c.params, window, [&](std::uint32_t k) {
        if (H.embed_distance(e, ix.embeds[H.id][k]) < rad) out.push_back(mem[k]);
      });
    }
  }
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

namespace {

CotangentPoint cosphere_sample(const ModelManifold& M, std::size_t i) {
  const VectorXd h = halton(i + 1, 3);
  CotangentPoint q;
  if (M.kind() == ManifoldKind::flat_torus) {
    q.x = Eigen::Vector2d(h[0] * M.periods()[0], h[1] * M.periods()[1]);
    q.xi = Eigen::Vector2d(std::cos(2 * kPi * h[2]), std::sin(2 * kPi * h[2]));
    return q;
  }
  const double z = 2 * h[0] - 1, ph = 2 * kPi * h[1], s = std::sqrt(std::max(0.0, 1 - z * z));
  const Vector3d x(s * std::cos(ph), s * std::sin(ph), z);
  const Vector3d t1 = any_perp(x), t2 = x.cross(t1);
  q.x = x;
  q.xi = std::cos(2 * kPi * h[2]) * t1 + std::sin(2 * kPi * h[2]) * t2;
  return q;
}

}  // namespace

CoverCheck check_cover(const GoodCover& cover, std::size_t samples, std::size_t flow_samples) {
  CoverCheck out;
  std::shared_ptr<const CoverIndex> keep;
  const CenterIndex& ix = index_of(cover, keep);

  // cover property
  std::vector<char> covered(samples, 0);
  parallel_for(samples, [&](std::size_t i) {
    covered[i] = !tubes_containing(cover, cosphere_sample(cover.manifold, i)).empty();
  });
  out.samples = samples;
  for (std::size_t i = 0; i < samples; ++i)
    if (!covered[i]) {
      if (out.uncovered == 0) out.counterexample = cosphere_sample(cover.manifold, i);
      ++out.uncovered;
    }
  out.cover_ok = out.uncovered == 0;

  // center separation inside classes; pairs closer than 8R are examined
  double min_sep = 8.0;
  std::size_t pairs = 0;
  for (const auto& H : cover.transversals) {
    const auto& mem = ix.members[H.id];
    const Vector2d window = H.search_window(8 * cover.R);
    for (std::size_t a = 0; a < mem.size(); ++a) {
      ix.buckets[H.id].query(cover.tubes[mem[a]].params, window, [&](std::uint32_t b) {
        if (b <= a || cover.tubes[mem[a]].class_id != cover.tubes[mem[b]].class_id) return;
        const double d = H.embed_distance(ix.embeds[H.id][a], ix.embeds[H.id][b]);
        if (d < 8 * cover.R) {
          ++pairs;
          min_sep = std::min(min_sep, d / cover.R);
        }
      });
    }
  }
  out.pairs_checked = pairs;
  out.min_class_separation = min_sep;

  // sampled flow check of the inflated tubes
  std::vector<std::size_t> viol(flow_samples, 0);
  parallel_for(flow_samples, [&](std::size_t s) {
    Stream rng(0x5eedc0feULL, s);
    const std::size_t j = static_cast<std::size_t>(rng.uniform() * cover.tubes.size()) % cover.tubes.size();
    const Tube& tb = cover.tubes[j];
    const Transversal& H = cover.transversals[tb.transversal_id];
    const double rad = 3 * cover.R;
    const Vector2d w = H.search_window(rad);
    const auto ec = H.embed(tb.params[0], tb.params[1]);
    Vector2d p;
    for (;;) {
      p = tb.params + Vector2d(rng.uniform(-w[0], w[0]), rng.uniform(-w[1], w[1]));
      if (H.embed_distance(H.embed(p[0], p[1]), ec) < rad) break;
    }
    const double tlen = cover.tau + rad;
    const CotangentPoint q = flow_point(cover.manifold, H.point(p[0], p[1]), rng.uniform(-tlen, tlen));
    for (const Crossing& c : crossings(cover.manifold, H, q, tlen)) {
      const auto e = H.embed(c.params[0], c.params[1]);
      ix.buckets[H.id].query(c.params, w, [&](std::uint32_t k) {
        const std::size_t other = ix.members[H.id][k];
        if (other == j || cover.tubes[other].class_id != tb.class_id) return;
        if (H.embed_distance(e, ix.embeds[H.id][k]) < rad) ++viol[s];
      });
    }
  });
  out.flow_samples = flow_samples;
  for (auto v : viol) out.flow_violations += v;
  out.disjoint_ok = out.min_class_separation > 6.0 && out.flow_violations == 0;

  out.max_classes_per_transversal = 0;
  for (int c : cover.classes_per_transversal)
    out.max_classes_per_transversal = std::max(out.max_classes_per_transversal, c);
  out.class_bound_ok = out.max_classes_per_transversal <= class_count_bound();
  return out;
}

std::vector<CotangentPoint> tube_samples(const GoodCover& cover, std::size_t j, double inflation, int per_radius) {
  const Tube& tb = cover.tubes.at(j);
  const Transversal& H = cover.transversals[tb.transversal_id];
  const double rad = cover.R * inflation;
  const double step = cover.R / per_radius;
  const Vector2d w = H.search_window(rad);
  const auto ec = H.embed(tb.params[0], tb.params[1]);
  std::vector<CotangentPoint> ball;
  const int nu = static_cast<int>(std::ceil(w[0] / step)), np = static_cast<int>(std::ceil(w[1] / step));
  for (int a = -nu; a <= nu; ++a)
    for (int b = -np; b <= np; ++b) {
      const double u = tb.params[0] + a * step, psi = tb.params[1] + b * step;
      if (H.embed_distance(H.embed(u, psi), ec) <= rad) ball.push_back(H.point(u, psi));
    }
  const double tlen = cover.tau + rad;
  const int nt = static_cast<int>(std::ceil(2 * tlen / step));
  std::vector<CotangentPoint> out;
  out.reserve(ball.size() * (nt + 1));
  for (int k = 0; k <= nt; ++k) {
    const double t = -tlen + 2 * tlen * k / nt;
    for (const auto& s : ball) out.push_back(flow_point(cover.manifold, s, t));
  }
  return out;
}

std::vector<std::size_t> tubes_over_ball(const GoodCover& cover, const VectorXd& x, double r, int per_radius) {
  const double step = cover.R / per_radius;
  const double L = cover.tau + cover.R;
  const Vector3d y = to_vec3(x);
  // a ball point leaves the center orbit by at most R (1 + L) in base distance over |t| <= L
  const double spread = cover.R * (1 + L);
  std::vector<char> hit(cover.tubes.size(), 0);
  parallel_for(cover.tubes.size(), [&](std::size_t j) {
    const Tube& tb = cover.tubes[j];
    const double dc = BaseOrbit(cover.manifold, tb.center).segment_distance(L, y);
    if (dc <= r + step) {
      hit[j] = 1;
      return;
    }
    if (dc > r + step + spread) return;
    const Transversal& H = cover.transversals[tb.transversal_id];
    const Eigen::Vector2d w = H.search_window(cover.R);
    const auto ec = H.embed(tb.params[0], tb.params[1]);
    const int nu = static_cast<int>(std::ceil(w[0] / step)), np = static_cast<int>(std::ceil(w[1] / step));
    for (int a = -nu; a <= nu; ++a)
      for (int b = -np; b <= np; ++b) {
        const double u = tb.params[0] + a * step, psi = tb.params[1] + b * step;
        if (H.embed_distance(H.embed(u, psi), ec) > cover.R) continue;
        if (BaseOrbit(cover.manifold, H.point(u, psi)).segment_distance(L, y) <= r + step) {
          hit[j] = 1;
          return;
        }
      }
  });
  std::vector<std::size_t> out;
  for (std::size_t j = 0; j < hit.size(); ++j)
    if (hit[j]) out.push_back(j);
  return out;
}

void reindex(GoodCover& cover) {
  cover.index.reset();
  cover.index = std::make_shared<const CoverIndex>(CoverIndex{index_centers(cover, cover.R)});
}

// ---- JSON -----------------------------------------------------------------------

std::string cover_to_json(const GoodCover& cover) {
  json j;
  const auto& M = cover.manifold;
  if (M.kind() == ManifoldKind::flat_torus)
    j["manifold"] = {{"kind", "flat_torus"}, {"periods", M.periods()}};
  else
    j["manifold"] = {{"kind", "sphere"}, {"n", M.dim()}};
  j["tau"] = cover.tau;
  j["R"] = cover.R;
  j["D"] = cover.D;
  j["transversals"] = json::array();
  for (const auto& H : cover.transversals) {
    j["transversals"].push_back({{"id", H.id},
                                 {"description", H.describe()},
                                 {"axis_index", H.axis_index},
                                 {"axis", {H.axis[0], H.axis[1], H.axis[2]}},
                                 {"e1", {H.e1[0], H.e1[1], H.e1[2]}},
                                 {"level", H.level},
                                 {"sign", H.sign},
                                 {"psi_max", H.psi_max},
                                 {"u_period", H.u_period},
                                 {"recross_time", H.recross_time}});
  }
  j["tubes"] = json::array();
  for (const auto& tb : cover.tubes) {
    j["tubes"].push_back({{"transversal", tb.transversal_id},
                          {"u", tb.params[0]},
                          {"psi", tb.params[1]},
                          {"class", tb.class_id},
                          {"x", std::vector<double>(tb.center.x.data(), tb.center.x.data() + tb.center.x.size())},
                          {"xi", std::vector<double>(tb.center.xi.data(), tb.center.xi.data() + tb.center.xi.size())}});
  }
  j["classes_per_transversal"] = cover.classes_per_transversal;
  return j.dump();
}

GoodCover cover_from_json(const std::string& text) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::exception& e) {
    throw DomainError(std::string("cover JSON: ") + e.what());
  }
  try {
    GoodCover cover;
    const auto& m = j.at("manifold");
    if (m.at("kind") == "flat_torus")
      cover.manifold = ModelManifold::flat_torus(m.at("periods").get<std::vector<double>>());
    else if (m.at("kind") == "sphere")
      cover.manifold = ModelManifold::sphere(m.at("n").get<int>());
    else
      throw DomainError("cover JSON: unsupported manifold kind");
    cover.tau = j.at("tau");
    cover.R = j.at("R");
    cover.D = j.at("D");
    for (const auto& t : j.at("transversals")) {
      Transversal H;
      H.id = t.at("id");
      H.kind = cover.manifold.kind();
      H.axis_index = t.at("axis_index");
      const auto ax = t.at("axis").get<std::vector<double>>();
      const auto e1 = t.at("e1").get<std::vector<double>>();
      H.axis = Vector3d(ax[0], ax[1], ax[2]);
      H.e1 = Vector3d(e1[0], e1[1], e1[2]);
      H.e2 = H.axis.cross(H.e1);
      H.level = t.at("level");
      H.sign = t.at("sign");
      H.psi_max = t.at("psi_max");
      H.u_period = t.at("u_period");
      H.recross_time = t.at("recross_time");
      cover.transversals.push_back(H);
    }
    cover.classes.resize(cover.D);
    for (const auto& t : j.at("tubes")) {
      Tube tb;
      tb.transversal_id = t.at("transversal");
      tb.params = Vector2d(t.at("u").get<double>(), t.at("psi").get<double>());
      tb.class_id = t.at("class");
      tb.center = cover.transversals.at(tb.transversal_id).point(tb.params[0], tb.params[1]);
      tb.tau = cover.tau;
      tb.radius = cover.R;
      cover.classes.at(tb.class_id).push_back(cover.tubes.size());
      cover.tubes.push_back(std::move(tb));
    }
    cover.classes_per_transversal = j.at("classes_per_transversal").get<std::vector<int>>();
    reindex(cover);
    return cover;
  } catch (const json::exception& e) {
    throw DomainError(std::string("cover JSON: ") + e.what());
  }
}

}  // namespace geobeam
