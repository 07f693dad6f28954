#include "geobeam/acceptance.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <set>
#include <sstream>

#include "geobeam/cover.hpp"
#include "geobeam/errors.hpp"
#include "geobeam/flow.hpp"
#include "geobeam/looping.hpp"
#include "geobeam/microlocal2.hpp"
#include "geobeam/quantize.hpp"
#include "geobeam/sequences.hpp"
#include "geobeam/spectral.hpp"

namespace geobeam {

namespace {

constexpr double kPi = std::numbers::pi;

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

struct Outcome {
  bool ok = true;
  std::ostringstream detail;
  void fail_if(bool bad) { ok = ok && !bad; }
};

// Exact values of the growth exponent, written out as fractions.
struct DeltaCase {
  int n;
  double p;
  double value;
};

Outcome ac1() {
  Outcome o;
  const double inf = kInfinity;
  const std::vector<DeltaCase> table = {
      {2, 6, 1.0 / 6}, {2, 8, 1.0 / 4},   {2, 12, 1.0 / 3},   {2, inf, 1.0 / 2},
      {3, 4, 1.0 / 4}, {3, 8, 5.0 / 8},   {3, 12, 3.0 / 4},   {3, inf, 1.0},
      {4, 10.0 / 3, 3.0 / 10}, {4, 8, 1.0}, {4, 12, 7.0 / 6}, {4, inf, 3.0 / 2},
      {5, 3, 1.0 / 3}, {5, 8, 11.0 / 8}, {5, 12, 19.0 / 12}, {5, inf, 2.0},
      {6, 14.0 / 5, 5.0 / 14}, {6, 8, 7.0 / 4}, {6, 12, 2.0}, {6, inf, 5.0 / 2},
  };
  double worst = 0;
  for (const auto& c : table) {
    const double p = std::abs(c.p - critical_exponent(c.n)) < 1e-12 ? critical_exponent(c.n) : c.p;
    worst = std::max(worst, std::abs(delta_exponent(p, c.n) - c.value));
  }
  double branch = 0;
  for (int n = 2; n <= 6; ++n) {
    const double pc = critical_exponent(n);
    const double low = 0.5 * (n - 1) * (0.5 - 1.0 / pc);
    const double high = 0.5 * (n - 1) - n / pc;
    branch = std::max(branch, std::abs(low - high));
    branch = std::max(branch, std::abs(delta_exponent(pc, n) - low));
  }
  o.fail_if(!(worst <= 1e-12));
  o.fail_if(!(branch <= 1e-14));
  o.detail << "max |delta - exact| = " << fmt("%.2e", worst) << ", branch gap at p_c = " << fmt("%.2e", branch);
  return o;
}

const std::vector<int> kDegrees{8, 11, 16, 23, 32, 45, 64};

Outcome slope_check(FamilyKind kind, double p, double target) {
  Outcome o;
  const auto fit = exponent_fit(kind, 2, p, kDegrees);
  o.fail_if(!(std::abs(fit.fit.slope - target) <= 0.05));
  o.detail << family_name(kind) << " S^2 p=" << p << ": slope " << fmt("%.4f", fit.fit.slope) << " (target "
           << fmt("%.4f", target) << " +- 0.05)";
  return o;
}

Outcome ac2() { return slope_check(FamilyKind::zonal, 10, 0.3); }
Outcome ac3() { return slope_check(FamilyKind::highest_weight, 4, 0.125); }

Outcome ac4() {
  Outcome o;
  double worst_t = 0;
  int bad_mult = 0, missing = 0;
  for (int n : {2, 3}) {
    const auto M = ModelManifold::sphere(n);
    for (const auto& x : sphere_directions(n + 1, 4)) {
      for (const auto& v : cosphere_directions(M, x, n == 2 ? 4 : 6)) {
        const auto ev = conjugate_points(M, x, v, 3 * kPi + 0.5);
        for (int k = 1; k <= 3; ++k) {
          const ConjugateEvent* hit = nullptr;
          for (const auto& e : ev)
            if (std::abs(e.t - k * kPi) < 0.1) hit = &e;
          if (!hit) {
            ++missing;
            continue;
          }
          worst_t = std::max(worst_t, std::abs(hit->t - k * kPi));
          if (hit->multiplicity != n - 1) ++bad_mult;
        }
        if (ev.size() != 3) ++missing;
      }
    }
  }
  std::size_t torus_events = 0;
  const auto T2 = ModelManifold::flat_torus({1.0, 1.0});
  const Eigen::VectorXd x0 = Eigen::Vector2d(0.3, 0.7);
  for (const auto& v : cosphere_directions(T2, x0, 16)) torus_events += conjugate_points(T2, x0, v, 20.0).size();
  o.fail_if(!(worst_t <= 1e-6) || bad_mult > 0 || missing > 0 || torus_events > 0);
  o.detail << "sphere max |t - k pi| = " << fmt("%.2e", worst_t) << ", wrong multiplicity " << bad_mult
           << ", missing or extra " << missing << "; torus events over T=20: " << torus_events;
  return o;
}

std::vector<Eigen::VectorXd> base_points(const ModelManifold& M, int count, std::uint64_t offset) {
  std::vector<Eigen::VectorXd> U;
  for (const auto& p : sample_cosphere(M, count, offset)) U.push_back(p.x);
  return U;
}

Outcome ac5() {
  Outcome o;
  const auto S2 = ModelManifold::sphere(2);
  const auto P = ModelManifold::product(S2, ModelManifold::flat_torus({2 * kPi}));
  const auto U = base_points(P, 5, 11);  // 5 points, 20 ordered pairs
  const auto rep = check_noconj_hypothesis(P, U, 1.0, 1.0, 10.0);
  o.fail_if(!(rep.holds && rep.margin > 0) || rep.pairs != 20);

  // Antipodal pairs on S^2 make the check fail at t = pi.
  auto V = base_points(S2, 3, 11);
  const std::size_t k = V.size();
  for (std::size_t i = 0; i < k; ++i) V.push_back(-V[i]);
  const auto srep = check_noconj_hypothesis(S2, V, 1.0, 1.0, 10.0);
  const bool at_pi = std::abs(srep.worst_t - kPi) <= r_schedule(1.0, kPi);
  o.fail_if(srep.holds || !(srep.margin < 0) || !at_pi);
  o.detail << "product: " << rep.pairs << " pairs, margin " << fmt("%.4g", rep.margin) << "; S^2: margin "
           << fmt("%.4g", srep.margin) << " at t = " << fmt("%.4f", srep.worst_t);
  return o;
}

Outcome ac6() {
  Outcome o;
  const double bound = class_count_bound();
  for (int kind = 0; kind < 2; ++kind) {
    for (double R : {0.1, 0.05}) {
      const auto M = kind == 0 ? ModelManifold::flat_torus({1.0, 1.0}) : ModelManifold::sphere(2);
      const auto cover = build_good_cover(M, 0.2, R);
      const auto chk = check_cover(cover, 10000);
      o.fail_if(!chk.cover_ok || !chk.disjoint_ok || !chk.class_bound_ok || chk.samples < 10000);
      o.detail << (kind == 0 ? "torus" : "sphere") << " R=" << R << ": " << cover.size() << " tubes, "
               << chk.uncovered << " uncovered, " << chk.flow_violations << " overlaps, classes/transversal "
               << chk.max_classes_per_transversal << " <= " << fmt("%.0f", bound) << "; ";
    }
  }
  return o;
}

Outcome ac7() {
  Outcome o;
  const auto M = ModelManifold::flat_torus({1.0, 1.0});
  const auto cover = build_good_cover(M, 0.2, 0.1);
  const auto cuts = make_tube_cutoffs(cover);
  double worst = 0;
  int count = 0;
  for (int lam : {64, 128, 256}) {
    for (int s = 0; s < 50; ++s) {
      Stream rng(2024, static_cast<std::uint64_t>(lam) * 1000 + s);
      const auto u = lattice_cluster(lam, 2, 4 * lam, rng);
      const auto prof = mass_filter(u, cuts, 1.0);
      for (const auto& [k, idx] : prof.buckets) {
        if (k == kOverflowBucket) continue;
        const double r = idx.size() / (4.0 * cover.D * std::ldexp(1.0, 2 * k));
        worst = std::max(worst, r);
      }
      ++count;
    }
  }
  o.fail_if(!(worst <= 1.0));
  o.detail << count << " quasimodes, D = " << cover.D << ", max |A_k| / (4 D 2^2k) = " << fmt("%.4g", worst);
  return o;
}

// Beam quasimode on the circle |m|^2 = M: weights concentrated near one irrational
// direction, phases focusing at x.
ModeField slope_beam(const std::vector<Eigen::VectorXi>& pts, int N, double h, const Eigen::Vector2d& x,
                     double slope, double sigma) {
  ModeField u;
  u.dim = 2;
  u.N = N;
  u.h = h;
  u.coeffs.resize(static_cast<Eigen::Index>(pts.size()));
  const double th0 = std::atan(slope);
  for (std::size_t k = 0; k < pts.size(); ++k) {
    const Eigen::Vector2i m(pts[k][0], pts[k][1]);
    u.modes.push_back(m);
    const double d = std::remainder(std::atan2(double(m[1]), double(m[0])) - th0, 2 * kPi);
    const double ph = -2 * kPi * (m[0] * x[0] + m[1] * x[1]);
    u.coeffs[static_cast<Eigen::Index>(k)] = std::exp(-d * d / (2 * sigma * sigma)) * std::polar(1.0, ph);
  }
  u.coeffs /= u.coeffs.norm();
  return u;
}

Outcome ac8() {
  Outcome o;
  const double R = 0.05, t0 = 1.0;
  const long long M2 = 160225;  // 96 lattice points
  const auto M = ModelManifold::flat_torus({1.0, 1.0});
  const auto cover = build_good_cover(M, 0.2, R);
  const Eigen::Vector2d x(0.5, 0.5);
  const auto J = tubes_over_ball(cover, x, R);
  const auto cuts = make_tube_cutoffs(cover);
  TubeCutoffs sub;
  sub.shell = cuts.shell;
  sub.shell_wide = cuts.shell_wide;
  for (auto j : J) {
    sub.tilde.push_back(cuts.tilde[j]);
    sub.wide.push_back(cuts.wide[j]);
  }
  const double lam = std::sqrt(double(M2));
  const double h = h_from_lambda(lam);
  int N = 1;
  while (N < 4 * lam) N *= 2;
  const auto pts = lattice_circle(M2);
  const std::vector<double> slopes{(std::sqrt(5.0) - 1) / 2, std::sqrt(2.0) - 1, std::sqrt(3.0) - 1,
                                   std::numbers::e - 2, kPi - 3};
  std::vector<ModeField> beams;
  for (double s : slopes) beams.push_back(slope_beam(pts, N, h, x, s, 0.2));

  std::vector<double> Ts{4, 8, 16}, ratios;
  for (double T : Ts) {
    LoopOptions lo;
    lo.tubes = J;
    const auto rep = classify_tubes(cover, x, x, t0, T, R, lo);
    std::vector<char> good(J.size(), 0);
    const std::set<std::size_t> good_set(rep.good.begin(), rep.good.end());
    for (std::size_t i = 0; i < J.size(); ++i) good[i] = good_set.count(J[i]) ? 1 : 0;
    double worst = 0;
    for (const auto& u : beams) {
      const auto prof = mass_filter(u, sub, T);
      for (const auto& [k, idx] : prof.buckets) {
        if (k == kOverflowBucket) continue;
        std::size_t c = 0;
        for (auto i : idx) c += good[i];
        worst = std::max(worst, c * T / (t0 * std::ldexp(1.0, 2 * k)));
      }
    }
    ratios.push_back(worst);
  }
  const double tau = kendall_tau(Ts, ratios);
  double mx = 0;
  for (double r : ratios) mx = std::max(mx, r);
  o.fail_if(!(mx <= 8.0) || !(tau <= 0.0));
  o.detail << "|J| = " << J.size() << ", lambda = " << fmt("%.2f", lam) << ", ratio at T=4,8,16: "
           << fmt("%.3g", ratios[0]) << ", " << fmt("%.3g", ratios[1]) << ", " << fmt("%.3g", ratios[2])
           << "; Kendall tau " << fmt("%.3f", tau);
  return o;
}

double bump(double r2) { return r2 < 1 ? std::exp(1 - 1 / (1 - r2)) : 0.0; }

Symbol2M bump_symbol(Eigen::Vector2d xc, double xr, Eigen::Vector2d ec, double er, double lw, double phase) {
  Symbol2M s;
  s.r = 1;
  s.order = 0;
  s.axis = 0;
  s.center = 0.5;
  Symbol2M::Term t;
  t.spatial = [=](const Eigen::VectorXd& x) {
    double r2 = 0;
    for (int i = 0; i < x.size(); ++i) r2 += (x[i] - xc[i]) * (x[i] - xc[i]);
    return cplx(bump(r2 / (xr * xr)));
  };
  t.frequency = [=](const Eigen::VectorXd& e) {
    double r2 = 0;
    for (int i = 0; i < e.size(); ++i) r2 += (e[i] - ec[i]) * (e[i] - ec[i]);
    return cplx(bump(r2 / (er * er)));
  };
  t.profile = [=](double l) { return std::exp(-l * l / (2 * lw * lw)) * std::polar(1.0, phase * l / (1 + l * l)); };
  s.terms.push_back(t);
  return s;
}

Outcome ac9() {
  Outcome o;
  const auto a = bump_symbol({0.5, 0.5}, 0.35, {0.4, 0.2}, 0.8, 1.0, 0.7);
  const auto b = bump_symbol({0.45, 0.55}, 0.3, {0.6, -0.1}, 0.88, 1.5, -0.4);
  std::vector<double> hs;
  for (int k = 6; k <= 10; ++k) hs.push_back(std::ldexp(1.0, -k));
  const auto sw = composition_residual(a, b, hs, 0.6, 2);
  o.fail_if(!(sw.fit.slope >= 0.3));
  o.detail << "slope " << fmt("%.3f", sw.fit.slope) << " (>= 0.3, target 0.4); norms";
  for (const auto& r : sw.rows) o.detail << " " << fmt("%.3e", r.norm);
  return o;
}

Outcome ac10() {
  Outcome o;
  MicroOptions mo;
  mo.eps = 0.4;
  mo.delta = 0.5;
  // t sweep over one decade, exact grid points at N = 512
  std::vector<double> ts{15.0 / 512, 30.0 / 512, 60.0 / 512, 150.0 / 512};
  const auto rows = uncertainty_norm(ts, 32, mo);
  std::vector<double> tx, ny;
  for (const auto& r : rows) tx.push_back(std::abs(r.t)), ny.push_back(r.norm);
  const double st = fit_loglog(tx, ny).slope;

  std::vector<double> hx, hy;
  for (int lam : {8, 16, 32}) {
    const auto r = uncertainty_norm({0.125}, lam, mo)[0];
    hx.push_back(r.h);
    hy.push_back(r.norm);
  }
  const double sh = fit_loglog(hx, hy).slope;

  const double dense = dense_uncertainty_norm(0.125, 8, mo);
  const double lanczos = hy[0];
  MicroOptions mp = mo;
  mp.power.method = NormMethod::power;
  mp.power.rel_tol = 1e-10;
  mp.power.max_iter = 5000;
  const double power = uncertainty_norm({0.125}, 8, mp)[0].norm;
  const double err = std::max(std::abs(lanczos - dense), std::abs(power - dense)) / dense;

  o.fail_if(!(std::abs(st + 0.5) <= 0.15));
  o.fail_if(!(std::abs(sh - 0.2) <= 0.1));
  o.fail_if(!(err < 1e-6));
  o.detail << "slope vs t " << fmt("%.3f", st) << " (-0.5 +- 0.15), slope vs h " << fmt("%.3f", sh)
           << " (0.2 +- 0.1), dense oracle rel. error " << fmt("%.2e", err);
  return o;
}

Outcome ac11() {
  Outcome o;
  const double lam = 128, R = 0.2;
  MicroOptions mo;
  const auto M = ModelManifold::flat_torus({1.0, 1.0});
  auto pts = maximal_separated_set(M, R);
  if (pts.size() < 16) throw CheckFailure("fewer than 16 separated points");
  pts.resize(16);
  const int N = micro_grid_size(lam, mo.rho);
  Stream rng(7, 0);
  std::vector<ModeField> samples;
  for (int i = 0; i < 20; ++i) samples.push_back(random_shell(static_cast<int>(lam), 2, N, mo.eps, rng));
  const auto rep = almost_orthogonality(pts, R, lam, samples, mo, 10.0);
  o.fail_if(!rep.within);
  o.detail << "max sum " << fmt("%.4f", rep.max_sum) << ", bracket " << fmt("%.2f", rep.bracket) << ", ratio "
           << fmt("%.2e", rep.ratio) << " (<= 10)";
  return o;
}

Outcome ac12() {
  Outcome o;
  const auto g = cluster_linf_growth(10000);
  o.fail_if(!(g.fit.slope <= 0.2 && g.fit.slope < g.unimproved));
  o.detail << "exponent " << fmt("%.4f", g.fit.slope) << " over " << g.radii_squared.size()
           << " radii (<= 0.2, unimproved 0.5)";
  return o;
}

}  // namespace

const std::vector<CriterionInfo>& acceptance_criteria() {
  static const std::vector<CriterionInfo> list = {
      {1, "delta(p) formula", 1},
      {2, "zonal saturation p > p_c", 120},
      {3, "highest weight saturation p < p_c", 120},
      {4, "conjugate points", 30},
      {5, "no-conjugacy hypothesis on products", 300},
      {6, "cover invariants", 180},
      {7, "dyadic bucket bound", 300},
      {8, "non-self-looping mass decay", 300},
      {9, "composition residual", 300},
      {10, "uncertainty principle", 900},
      {11, "almost orthogonality", 600},
      {12, "torus sup-norm exponent", 60},
  };
  return list;
}

CriterionResult run_criterion(int id) {
  const auto& list = acceptance_criteria();
  if (id < 1 || id > static_cast<int>(list.size())) throw PreconditionError("unknown criterion " + std::to_string(id));
  const auto& info = list[static_cast<std::size_t>(id - 1)];
  CriterionResult r;
  r.id = id;
  r.name = info.name;
  r.budget = info.budget;
  const auto start = std::chrono::steady_clock::now();
  try {
    static const std::vector<Outcome (*)()> fns = {ac1, ac2, ac3, ac4, ac5, ac6, ac7, ac8, ac9, ac10, ac11, ac12};
    Outcome o = fns[static_cast<std::size_t>(id - 1)]();
    r.check = o.ok;
    r.detail = o.detail.str();
  } catch (const std::exception& e) {
    r.check = false;
    r.detail = std::string("error: ") + e.what();
  }
  r.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  r.pass = r.check && r.seconds <= r.budget;
  return r;
}

std::vector<CriterionResult> run_acceptance(const std::vector<int>& ids,
                                            const std::function<void(const CriterionResult&)>& done) {
  std::vector<int> todo = ids;
  if (todo.empty())
    for (const auto& c : acceptance_criteria()) todo.push_back(c.id);
  std::vector<CriterionResult> out;
  for (int id : todo) {
    out.push_back(run_criterion(id));
    if (done) done(out.back());
  }
  return out;
}

std::string format_result(const CriterionResult& r) {
  std::ostringstream s;
  s << (r.pass ? "PASS" : "FAIL") << " AC" << r.id << " " << r.name << ": " << r.detail << " ("
    << fmt("%.1f", r.seconds) << "s / " << fmt("%.0f", r.budget) << "s";
  if (r.check && !r.pass) s << ", over budget";
  s << ")";
  return s.str();
}

}  // namespace geobeam
