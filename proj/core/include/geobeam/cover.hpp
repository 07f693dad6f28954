#pragma once

#include <Eigen/Dense>
#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "geobeam/manifold.hpp"

namespace geobeam {

// A hypersurface of S*M crossed transversally by the flow in one direction.
//   torus:  the plane x_i = level, covectors with sign * xi_i > 0
//   sphere: the circle <x, axis> = sin(level), covectors with sign * d/dt<x, axis> > 0
// Points are parametrized by (u, psi): u is the position along the hypersurface
// (coordinate x_j on the torus, longitude on the sphere, periodic with u_period) and
// psi in (-pi/2, pi/2) is the angle between the covector and the oriented normal.
// The cell is |psi| <= psi_max.
struct Transversal {
  int id = 0;
  ManifoldKind kind = ManifoldKind::flat_torus;
  int axis_index = 0;
  Eigen::Vector3d axis = Eigen::Vector3d::Zero();  // sphere
  Eigen::Vector3d e1 = Eigen::Vector3d::Zero();    // sphere: e1 x e2 = axis
  Eigen::Vector3d e2 = Eigen::Vector3d::Zero();
  double level = 0.0;
  int sign = 1;
  double psi_max = 0.0;
  double u_period = 1.0;
  double recross_time = 0.0;  // shortest return time to the same hypersurface

  CotangentPoint point(double u, double psi) const;
  Eigen::Vector2d params(const CotangentPoint& p) const;  // p on the hypersurface
  // Fixed-size embedding for fast distances between points of this transversal.
  std::array<double, 9> embed(double u, double psi) const;
  double embed_distance(const std::array<double, 9>& a, const std::array<double, 9>& b) const;
  // Param-space half-widths containing every point within phase distance d.
  Eigen::Vector2d search_window(double d) const;

  std::string describe() const;
};

// Crossing of a cosphere point's orbit with a transversal: phi_{-t}(q) = sigma.
struct Crossing {
  double t = 0.0;
  Eigen::Vector2d params;
};

// All crossings with |t| <= tmax (q has unit covector).
std::vector<Crossing> crossings(const ModelManifold& M, const Transversal& H, const CotangentPoint& q,
                                double tmax);

// The canonical transversal family for tau: torus planes (2 coordinate families,
// enough levels that every orbit crosses within time 0.9 tau, both signs) or sphere
// circles (6 icosahedral axes, latitudes 0, +-0.25, +-0.5, both signs, |psi| <= acos 0.83).
std::vector<Transversal> canonical_transversals(const ModelManifold& M, double tau);

// Largest admissible tau and R for the canonical family.
struct CoverLimits {
  double tau_injH = 0.0;      // half the shortest recrossing time
  double tau_M = 0.0;         // tau_injH / 2
  double tau_min = 0.0;       // every orbit crosses a cell within this time
  double R0 = 0.0;            // min((tau_injH - tau) / 3, (pi/2 - psi_max) / 3)
};
CoverLimits cover_limits(const ModelManifold& M, double tau);

// Base curve of a unit-speed geodesic on flat_torus(2) or sphere(2), evaluated without
// allocation. Used by the tube queries and the loop classifier.
class BaseOrbit {
 public:
  BaseOrbit(const ModelManifold& M, const CotangentPoint& p);
  // Distance from x(t) to y.
  double distance_at(double t, const Eigen::Vector3d& y) const;
  // min over |t| <= L of the distance from x(t) to y (L < half the period).
  double segment_distance(double L, const Eigen::Vector3d& y) const;

 private:
  bool sphere_ = false;
  Eigen::Vector3d p_, w_;
  double L0_ = 1, L1_ = 1;
};

Eigen::Vector3d to_vec3(const Eigen::VectorXd& x);

// ---- separated sets and greedy coloring ---------------------------------

// Greedy maximal r-separated subset of a reference sample, scanned in index order.
// `reference_spacing` is the fill distance of the sample; it must be <= r/4.
std::vector<std::size_t> maximal_separated_set(std::size_t count,
                                               const std::function<double(std::size_t, std::size_t)>& dist,
                                               double r, double reference_spacing);

// Maximal r-separated set on the base manifold (circle, flat torus, sphere(2)) built
// from a reference sample of fill distance r/4.
std::vector<Eigen::VectorXd> maximal_separated_set(const ModelManifold& M, double r);

// First-fit coloring in ascending index order: a point takes the lowest class not
// used by an earlier point within conflict_radius.
std::vector<std::vector<std::size_t>> greedy_partition(
    std::size_t count, const std::function<double(std::size_t, std::size_t)>& dist, double conflict_radius);

// ---- covers ---------------------------------------------------------------

struct Tube {
  CotangentPoint center;
  double tau = 0.0;
  double radius = 0.0;
  int transversal_id = 0;
  Eigen::Vector2d params = Eigen::Vector2d::Zero();
  int class_id = 0;  // global class index in GoodCover::classes
};

struct CoverIndex;  // center lookup, built with the cover

struct GoodCover {
  ModelManifold manifold = ModelManifold::flat_torus({1.0, 1.0});
  double tau = 0.0;
  double R = 0.0;
  int D = 0;
  std::vector<Transversal> transversals;
  std::vector<Tube> tubes;
  std::vector<std::vector<std::size_t>> classes;  // each class lies on one transversal
  std::vector<int> classes_per_transversal;
  std::shared_ptr<const CoverIndex> index;

  std::size_t size() const { return tubes.size(); }
};

// Volume-ratio bound vol(B(14r)) / vol(B(r/2)) on a 2-dimensional transversal.
double class_count_bound();

// Separated set (spacing R/2) on each transversal, flow-out tubes, then first-fit
// classes with conflict distance 6R per transversal. Throws PreconditionError when tau
// or R is out of range.
GoodCover build_good_cover(const ModelManifold& M, double tau, double R);

// Returns the tubes containing q: some |t| <= tau + R * inflation with phi_{-t}(q)
// within R * inflation of the center on its transversal.
std::vector<std::size_t> tubes_containing(const GoodCover& cover, const CotangentPoint& q, double inflation = 1.0);

struct CoverCheck {
  bool cover_ok = false;
  std::size_t samples = 0;
  std::size_t uncovered = 0;
  CotangentPoint counterexample;
  bool disjoint_ok = false;
  std::size_t pairs_checked = 0;        // close center pairs inside classes
  double min_class_separation = 0.0;    // over same-class center pairs, in units of R
  std::size_t flow_samples = 0;         // sampled inflated-tube points
  std::size_t flow_violations = 0;
  bool class_bound_ok = false;
  int max_classes_per_transversal = 0;
};

// Cover property on `samples` low-discrepancy cosphere points, center separation within
// every class, and a sampled check that no point of an inflated tube Lambda(3R) lies in
// another inflated tube of its class.
CoverCheck check_cover(const GoodCover& cover, std::size_t samples = 10000, std::size_t flow_samples = 4000);

// Samples of the tube T_j (or its inflation): transversal ball points on a grid of step
// R / per_radius flowed for |t| <= tau + R * inflation at the same step.
std::vector<CotangentPoint> tube_samples(const GoodCover& cover, std::size_t j, double inflation = 1.0,
                                         int per_radius = 8);

// J_x: tubes whose base projection comes within r + R / per_radius of x. Ball points
// are sampled at step R / per_radius; time along each orbit is exact.
std::vector<std::size_t> tubes_over_ball(const GoodCover& cover, const Eigen::VectorXd& x, double r,
                                         int per_radius = 8);

// Rebuilds the center lookup after tubes were edited by hand.
void reindex(GoodCover& cover);

std::string cover_to_json(const GoodCover& cover);
GoodCover cover_from_json(const std::string& text);

}  // namespace geobeam
