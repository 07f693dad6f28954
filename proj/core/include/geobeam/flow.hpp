#pragma once

#include <Eigen/Dense>
#include <limits>
#include <string>
#include <vector>

#include "geobeam/manifold.hpp"
#include "geobeam/tolerances.hpp"

namespace geobeam {

struct FlowSample {
  double t = 0.0;
  CotangentPoint point;
};

struct IntegratorMeta {
  std::string method;           // "closed_form" or "rk4_step_doubling"
  int steps = 0;
  double min_step = 0.0;
  double max_step = 0.0;
  double error_bound = 0.0;     // accumulated local error estimate
};

struct Trajectory {
  std::vector<FlowSample> samples;
  std::vector<std::pair<double, Eigen::MatrixXd>> jacobi;  // (t, dphi_t) in orthonormal frames
  IntegratorMeta meta;

  double max_energy_drift(const ModelManifold& M) const;
};

// Geodesic flow of p(x, xi) = |xi|_g - 1 at time t, native coordinates. Unit speed for
// every |xi|; the covector keeps its length.
CotangentPoint flow_point(const ModelManifold& M, const CotangentPoint& p, double t,
                          double tol = default_tolerances().flow_local);

// Samples are spaced so that linear interpolation of the base point is accurate to
// `tolerance`. Throws NumericalError if the integrator cannot meet the tolerance.
Trajectory geodesic_flow(const ModelManifold& M, const CotangentPoint& rho0, double t_final,
                         double tolerance = 1e-8, int jacobi_every = 0);

// dphi_t as a 2n x 2n matrix in orthonormal horizontal/vertical frames at both ends.
// It is computed in canonical chart coordinates, so it is symplectic and det = 1.
Eigen::MatrixXd flow_jacobian(const ModelManifold& M, const CotangentPoint& p, double t);

// Base displacement at time t caused by unit initial covector perturbations
// orthogonal to xi: a (native_dim x (n-1)) matrix whose columns are tangent vectors at
// the base point of phi_t(p), written in an orthonormal frame (ambient coordinates for
// spheres and tori, (d_s, f^{-1} d_phi) for surfaces of revolution). Columns correspond
// to an orthonormal basis of xi^perp.
Eigen::MatrixXd jacobi_base(const ModelManifold& M, const CotangentPoint& p, double t);

// Orthonormal basis (columns) of the tangent vectors at x orthogonal to xi (native).
Eigen::MatrixXd transverse_basis(const ModelManifold& M, const CotangentPoint& p);

// ---- conjugate points ----------------------------------------------------

struct ConjugateEvent {
  double t = 0.0;
  int multiplicity = 0;
  Eigen::VectorXd witness;  // singular values of the Jacobi block at t
  double scale = 0.0;       // block scale used for the threshold
  bool flagged = false;     // a singular value sits within the ambiguity band
};

struct ConjugateOptions {
  double grid_step = 0.01;
  double candidate_level = 0.1;
  double rel_threshold = default_tolerances().conj_rel;
  double flag_factor = default_tolerances().conj_flag;
};

std::vector<ConjugateEvent> conjugate_points(const ModelManifold& M, const Eigen::VectorXd& x,
                                             const Eigen::VectorXd& direction, double T,
                                             const ConjugateOptions& opt = {});

// Number of conjugate points, with multiplicity, with time in the window (lo, hi).
// Events on the window boundary are counted and reported through `boundary_hit`.
int count_in_window(const std::vector<ConjugateEvent>& events, double lo, double hi, bool* boundary_hit = nullptr);

struct DirectionSampling {
  int count = 0;            // 0: choose from the requested r
  double covering_radius = 0.0;
};

// Directions of S*_x M (native unit covectors at x) and the covering radius of the
// sample on the unit sphere of T*_x M.
std::vector<Eigen::VectorXd> cosphere_directions(const ModelManifold& M, const Eigen::VectorXd& x, int count,
                                                 double* covering_radius = nullptr);

struct ConjugateSet {
  std::vector<Eigen::VectorXd> endpoints;   // gamma(t) for qualifying directions
  std::vector<Eigen::VectorXd> directions;
  int directions_sampled = 0;
  double covering_radius = 0.0;
  bool boundary_events = false;
};

// C_x^{m,r,t}: endpoints gamma(t) of sampled geodesics from x with >= m conjugate points
// in (t - r, t + r). Throws PreconditionError when the direction sample is coarser than r.
ConjugateSet maximally_conjugate_set(const ModelManifold& M, const Eigen::VectorXd& x, int m, double r, double t,
                                     int direction_count, const ConjugateOptions& opt = {});

struct HypothesisRow {
  int i1 = 0, i2 = 0;
  double t = 0.0;
  double r_t = 0.0;
  double distance = std::numeric_limits<double>::infinity();
  double margin = std::numeric_limits<double>::infinity();
  int multiplicity_max = 0;
  bool inconclusive = false;
  bool boundary = false;
};

struct HypothesisReport {
  bool holds = true;
  double margin = std::numeric_limits<double>::infinity();
  double worst_t = 0.0;
  int worst_i1 = -1, worst_i2 = -1;
  int inconclusive = 0;
  int pairs = 0;
  int directions = 0;
  double direction_covering_radius = 0.0;
  std::vector<HypothesisRow> rows;
};

struct HypothesisOptions {
  int direction_count = 0;      // 0: 64 on S^1, 400 on S^2, 600 above
  double report_step = 0.05;    // coarse time grid in addition to event-driven times
  bool include_diagonal = false;
  ConjugateOptions conj;
};

// r_t = a^{-1} e^{-a t}
double r_schedule(double a, double t);

HypothesisReport check_noconj_hypothesis(const ModelManifold& M, const std::vector<Eigen::VectorXd>& U, double a,
                                         double t0, double T, const HypothesisOptions& opt = {});

struct ExpansionEstimate {
  double raw = 0.0;      // max (1/T) log ||dphi_T||
  double lambda = 0.0;   // raw, or the floor when raw is below it
  double half_time = 0.0;  // same estimate at T/2
  double drift = 0.0;    // |raw - half_time|
  bool floored = false;
  double T = 0.0;
  int samples = 0;
};

ExpansionEstimate max_expansion_rate(const ModelManifold& M, int sample_size, double T = 200.0,
                                     double floor = default_tolerances().lambda_floor);

double ehrenfest_time(double h, double Lambda);

// Deterministic sample of S*M (native coordinates), Halton based.
std::vector<CotangentPoint> sample_cosphere(const ModelManifold& M, int count, std::uint64_t offset = 0);

}  // namespace geobeam
