#pragma once

#include <Eigen/Dense>
#include <complex>
#include <limits>
#include <string>
#include <vector>

#include "geobeam/linalg.hpp"
#include "geobeam/manifold.hpp"

namespace geobeam {

constexpr double kInfinity = std::numeric_limits<double>::infinity();

// p_c = 2(n+1)/(n-1)
double critical_exponent(int n);

// Growth exponent delta(p) of ||phi_lambda||_p against lambda; p = infinity allowed.
double delta_exponent(double p, int n);

enum class FamilyKind { zonal, highest_weight, torus_mode, torus_lattice_cluster };

std::string family_name(FamilyKind k);
FamilyKind parse_family(const std::string& s);

// An explicit L^2-normalized Laplace eigenfunction.
//  zonal / highest_weight on S^n: index = degree l, eigenvalue l(l+n-1).
//  torus_mode on the unit torus T^n: mode vector k, eigenvalue (2 pi |k|)^2.
//  torus_lattice_cluster on T^2: index = |k|^2, all k on that circle with coefficient 1.
class EigenFamily {
 public:
  static EigenFamily zonal(int n, int l);
  static EigenFamily highest_weight(int n, int l);
  static EigenFamily torus_mode(const Eigen::VectorXi& k);
  static EigenFamily lattice_cluster(long long radius_squared);

  FamilyKind kind() const { return kind_; }
  int dim() const { return n_; }
  long long index() const { return index_; }
  double frequency() const { return lambda_; }
  const ModelManifold& manifold() const { return manifold_; }
  const std::vector<Eigen::VectorXi>& modes() const { return modes_; }

  // Value at a native point (ambient for spheres, [0,1)^n for tori).
  std::complex<double> operator()(const Eigen::VectorXd& x) const;
  // Sphere families: value as a function of polar angles (theta from the last axis, phi).
  std::complex<double> at_polar(double theta, double phi) const;

 private:
  FamilyKind kind_ = FamilyKind::zonal;
  int n_ = 2;
  long long index_ = 0;
  double lambda_ = 0.0;
  double norm_ = 1.0;
  ModelManifold manifold_ = ModelManifold::sphere(2);
  std::vector<Eigen::VectorXi> modes_;
  std::vector<double> zonal_a_, zonal_b_;  // normalized Gegenbauer recurrence
};

// Normalized Gegenbauer value: C_l^{alpha}(t) / sqrt(h_l) with h_l the weighted L^2 norm.
double normalized_gegenbauer(int l, double alpha, double t);

// Integer points on the circle |k|^2 = N; r2(N) = their count.
std::vector<Eigen::VectorXi> lattice_circle(long long N);
long long r2(long long N);

struct LpResult {
  double norm = 0.0;
  int order = 0;
  double doubling_change = 0.0;  // relative change under order doubling
};

// L^p norm with respect to the Riemannian measure (volume_normalized divides the
// measure by vol(M)). order = 0 picks the automatic resolution.
LpResult lp_norm(const EigenFamily& f, double p, int order = 0, bool volume_normalized = false);

struct ExponentFit {
  LineFit fit;
  std::vector<double> lambdas;
  std::vector<double> norms;
  double target = 0.0;
};

ExponentFit exponent_fit(FamilyKind kind, int n, double p, const std::vector<int>& degrees);

struct ClusterGrowth {
  LineFit fit;                       // log(sqrt(r2(N))) against log(sqrt(N)), all admissible N
  LineFit record_fit;                // same over the running-record values of r2
  std::vector<long long> radii_squared;
  std::vector<double> ratios;        // ||.||_inf / ||.||_2 = sqrt(r2)
  double unimproved = 0.5;
};

ClusterGrowth cluster_linf_growth(long long max_radius_squared, long long min_radius_squared = 1);

// Residual |(-Delta - lambda^2) phi| / lambda^2 at the given native points, relative to
// max |phi| over those points; finite differences in polar/periodic coordinates.
double laplacian_residual(const EigenFamily& f, const std::vector<Eigen::VectorXd>& points);

}  // namespace geobeam
