#pragma once

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <memory>
#include <string>
#include <vector>

namespace geobeam {

enum class ManifoldKind { sphere, flat_torus, product, surface_of_revolution };

// Coordinate systems. `native` is the coordinate system every algorithm works in:
// ambient R^{n+1} for spheres, R^n (mod periods) for tori, (s, phi) for surfaces of
// revolution, and the concatenation of factor native coordinates for products.
enum class Chart { native, polar, stereo_north, stereo_south };

std::string chart_name(Chart c);

// Warping function f(s) > 0 of a surface of revolution ds^2 + f(s)^2 dphi^2, periodic in s.
struct Profile {
  enum class Basis { trigonometric, cosine_polynomial };
  Basis basis = Basis::trigonometric;
  // trigonometric: [c0, a1, b1, a2, b2, ...] in f(s) = c0 + sum a_k cos(k w s) + b_k sin(k w s)
  // cosine_polynomial: [c0, c1, ...] in f(s) = sum c_k cos(w s)^k
  std::vector<double> coeffs;
  double period = 0.0;  // w = 2 pi / period

  template <class T>
  T eval(const T& s) const;
  template <class T>
  T eval_d1(const T& s) const;
  double value(double s) const { return eval(s); }
  double d1(double s) const;
  double d2(double s) const;
};

class ModelManifold {
 public:
  static ModelManifold sphere(int n);
  static ModelManifold flat_torus(std::vector<double> periods);
  static ModelManifold product(const ModelManifold& a, const ModelManifold& b);
  static ModelManifold surface_of_revolution(Profile profile);

  ManifoldKind kind() const { return kind_; }
  int dim() const { return dim_; }
  // Length of the native coordinate vectors.
  int native_dim() const { return native_dim_; }
  double injectivity_radius() const { return inj_; }

  const std::vector<double>& periods() const { return periods_; }
  const Profile& profile() const { return profile_; }
  const ModelManifold& factor(int i) const { return *factors_.at(i); }
  int factor_offset(int i) const { return i == 0 ? 0 : factors_.at(0)->native_dim(); }
  std::string describe() const;

 private:
  ManifoldKind kind_ = ManifoldKind::flat_torus;
  int dim_ = 0;
  int native_dim_ = 0;
  double inj_ = 0.0;
  std::vector<double> periods_;
  Profile profile_;
  std::vector<std::shared_ptr<const ModelManifold>> factors_;
};

struct CotangentPoint {
  Eigen::VectorXd x;
  Eigen::VectorXd xi;
  Chart chart = Chart::native;
};

// g(x) in the given chart. Spheres have no metric in native (ambient) coordinates.
Eigen::MatrixXd metric_at(const ModelManifold& M, const Eigen::VectorXd& x, Chart chart = Chart::native);

double conorm(const ModelManifold& M, const Eigen::VectorXd& x, const Eigen::VectorXd& xi,
              Chart chart = Chart::native);
inline double conorm(const ModelManifold& M, const CotangentPoint& p) { return conorm(M, p.x, p.xi, p.chart); }

// Chart conversion of a cotangent point (covectors transform by the transpose Jacobian).
CotangentPoint to_native(const ModelManifold& M, const CotangentPoint& p);
CotangentPoint from_native(const ModelManifold& M, const CotangentPoint& p, Chart chart);

// Embedding of chart coordinates into ambient space and its Jacobian (spheres only).
Eigen::VectorXd sphere_embed(int n, Chart chart, const Eigen::VectorXd& u);
Eigen::MatrixXd sphere_embed_jacobian(int n, Chart chart, const Eigen::VectorXd& u);
Eigen::VectorXd sphere_chart_coords(int n, Chart chart, const Eigen::VectorXd& y);

// Wraps torus coordinates into [0, period) and reprojects sphere points; native only.
CotangentPoint canonicalize(const ModelManifold& M, const CotangentPoint& p);

// Rescales the covector so that |xi|_g = 1 (native coordinates).
CotangentPoint normalize_covector(const ModelManifold& M, const CotangentPoint& p);

// Checks shape and domain; throws DomainError on failure.
void validate_native(const ModelManifold& M, const CotangentPoint& p);

double base_distance(const ModelManifold& M, const Eigen::VectorXd& x, const Eigen::VectorXd& y);

// Phase-space distance on T*M (native coordinates). See README for the realization
// used on each family.
double phase_distance(const ModelManifold& M, const CotangentPoint& p, const CotangentPoint& q);

// Parallel transport of a tangent vector v at y to x along the minimizing geodesic
// (sphere, native coordinates).
Eigen::VectorXd sphere_transport(const Eigen::VectorXd& y, const Eigen::VectorXd& x, const Eigen::VectorXd& v);

// Gaussian curvature of a surface of revolution at s: -f''/f.
double sor_curvature(const Profile& f, double s);

// Scalar helpers for periodic coordinates.
double wrap_centered(double d, double period);  // into [-period/2, period/2)
double wrap_positive(double x, double period);  // into [0, period)

template <class T>
T Profile::eval(const T& s) const {
  using std::cos;
  using std::sin;
  const double w = 2.0 * 3.14159265358979323846 / period;
  if (basis == Basis::trigonometric) {
    T out = T(coeffs.empty() ? 0.0 : coeffs[0]);
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
      const double a = coeffs[2 * k - 1];
      const double b = 2 * k < coeffs.size() ? coeffs[2 * k] : 0.0;
      out += a * cos(static_cast<double>(k) * w * s) + b * sin(static_cast<double>(k) * w * s);
    }
    return out;
  }
  const T c = cos(w * s);
  T out = T(0.0);
  for (std::size_t k = coeffs.size(); k-- > 0;) out = out * c + coeffs[k];
  return out;
}

template <class T>
T Profile::eval_d1(const T& s) const {
  using std::cos;
  using std::sin;
  const double w = 2.0 * 3.14159265358979323846 / period;
  T out = T(0.0);
  if (basis == Basis::trigonometric) {
    for (std::size_t k = 1; 2 * k - 1 < coeffs.size(); ++k) {
      const double a = coeffs[2 * k - 1];
      const double b = 2 * k < coeffs.size() ? coeffs[2 * k] : 0.0;
      const double kw = static_cast<double>(k) * w;
      out += kw * (-a * sin(kw * s) + b * cos(kw * s));
    }
    return out;
  }
  const T c = cos(w * s);
  const T dc = -w * sin(w * s);
  T acc = T(0.0);
  for (std::size_t k = coeffs.size(); k-- > 1;) acc = acc * c + static_cast<double>(k) * coeffs[k];
  return acc * dc;
}

}  // namespace geobeam
