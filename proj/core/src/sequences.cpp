#include "geobeam/sequences.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "geobeam/errors.hpp"

namespace geobeam {

namespace {
constexpr int kPrimes[16] = {2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53};
}

double radical_inverse(std::uint64_t i, int base) {
  double inv = 1.0 / base;
  double f = inv;
  double r = 0.0;
  while (i > 0) {
    r += f * static_cast<double>(i % base);
    i /= base;
    f *= inv;
  }
  return r;
}

Eigen::VectorXd halton(std::uint64_t i, int dim) {
  if (dim < 1 || dim > 16) throw DomainError("halton: dim must be in [1,16]");
  Eigen::VectorXd v(dim);
  for (int d = 0; d < dim; ++d) v[d] = radical_inverse(i + 1, kPrimes[d]);
  return v;
}

// Acklam's rational approximation, refined by one Halley step.
double normal_quantile(double p) {
  if (p <= 0.0 || p >= 1.0) throw DomainError("normal_quantile: p must be in (0,1)");
  static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02, -2.759285104469687e+02,
                             1.383577518672690e+02, -3.066479806614716e+01, 2.506628277459239e+00};
  static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02, -1.556989798598866e+02,
                             6.680131188771972e+01, -1.328068155288572e+01};
  static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01, -2.400758277161838e+00,
                             -2.549732539343734e+00, 4.374664141464968e+00, 2.938163982698783e+00};
  static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01, 2.445134137142996e+00,
                             3.754408661907416e+00};
  double x;
  if (p < 0.02425) {
    const double q = std::sqrt(-2 * std::log(p));
    x = (((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else if (p > 1 - 0.02425) {
    const double q = std::sqrt(-2 * std::log(1 - p));
    x = -(((((c[0] * q + c[1]) * q + c[2]) * q + c[3]) * q + c[4]) * q + c[5]) /
        ((((d[0] * q + d[1]) * q + d[2]) * q + d[3]) * q + 1);
  } else {
    const double q = p - 0.5;
    const double r = q * q;
    x = (((((a[0] * r + a[1]) * r + a[2]) * r + a[3]) * r + a[4]) * r + a[5]) * q /
        (((((b[0] * r + b[1]) * r + b[2]) * r + b[3]) * r + b[4]) * r + 1);
  }
  const double e = 0.5 * std::erfc(-x / std::numbers::sqrt2) - p;
  const double u = e * std::sqrt(2 * std::numbers::pi) * std::exp(x * x / 2);
  return x - u / (1 + x * u / 2);
}

std::vector<Eigen::VectorXd> sphere_directions(int d, int count) {
  if (d < 1) throw DomainError("sphere_directions: d must be >= 1");
  std::vector<Eigen::VectorXd> out;
  if (d == 1) {
    out.push_back(Eigen::VectorXd::Constant(1, 1.0));
    out.push_back(Eigen::VectorXd::Constant(1, -1.0));
    return out;
  }
  if (count < 1) throw DomainError("sphere_directions: count must be >= 1");
  out.reserve(count);
  if (d == 2) {
    for (int i = 0; i < count; ++i) {
      const double a = 2.0 * std::numbers::pi * i / count;
      Eigen::VectorXd v(2);
      v << std::cos(a), std::sin(a);
      out.push_back(v);
    }
  } else if (d == 3) {
    const double golden = (1.0 + std::sqrt(5.0)) / 2.0;
    for (int i = 0; i < count; ++i) {
      const double z = 1.0 - (2.0 * i + 1.0) / count;
      const double rho = std::sqrt(std::max(0.0, 1.0 - z * z));
      const double a = 2.0 * std::numbers::pi * i / golden;
      Eigen::VectorXd v(3);
      v << rho * std::cos(a), rho * std::sin(a), z;
      out.push_back(v);
    }
  } else {
    for (int i = 0; i < count; ++i) {
      Eigen::VectorXd u = halton(static_cast<std::uint64_t>(i), d);
      Eigen::VectorXd v(d);
      for (int k = 0; k < d; ++k) v[k] = normal_quantile(std::clamp(u[k], 1e-12, 1 - 1e-12));
      out.push_back(v.normalized());
    }
  }
  return out;
}

double direction_covering_radius(int d, int count) {
  if (d <= 1) return 0.0;
  if (d == 2) return std::numbers::pi / count;
  if (d == 3) {
    // Fibonacci lattice: spacing ~ sqrt(4 pi / count); covering radius below 0.8 of it.
    return 0.8 * std::sqrt(4.0 * std::numbers::pi / count);
  }
  // Halton-based: conservative volume estimate with factor 2.
  const double area = 2.0 * std::pow(std::numbers::pi, d / 2.0) / std::tgamma(d / 2.0);
  return 2.0 * std::pow(area / count, 1.0 / (d - 1));
}

}  // namespace geobeam
