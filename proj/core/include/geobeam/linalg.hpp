#pragma once

#include <Eigen/Dense>
#include <complex>
#include <functional>
#include <vector>

namespace geobeam {

using CVec = Eigen::VectorXcd;

struct PowerResult {
  double norm = 0.0;       // estimate of the largest singular value
  int iterations = 0;
  double rel_change = 0.0;  // last relative change of the estimate
  bool converged = false;
};

// Largest singular value of A given A and A^*. The iterate is normalized in the
// plain Euclidean inner product of the vector representation.
PowerResult power_norm(const std::function<CVec(const CVec&)>& apply,
                       const std::function<CVec(const CVec&)>& apply_adjoint,
                       const CVec& start, double rel_tol, int max_iter);

// Same quantity by Lanczos on A^*A with full reorthogonalization, restarted from the
// top Ritz vector every `basis` steps. Stops when the Ritz residual bound relative to
// the Ritz value is below rel_tol. iterations counts applications of A^*A.
PowerResult lanczos_norm(const std::function<CVec(const CVec&)>& apply,
                         const std::function<CVec(const CVec&)>& apply_adjoint,
                         const CVec& start, double rel_tol, int max_iter, int basis = 24);

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
  double slope_stderr = 0.0;
  double half_width = 0.0;  // ~95% half-width, 2 standard errors
  int count = 0;
};

// Least-squares line y = a + b x.
LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y);

// Slope of log(y) against log(x).
LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

// Kendall rank correlation (tau-b). Returns 0 when either input is constant.
double kendall_tau(const std::vector<double>& x, const std::vector<double>& y);

}  // namespace geobeam
