#include "geobeam/linalg.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "geobeam/errors.hpp"

namespace geobeam {

// Power iteration on A^*A with the Rayleigh quotient as the estimate of ||A||^2.
// Stopping uses the geometric tail of successive changes, so a slowly
// contracting iteration is not stopped on a small-but-misleading step.
PowerResult power_norm(const std::function<CVec(const CVec&)>& apply,
                       const std::function<CVec(const CVec&)>& apply_adjoint,
                       const CVec& start, double rel_tol, int max_iter) {
  PowerResult res;
  CVec v = start;
  double nv = v.norm();
  if (nv == 0.0) throw DomainError("power_norm: zero start vector");
  v /= nv;
  double prev = -1.0;
  double prev_change = -1.0;
  for (int it = 1; it <= max_iter; ++it) {
    CVec w = apply_adjoint(apply(v));
    const double rq = std::max(0.0, std::real(v.dot(w)));
    const double est = std::sqrt(rq);
    res.iterations = it;
    res.norm = est;
    const double nw = w.norm();
    if (nw == 0.0) {
      res.norm = 0.0;
      res.rel_change = 0.0;
      res.converged = true;
      return res;
    }
    if (prev >= 0.0) {
      const double change = std::abs(est - prev) / std::max(est, 1e-300);
      double tail = change;
      if (prev_change > 0.0 && change < prev_change) {
        const double ratio = change / prev_change;
        tail = change * ratio / (1.0 - ratio) + change;
      }
      res.rel_change = change;
      if (tail < rel_tol && it >= 3) {
        res.converged = true;
        return res;
      }
      prev_change = change;
    }
    prev = est;
    v = w / nw;
  }
  return res;
}

PowerResult lanczos_norm(const std::function<CVec(const CVec&)>& apply,
                         const std::function<CVec(const CVec&)>& apply_adjoint,
                         const CVec& start, double rel_tol, int max_iter, int basis) {
  if (basis < 2) throw DomainError("lanczos_norm: basis must be >= 2");
  PowerResult res;
  CVec v = start;
  const double nv = v.norm();
  if (nv == 0.0) throw DomainError("lanczos_norm: zero start vector");
  v /= nv;
  double prev = -1.0;
  int used = 0;
  while (used < max_iter) {
    std::vector<CVec> Q{v};
    std::vector<double> alpha, beta;
    Eigen::VectorXd top;
    double theta = 0.0;
    for (int j = 0; j < basis && used < max_iter; ++j) {
      CVec w = apply_adjoint(apply(Q[j]));
      ++used;
      alpha.push_back(std::real(Q[j].dot(w)));
      for (int pass = 0; pass < 2; ++pass)
        for (const auto& q : Q) w -= q * q.dot(w);
      const double b = w.norm();
      const int m = static_cast<int>(alpha.size());
      Eigen::MatrixXd T = Eigen::MatrixXd::Zero(m, m);
      for (int i = 0; i < m; ++i) {
        T(i, i) = alpha[i];
        if (i + 1 < m) T(i, i + 1) = T(i + 1, i) = beta[i];
      }
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(T);
      theta = std::max(0.0, es.eigenvalues()(m - 1));
      top = es.eigenvectors().col(m - 1);
      const double bound = b * std::abs(top(m - 1));
      res.iterations = used;
      res.norm = std::sqrt(theta);
      res.rel_change = prev > 0 ? std::abs(res.norm - prev) / std::max(res.norm, 1e-300) : 1.0;
      prev = res.norm;
      // Small b means the Krylov space is invariant and theta is exact.
      if (bound <= rel_tol * theta || b <= 1e-14 * std::max(theta, 1e-300)) {
        res.converged = true;
        return res;
      }
      beta.push_back(b);
      Q.push_back(w / b);
    }
    // Restart from the top Ritz vector.
    CVec r = CVec::Zero(v.size());
    for (int i = 0; i < top.size(); ++i) r += top(i) * Q[i];
    v = r / r.norm();
  }
  return res;
}

LineFit fit_line(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size() || x.size() < 2) throw DomainError("fit_line: need >= 2 paired samples");
  const int n = static_cast<int>(x.size());
  const double mx = std::accumulate(x.begin(), x.end(), 0.0) / n;
  const double my = std::accumulate(y.begin(), y.end(), 0.0) / n;
  double sxx = 0, sxy = 0;
  for (int i = 0; i < n; ++i) {
    sxx += (x[i] - mx) * (x[i] - mx);
    sxy += (x[i] - mx) * (y[i] - my);
  }
  if (sxx == 0.0) throw DomainError("fit_line: x values are all equal");
  LineFit f;
  f.count = n;
  f.slope = sxy / sxx;
  f.intercept = my - f.slope * mx;
  if (n > 2) {
    double ss = 0;
    for (int i = 0; i < n; ++i) {
      const double r = y[i] - f.intercept - f.slope * x[i];
      ss += r * r;
    }
    f.slope_stderr = std::sqrt(ss / (n - 2) / sxx);
  }
  f.half_width = 2.0 * f.slope_stderr;
  return f;
}

LineFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
  std::vector<double> lx(x.size()), ly(y.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(x[i] > 0) || !(y[i] > 0)) throw DomainError("fit_loglog: values must be positive");
    lx[i] = std::log(x[i]);
    ly[i] = std::log(y[i]);
  }
  return fit_line(lx, ly);
}

double kendall_tau(const std::vector<double>& x, const std::vector<double>& y) {
  if (x.size() != y.size()) throw DomainError("kendall_tau: size mismatch");
  const std::size_t n = x.size();
  double conc = 0, disc = 0, tx = 0, ty = 0;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      const double dx = x[i] - x[j];
      const double dy = y[i] - y[j];
      if (dx == 0 && dy == 0) continue;
      if (dx == 0) {
        tx += 1;
      } else if (dy == 0) {
        ty += 1;
      } else if ((dx > 0) == (dy > 0)) {
        conc += 1;
      } else {
        disc += 1;
      }
    }
  }
  const double denom = std::sqrt((conc + disc + tx) * (conc + disc + ty));
  if (denom == 0.0) return 0.0;
  return (conc - disc) / denom;
}

}  // namespace geobeam
