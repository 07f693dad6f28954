#pragma once

#include <Eigen/Dense>
#include <limits>
#include <vector>

#include "geobeam/cover.hpp"

namespace geobeam {

struct LoopReport {
  Eigen::VectorXd x1, x2;
  double t0 = 0.0, T = 0.0, R = 0.0;
  double time_step = 0.0;
  std::vector<std::size_t> tubes;       // J_{x1}
  std::vector<std::size_t> bad, good;   // partition of `tubes`
  std::vector<double> first_hit;        // parallel to `tubes`; NaN for good tubes
};

struct LoopOptions {
  double time_step = 0.0;   // 0 selects R/4; larger than R/4 is rejected
  int ball_per_radius = 4;  // transversal ball sampling
  std::vector<std::size_t> tubes;  // J_{x1}; empty selects tubes_over_ball(x1, R)
};

// A tube T_j is bad when phi_t(T_j), t in [t0, T], meets the cosphere bundle over
// B(x2, 2R) at a sampled time. Samples are the orbits of transversal ball points over
// [t0 - tau - R, T + tau + R] at the time step; a sign change of d - 2R is refined by
// bisection, and first_hit is the earliest refined orbit time.
LoopReport classify_tubes(const GoodCover& cover, const Eigen::VectorXd& x1, const Eigen::VectorXd& x2, double t0,
                          double T, double R, const LoopOptions& opt = {});

struct BadCount {
  std::size_t sup = 0;        // max over sampled pairs: a lower bound for the true sup
  std::size_t arg_i1 = 0, arg_i2 = 0;
  std::vector<std::size_t> counts;  // row-major over ordered pairs (i1, i2)
  std::vector<std::size_t> j_sizes;  // |J_x| per sample point
};

// sup over ordered pairs of U of |B_{x1,x2}|.
BadCount bad_count_sup(const GoodCover& cover, const std::vector<Eigen::VectorXd>& U, double t0, double T,
                       const LoopOptions& opt = {});

// sqrt(t0 / T) + badfrac^((1 - p_c/p) / (6 + eps0)); p may be kInfinity.
double predicted_improvement(double p, int n, double t0, double T, double badfrac, double eps0);

}  // namespace geobeam
