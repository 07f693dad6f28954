#pragma once

namespace geobeam {

// Every numerical tolerance used by the library, with its default.
struct Tolerances {
  double unit_covector = 1e-10;  // | |xi|_g - 1 | for points of S*M
  double energy = 1e-8;          // conorm drift allowed along a trajectory
  double symplectic = 1e-6;      // |det(dphi_t) - 1|
  double flow_local = 1e-11;     // per-unit-time local error of the RK4 driver
  double conj_rel = 1e-5;        // singular value is zero below conj_rel * block scale
  double conj_flag = 10.0;       // ambiguity band is [conj_rel, conj_flag * conj_rel]
  double lambda_floor = 0.05;    // epsilon_Lambda replacing a vanishing expansion rate
  double power_rel = 1e-6;       // power iteration relative tolerance
  int power_max_iter = 500;
};

const Tolerances& default_tolerances();

}  // namespace geobeam
