#pragma once

#include <Eigen/Dense>
#include <vector>

namespace geobeam {

// Radical inverse of i in the given prime base.
double radical_inverse(std::uint64_t i, int base);

// i-th point of the Halton sequence in [0,1)^dim (dim <= 16).
Eigen::VectorXd halton(std::uint64_t i, int dim);

// Deterministic, seedless direction sample on the unit sphere S^{d-1} in R^d.
// d = 1: {+1, -1}; d = 2: equispaced angles; d = 3: Fibonacci lattice;
// d >= 4: Halton points pushed through the normal quantile.
std::vector<Eigen::VectorXd> sphere_directions(int d, int count);

// Covering-radius estimate (geodesic) of sphere_directions(d, count).
double direction_covering_radius(int d, int count);

double normal_quantile(double p);

}  // namespace geobeam
