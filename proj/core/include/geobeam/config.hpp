#pragma once

#include <cstdint>
#include <limits>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "geobeam/manifold.hpp"

namespace geobeam {

// Bad or missing configuration; the message names the key or the violated inequality.
class ConfigError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

struct ManifoldBlock {
  std::string kind;                 // sphere | torus | product | revolution
  int dim = 2;
  std::vector<double> periods;      // torus; default all 1
  std::vector<double> profile{2.0, 0.5};  // revolution: trigonometric coefficients
  double profile_period = 6.283185307179586;
  int dim_a = 2;  // product: sphere(dim_a) x circle with manifold.periods (default 2 pi)
};

struct CoverBlock {
  double tau = 0.2;
  double R = 0.1;
  double R_exponent = 0.0;  // > 0: R = h^R_exponent instead of R
  double delta1 = 0.2, delta2 = 0.4;
  std::string json;         // cover file written by `cover build`, read by `cover check` and `beams`
};

struct DynamicsBlock {
  double a = 1.0;
  double t0 = 1.0;
  double T = 10.0;
  double b = 0.0;  // > 0: T = b log(1/h)
  int points = 5;  // sample points U
  double p = 8.0;
  double eps0 = 0.1;
  double badfrac = 0.1;
};

struct QuantizeBlock {
  std::vector<int> lambdas{64};
  int grid_factor = 4;
  std::string quasimode = "lattice_cluster";  // lattice_cluster | single_mode | random_shell
  int samples = 4;
  double shell = 0.1;  // random_shell half-width
};

struct MicroBlock {
  double rho = 0.7;
  double eps = 0.1;
  double delta = 0.25;
  double eps_q = 0.02;
  double eps0 = 0.3;
  std::vector<double> t_grid{0.03, 0.06, 0.125, 0.25};
  std::vector<int> lambdas{8, 16, 32};
  double t_fixed = 0.125;
  double R = 0.2;
  int points = 16;
  int samples = 20;
  double lambda_orth = 128;
};

struct SpectralBlock {
  std::string family = "zonal";
  int n = 2;
  std::vector<int> degrees{8, 11, 16, 23, 32, 45, 64};
  std::vector<double> p_list{2, 4, 6, 8, 12, std::numeric_limits<double>::infinity()};  // "inf" in files
  long long max_radius_squared = 10000;
};

struct ExperimentConfig {
  ManifoldBlock manifold;
  CoverBlock cover;
  DynamicsBlock dynamics;
  QuantizeBlock quantize;
  MicroBlock micro;
  SpectralBlock spectral;
  std::string output_dir = "out";
  std::uint64_t seed = 1;
  std::string source;  // file the config came from
};

// Flat "section.key" -> value map from INI text or JSON (objects of scalars or arrays).
std::map<std::string, std::string> parse_ini(const std::string& text);
std::map<std::string, std::string> parse_json(const std::string& text);

ExperimentConfig config_from_map(const std::map<std::string, std::string>& kv);
// Picks the format from the extension (.json) or the first non-blank character.
ExperimentConfig load_config(const std::string& path);

// Throws ConfigError naming the first violated inequality.
void validate(const ExperimentConfig& cfg);

ModelManifold make_manifold(const ManifoldBlock& m);

}  // namespace geobeam
