#pragma once

#include <Eigen/Dense>
#include <climits>
#include <functional>
#include <limits>
#include <map>
#include <memory>
#include <vector>

#include "geobeam/cover.hpp"
#include "geobeam/grid.hpp"
#include "geobeam/random.hpp"

namespace geobeam {

// ---- symbols and quantization ------------------------------------------------

// a(x, eta) with eta = h xi the semiclassical frequency. Either a sum of separable terms
// f_k(x) g_k(eta) (an empty factor means 1) or a general evaluator, which is applied by
// direct summation and is only allowed on small grids.
struct Symbol {
  using Spatial = std::function<cplx(const Eigen::VectorXd&)>;
  using Frequency = std::function<cplx(const Eigen::VectorXd&)>;
  struct Term {
    Spatial spatial;
    Frequency frequency;
  };
  std::vector<Term> terms;
  std::function<cplx(const Eigen::VectorXd&, const Eigen::VectorXd&)> general;

  static Symbol identity();
  static Symbol multiplier(Frequency g);
  static Symbol multiplication(Spatial f);
  static Symbol separable(Spatial f, Frequency g);
  static Symbol dense(std::function<cplx(const Eigen::VectorXd&, const Eigen::VectorXd&)> a);
  cplx operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& eta) const;
};

// Semiclassical frequency of FFT index idx: eta = m / lambda.
Eigen::VectorXd eta_of_index(std::size_t idx, int dim, int N, double lambda);

// (Op u)(x) = sum_m a(x, h xi_m) c_m e^{2 pi i m x}. Throws DomainError when the symbol
// is not finite at a node.
GridField op_apply(const Symbol& a, const GridField& u);

// Multiplier of P = -h^2 Delta - 1 at integer frequency m: |m|^2 / lambda^2 - 1.
double P_multiplier(const Eigen::Vector2i& m, int dim, double lambda);
GridField P_apply(const GridField& u);
ModeField P_apply(const ModeField& u);

// ---- quasimodes ------------------------------------------------------------------

// Modes with lambda <= |m| <= lambda + 1 and complex normal coefficients, normalized.
ModeField lattice_cluster(int lambda, int dim, int N, Stream& rng);
ModeField single_mode(const Eigen::Vector2i& m, int dim, int N, double lambda);
// Modes with | |m| / lambda - 1 | < delta, complex normal coefficients, normalized.
ModeField random_shell(int lambda, int dim, int N, double delta, Stream& rng);
// Gaussian packet at x0 with frequency near lambda * omega and spatial width sigma,
// restricted to lambda <= |m| <= lambda + 1. Normalized.
ModeField gaussian_packet(int lambda, int N, const Eigen::Vector2d& x0, const Eigen::Vector2d& omega,
                          double sigma);

// ---- tube cutoffs ----------------------------------------------------------------

// Smooth step built from exp(-1/z): 0 for s <= 0, 1 for s >= 1.
double smooth_step(double s);

// Flat-top profile: 1 for |s| <= core, 0 for |s| >= support. support = inf gives 1.
struct FlatTop {
  double core = 0.0;
  double support = 0.0;
  double operator()(double s) const;
};

// Separable cutoff on the flat 2-torus for one tube:
//   S(x) = along((x - x0).omega) * across((x - x0).omega_perp)   (nearest image of x0)
//   A(eta) = angle(angle between eta and omega)
struct TubeCutoff {
  Eigen::Vector2d x0 = Eigen::Vector2d::Zero();
  Eigen::Vector2d omega = Eigen::Vector2d::UnitX();
  FlatTop along, across, angle;
  double spatial(const Eigen::Vector2d& x) const;
  double direction(const Eigen::Vector2d& eta) const;
};

// chi~_j (tilde) is 1 on the tube core and supported in its R/2 widening; chi_j (wide) is
// 1 on supp chi~_j and supported in the 2R widening, inside the inflated tube. The
// frequency shell psi is 1 on | |eta| - 1 | <= 1/4 and vanishes beyond 1/2; the wide
// shell is 1 on supp psi.
struct TubeCutoffs {
  std::vector<TubeCutoff> tilde, wide;
  FlatTop shell{0.25, 0.5};
  FlatTop shell_wide{0.5, 0.75};
};

// Torus(2) covers only. Throws PreconditionError when a widened tube could overlap its
// own periodic image.
TubeCutoffs make_tube_cutoffs(const GoodCover& cover);

// ---- beams ------------------------------------------------------------------------

// Beams u_j = Op(chi~_j) Op(psi) u, materialized on demand from the stored Fourier data.
class BeamSet {
 public:
  BeamSet(const GridField& u, std::shared_ptr<const TubeCutoffs> cutoffs,
          std::function<double(const Eigen::Vector2d&)> psi = {});

  std::size_t size() const;
  // True when the frequency factor of beam j vanishes on every mode of u.
  bool is_zero(std::size_t j) const;
  GridField beam(std::size_t j) const;
  GridField sum(const std::vector<std::size_t>& subset) const;
  GridField residual() const;  // u - sum_j u_j
  const GridField& source() const { return u_; }
  const TubeCutoffs& cutoffs() const { return *cut_; }

 private:
  std::vector<cplx> frequency_part(std::size_t j) const;
  GridField u_;
  std::vector<cplx> coeffs_;
  std::shared_ptr<const TubeCutoffs> cut_;
  std::function<double(const Eigen::Vector2d&)> psi_;
  std::vector<char> zero_;
};

// Checks the regime R in [h^delta2, h^delta1] with 0 < delta1 < delta2 < 1/2.
BeamSet beam_decompose(const GridField& u, const GoodCover& cover, double delta1 = 0.2, double delta2 = 0.4);
void check_beam_regime(double R, double h, double delta1, double delta2);

// ---- mass buckets -------------------------------------------------------------------

constexpr int kOverflowBucket = INT_MAX;  // k -> infinity
constexpr int kOverflowClass = INT_MIN;   // m -> -infinity

// Dyadic index k >= -1 with value in [2^-k-1, 2^-k); values >= 1 go to -1 and 0 to the
// overflow bucket.
int dyadic_bucket(double value);
// m with value in (2^(m-1), 2^m]; 0 goes to the overflow class.
int dyadic_class(double value);

struct MassProfile {
  std::map<int, std::vector<std::size_t>> buckets;  // k -> A_k
  std::vector<double> mass;      // ||Op(chi_j) u|| + h^-1 ||Op(chi_j) P u||
  std::vector<double> mass_u;    // ||Op(chi_j) u||
  std::vector<double> mass_Pu;   // ||Op(chi_j) P u||
  std::vector<int> bucket;       // k per tube
  double norm_PT = 0.0;          // ||u|| + (T/h) ||P u||
  double T = 0.0;
  double h = 0.0;
};

// Continuous L^2 masses from the Fourier coefficients of u through the Gram form
// ||S v||^2 = sum v_m conj(v_m') F(m' - m), F the Fourier transform of S^2.
MassProfile mass_filter(const ModeField& u, const TubeCutoffs& cutoffs, double T);
// Same masses with Op(chi_j) materialized on the grid (discrete norms).
MassProfile mass_filter(const GridField& u, const TubeCutoffs& cutoffs, double T);

// I_{k,m}: class m of each ball from h^{(n-1)/2} R^{(1-n)/2} 2^k ||w_k||_{L^inf(B(x_a,R))} / ||u||_{P,T}.
std::vector<int> ball_filter(const GridField& w, const std::vector<Eigen::VectorXd>& centers, double R, int k,
                             double norm_PT);

// w^G = sum over good tubes, w^B = sum over bad tubes of `subset`.
std::pair<GridField, GridField> split_good_bad(const BeamSet& beams, const std::vector<std::size_t>& subset,
                                               const std::vector<char>& is_bad);

}  // namespace geobeam
