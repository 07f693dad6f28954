#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>
#include <memory>
#include <vector>

#include "geobeam/grid.hpp"
#include "geobeam/linalg.hpp"
#include "geobeam/quantize.hpp"

namespace geobeam {

// Second-microlocal symbol a(x, eta, lam) evaluated at lam = h^-rho x' with x' the
// signed transverse displacement wrap(x[axis] - center). Stored as a sum of products
// f(x) g(eta) q(lam); an empty factor means 1.
struct Symbol2M {
  using Fn = std::function<cplx(const Eigen::VectorXd&)>;
  using Profile = std::function<cplx(double)>;
  struct Term {
    Fn spatial;
    Fn frequency;
    Profile profile;
  };
  std::vector<Term> terms;
  int r = 1;           // transverse directions
  double order = 0.0;  // k in |d_lam^g a| <= C <lam>^(k - |g|)
  int axis = 0;
  double center = 0.0;
  Eigen::VectorXd box_lo, box_hi;  // declared (x, eta) support box; empty means unchecked

  double transverse(const Eigen::VectorXd& x) const;
  cplx operator()(const Eigen::VectorXd& x, const Eigen::VectorXd& eta, double lam) const;

  static Symbol2M identity();
};

// Termwise product; both symbols must share the transverse coordinate.
Symbol2M product(const Symbol2M& a, const Symbol2M& b);

// Largest sampled |a| outside the declared box (0 when compactly supported as declared).
double support_violation(const Symbol2M& a, int dim, Stream& rng, int samples = 2000);
// max over samples and |g| <= 2 of |d_lam^g a| / <lam>^(k - |g|), central differences.
double lambda_derivative_ratio(const Symbol2M& a, int dim, Stream& rng, int samples = 500);

// Smallest power of two >= max(4 lambda, 8 h^-rho).
int micro_grid_size(double lambda, double rho);
// Throws PreconditionError unless N >= 8 h^-rho.
void check_resolution(int N, double h, double rho);

// Symbol arrays on one grid, reused across applications.
class Op2Plan {
 public:
  Op2Plan(const Symbol2M& a, int dim, int N, double h, double rho);
  GridField apply(const GridField& u) const;
  GridField apply_adjoint(const GridField& u) const;
  int N() const { return N_; }

 private:
  int dim_, N_;
  double h_;
  std::vector<std::vector<cplx>> spatial_, frequency_;  // empty vector means 1
};

GridField op2_apply(const Symbol2M& a, const GridField& u, double rho);
GridField op2_adjoint_apply(const Symbol2M& a, const GridField& u, double rho);

// T_delta as Fourier index dilation by D = round(h^-delta): c'_m = c_{D m}. Throws
// DomainError when u has a mode not divisible by D (or D m leaves the band for the inverse).
int dilation_factor(double h, double delta, double* rounding = nullptr);
GridField rescale(const GridField& u, double delta);
GridField rescale_inverse(const GridField& u, double delta);

struct NormRow {
  double h = 0.0;
  int N = 0;
  double norm = 0.0;
  int iterations = 0;
};
struct NormSweep {
  std::vector<NormRow> rows;
  LineFit fit;  // log norm against log h; needs two rows with positive norms
};

enum class NormMethod { lanczos, power };

struct PowerOptions {
  double rel_tol = 1e-6;
  int max_iter = 500;
  std::uint64_t seed = 1;
  NormMethod method = NormMethod::lanczos;
};

// Norm of a linear map on GridField from Krylov iteration on A^* A (Lanczos by default,
// plain power iteration on request) from a seeded start.
// Throws NumericalError when the cap is reached.
PowerResult grid_operator_norm(const std::function<GridField(const GridField&)>& A,
                               const std::function<GridField(const GridField&)>& A_adjoint, const GridField& start,
                               const PowerOptions& opt);

// ||Op(a) Op(b) - Op(ab)|| for each h.
NormSweep composition_residual(const Symbol2M& a, const Symbol2M& b, const std::vector<double>& h_list, double rho,
                               int dim, const PowerOptions& opt = {});
// ||[Op(a), Op(b)]|| for each h.
NormSweep commutator_norms(const Symbol2M& a, const Symbol2M& b, const std::vector<double>& h_list, double rho,
                           int dim, const PowerOptions& opt = {});

// ---- coisotropic cutoffs on the flat torus ----------------------------------------------

enum class CoisoKind { chi_hy, X_y };

// chi_hy: u -> chi~(d(x, y) / (eps h^rho)) [Op(chi~((|eta| - 1) / eps)) u](x), where chi~
//   is 1 on [0, 1/2] and vanishes beyond 1.
// X_y:    quantization of kap(d_perp / (eps h^rho)) psi(s) shell(|eta| - 1), where for the
//   line through y in direction eta/|eta|, s is the signed position along the line and
//   d_perp the distance to it; kap is 1 on [0, 1] and vanishes beyond 2, psi is 1 on
//   |s| <= 1/4 and vanishes beyond 3/8, shell is 1 on [0, eps] and vanishes beyond delta.
//   In one dimension there is no transverse factor.
class CoisoCutoff {
 public:
  CoisoCutoff(const Eigen::VectorXd& y, double eps, double rho, double delta, double h, CoisoKind kind);

  GridField apply(const GridField& u) const;
  // Same operator from exact Fourier data; modes absent from u contribute nothing.
  GridField apply(const ModeField& u) const;
  GridField apply_adjoint(const GridField& u) const;
  double symbol(const Eigen::VectorXd& x, const Eigen::VectorXd& eta) const;

  const Eigen::VectorXd& y() const { return y_; }
  CoisoKind kind() const { return kind_; }
  double width() const { return w_; }  // eps h^rho
  double eps() const { return eps_; }
  double delta() const { return delta_; }
  double h() const { return h_; }

 private:
  struct Modes;
  std::shared_ptr<const Modes> modes_for(int dim, int N) const;
  GridField apply_coeffs(const std::vector<cplx>& c, int dim, int N) const;
  template <class Fn>
  void for_each_node(const Modes& md, std::size_t k, int N, Fn&& fn) const;

  Eigen::VectorXd y_;
  double eps_, rho_, delta_, h_, w_;
  CoisoKind kind_;
  mutable std::shared_ptr<const Modes> cache_;
};

CoisoCutoff build_coiso_cutoff(const Eigen::VectorXd& y, double eps, double rho, double delta, double h,
                               CoisoKind kind);

// Flat-top profiles used by the cutoffs.
double kap_profile(double s);   // 1 on |s| <= 1, 0 on |s| >= 2
double psi_profile(double s);   // 1 on |s| <= 1/4, 0 on |s| >= 3/8

struct MicroOptions {
  double rho = 0.7;
  double eps = 0.1;
  double delta = 0.25;
  double eps_q = 0.02;  // regime h^(rho - eps_q) <= |t|
  double eps0 = 0.3;    // regime |t| < eps0
  int dim = 2;
  Eigen::Vector2d y0 = Eigen::Vector2d(0.5, 0.5);
  PowerOptions power;
};

struct UncertaintyRow {
  double t_requested = 0.0;
  double t = 0.0;  // grid-aligned
  double lambda = 0.0;
  double h = 0.0;
  int N = 0;
  double norm = 0.0;
  int iterations = 0;
};

// ||X(0) X(t)|| with X(t) = X_{y0 + t e1}. y0 + t e1 is snapped to the grid. Throws
// PreconditionError outside h^(rho - eps_q) <= |t| < eps0.
std::vector<UncertaintyRow> uncertainty_norm(const std::vector<double>& t_list, double lambda,
                                             const MicroOptions& opt = {});
// Same norm from the dense Gram matrix on the shell modes (oracle, small grids only).
double dense_uncertainty_norm(double t, double lambda, const MicroOptions& opt = {});

struct OrthogonalityReport {
  std::vector<double> sums;  // sum_j ||X_j u||^2 / ||u||^2 per sample
  double max_sum = 0.0;
  double a_h = 0.0;          // h^(2 rho - 1) / R
  double bracket = 0.0;      // 1 + a^((n-1)/2) |J|^((3n+1)/2n) (1 + a^((n-1)/4))
  double ratio = 0.0;        // max_sum / bracket
  double C_max = 10.0;
  bool within = false;       // ratio <= C_max
};

// Throws PreconditionError unless h^(2 rho - 1) / R < 1.
OrthogonalityReport almost_orthogonality(const std::vector<Eigen::VectorXd>& points, double R, double lambda,
                                         const std::vector<ModeField>& samples, const MicroOptions& opt = {},
                                         double C_max = 10.0);

}  // namespace geobeam
