#pragma once

#include <Eigen/Dense>
#include <complex>
#include <vector>

namespace geobeam {

using cplx = std::complex<double>;

// Complex samples of a function on the unit torus [0,1)^n, n in {1, 2}, at x = i / N.
// Frequencies are xi = 2 pi m with integer m in [-N/2, N/2), so the semiclassical
// frequency is h xi = m / lambda with lambda = 1 / (2 pi h).
class GridField {
 public:
  GridField() = default;
  GridField(int dim, int N, double h);

  int dim() const { return dim_; }
  int N() const { return N_; }
  double h() const { return h_; }
  double lambda() const;
  std::size_t size() const { return v_.size(); }

  std::vector<cplx>& values() { return v_; }
  const std::vector<cplx>& values() const { return v_; }
  cplx& operator[](std::size_t i) { return v_[i]; }
  const cplx& operator[](std::size_t i) const { return v_[i]; }
  // Row-major: index = i0 * N + i1.
  std::size_t index(int i0, int i1 = 0) const { return dim_ == 1 ? i0 : static_cast<std::size_t>(i0) * N_ + i1; }
  Eigen::VectorXd node(std::size_t idx) const;

  // Discrete norms with cell volume N^-n.
  double l2() const;
  double linf() const;
  double lp(double p) const;

  GridField& operator+=(const GridField& o);
  GridField& operator-=(const GridField& o);
  GridField& operator*=(cplx s);

  Eigen::VectorXcd as_vector() const;
  static GridField from_vector(int dim, int N, double h, const Eigen::VectorXcd& v);

 private:
  int dim_ = 1;
  int N_ = 0;
  double h_ = 0.0;
  std::vector<cplx> v_;
};

GridField operator+(GridField a, const GridField& b);
GridField operator-(GridField a, const GridField& b);

// h = 1 / (2 pi lambda) and N = grid_factor * lambda.
GridField make_grid(int dim, int lambda, int grid_factor = 4);
double h_from_lambda(double lambda);

// Throws PreconditionError unless N >= 4 lambda (the shell |h xi| ~ 1 stays below half
// the Nyquist frequency) and the values are finite.
void validate_grid(const GridField& u);

// Signed frequency of FFT index k.
inline int signed_freq(int k, int N) { return k < N / 2 ? k : k - N; }
inline int fft_index(int m, int N) { return ((m % N) + N) % N; }

// Fourier coefficients c_m = N^-n sum_x u(x) e^{-2 pi i m x}, in FFT index order, so
// that u(x) = sum_m c_m e^{2 pi i m x}.
std::vector<cplx> fft_forward(const GridField& u);
// Values from coefficients (same layout).
GridField fft_inverse(const std::vector<cplx>& coeffs, int dim, int N, double h);

// Grid built from a sparse list of modes.
struct ModeField {
  int dim = 2;
  int N = 0;
  double h = 0.0;
  std::vector<Eigen::Vector2i> modes;  // second entry ignored when dim == 1
  Eigen::VectorXcd coeffs;
  GridField to_grid() const;
  double l2() const { return coeffs.norm(); }
};

}  // namespace geobeam
