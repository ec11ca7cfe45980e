#pragma once

#include <complex>
#include <cstddef>
#include <functional>
#include <vector>

namespace spdelab {

// Uniform periodic grid on the unit torus, N in {1,2}, M cells per axis.
// Cell centers sit at x_k = (k + 1/2) * spacing.
struct TorusGrid {
  int dim = 1;
  int cells_per_axis = 4;

  double spacing() const { return 1.0 / cells_per_axis; }
  std::size_t total_cells() const {
    std::size_t n = 1;
    for (int d = 0; d < dim; ++d) n *= static_cast<std::size_t>(cells_per_axis);
    return n;
  }

  // validates dim in {1,2}, M >= 4 and a power of two
  static TorusGrid make(int dim, int cells_per_axis);

  bool operator==(const TorusGrid&) const = default;
};

// Scalar field of cell averages. Values are validated finite at construction;
// fields are treated as immutable values (all operations return new fields).
class TorusField {
 public:
  TorusField(TorusGrid grid, std::vector<double> values);

  static TorusField zeros(const TorusGrid& grid);
  // samples f at cell centers; 1-d callables get x, 2-d get (x1,x2)
  static TorusField from_function(const TorusGrid& grid,
                                  const std::function<double(double)>& f);
  static TorusField from_function(const TorusGrid& grid,
                                  const std::function<double(double, double)>& f);

  const TorusGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }
  std::size_t size() const { return values_.size(); }
  double mean() const;

 private:
  TorusGrid grid_;
  std::vector<double> values_;
};

// Complex Fourier coefficients indexed by the flat FFT layout; the integer
// frequency of flat index i along an axis is i < M/2 ? i : i - M.
struct SpectralField {
  TorusGrid grid;
  std::vector<std::complex<double>> coeffs;

  // folded integer frequency vector of a flat index
  void frequency(std::size_t flat, int out[2]) const;
};

// Coefficients are Fourier-series coefficients of the cell-center samples:
// c(n) = M^-N sum_k u_k exp(-2*pi*i n.x_k), so c(0) is the spatial average
// and c(+-1) of cos(2*pi*x) is 1/2.
SpectralField forward_fft(const TorusField& field);
TorusField inverse_fft(const SpectralField& spec);

// x -> field(x - offset) with periodic wrap, by phase multiplication.
// Lattice offsets reduce to an exact circular index rotation. For non-lattice
// offsets the unpaired Nyquist mode is projected back to the real class.
TorusField spectral_shift(const TorusField& field, const std::vector<double>& offset);

double lp_norm(const TorusField& field, double p);  // p in [1, inf]
double bv_seminorm(const TorusField& field);

// homogeneous Bessel norm || (|n|^lambda c(n))^v ||_p ; the n=0 mode is dropped
double wlam_norm(const TorusField& field, double lambda, double p);

// spectral multiplier |n|^(2*alpha) (integer-frequency modulus), alpha in (0,1]
TorusField frac_laplacian(const TorusField& field, double alpha);

// Low-level transforms on raw buffers (no validation); used by the solver and
// averaging inner loops. Layout and conventions identical to the checked API.
namespace fft {
void forward(const TorusGrid& grid, const double* in, std::complex<double>* out);
void inverse(const TorusGrid& grid, const std::complex<double>* in, double* out);
}  // namespace fft

}  // namespace spdelab
