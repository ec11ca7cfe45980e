#include "spdelab/torus_field.hpp"

#include <fftw3.h>

#include <cmath>
#include <map>
#include <mutex>
#include <numbers>
#include <stdexcept>

namespace spdelab {

namespace {

constexpr double kPi = std::numbers::pi;

bool is_pow2(int m) { return m >= 1 && (m & (m - 1)) == 0; }

// FFTW plans are cached per (size, dim, sign); creation is serialized (the
// FFTW planner is not thread-safe), execution via fftw_execute_dft is.
class PlanCache {
 public:
  fftw_plan get(int dim, int m, int sign) {
    std::scoped_lock lock(mu_);
    const auto key = std::make_tuple(dim, m, sign);
    auto it = plans_.find(key);
    if (it != plans_.end()) return it->second;
    std::size_t n = static_cast<std::size_t>(m);
    if (dim == 2) n *= m;
    fftw_complex* in = fftw_alloc_complex(n);
    fftw_complex* out = fftw_alloc_complex(n);
    const unsigned flags = FFTW_ESTIMATE | FFTW_UNALIGNED;
    fftw_plan p = (dim == 1) ? fftw_plan_dft_1d(m, in, out, sign, flags)
                             : fftw_plan_dft_2d(m, m, in, out, sign, flags);
    fftw_free(in);
    fftw_free(out);
    plans_.emplace(key, p);
    return p;
  }

 private:
  std::mutex mu_;
  std::map<std::tuple<int, int, int>, fftw_plan> plans_;
};

PlanCache& plan_cache() {
  static PlanCache cache;
  return cache;
}

void execute(int dim, int m, int sign, std::complex<double>* in, std::complex<double>* out) {
  fftw_plan p = plan_cache().get(dim, m, sign);
  fftw_execute_dft(p, reinterpret_cast<fftw_complex*>(in), reinterpret_cast<fftw_complex*>(out));
}

int fold(int idx, int m) { return idx < m / 2 ? idx : idx - m; }

void check_finite(const std::vector<double>& v, const char* what) {
  for (double x : v) {
    if (!std::isfinite(x)) throw std::invalid_argument(std::string(what) + ": non-finite value");
  }
}

}  // namespace

TorusGrid TorusGrid::make(int dim, int cells_per_axis) {
  if (dim != 1 && dim != 2) throw std::invalid_argument("TorusGrid: dim must be 1 or 2");
  if (cells_per_axis < 4 || !is_pow2(cells_per_axis))
    throw std::invalid_argument("TorusGrid: cells_per_axis must be a power of two >= 4");
  return TorusGrid{dim, cells_per_axis};
}

TorusField::TorusField(TorusGrid grid, std::vector<double> values)
    : grid_(grid), values_(std::move(values)) {
  if (values_.size() != grid_.total_cells())
    throw std::invalid_argument("TorusField: value count does not match grid");
  check_finite(values_, "TorusField");
}

TorusField TorusField::zeros(const TorusGrid& grid) {
  return TorusField(grid, std::vector<double>(grid.total_cells(), 0.0));
}

TorusField TorusField::from_function(const TorusGrid& grid,
                                     const std::function<double(double)>& f) {
  if (grid.dim != 1) throw std::invalid_argument("from_function: 1-d callable on 2-d grid");
  const int m = grid.cells_per_axis;
  const double dx = grid.spacing();
  std::vector<double> v(grid.total_cells());
  for (int k = 0; k < m; ++k) v[k] = f((k + 0.5) * dx);
  return TorusField(grid, std::move(v));
}

TorusField TorusField::from_function(const TorusGrid& grid,
                                     const std::function<double(double, double)>& f) {
  if (grid.dim != 2) throw std::invalid_argument("from_function: 2-d callable on 1-d grid");
  const int m = grid.cells_per_axis;
  const double dx = grid.spacing();
  std::vector<double> v(grid.total_cells());
  for (int k1 = 0; k1 < m; ++k1)
    for (int k2 = 0; k2 < m; ++k2)
      v[static_cast<std::size_t>(k1) * m + k2] = f((k1 + 0.5) * dx, (k2 + 0.5) * dx);
  return TorusField(grid, std::move(v));
}

double TorusField::mean() const {
  double s = 0.0;
  for (double x : values_) s += x;
  return s / static_cast<double>(values_.size());
}

void SpectralField::frequency(std::size_t flat, int out[2]) const {
  const int m = grid.cells_per_axis;
  if (grid.dim == 1) {
    out[0] = fold(static_cast<int>(flat), m);
    out[1] = 0;
  } else {
    out[0] = fold(static_cast<int>(flat) / m, m);
    out[1] = fold(static_cast<int>(flat) % m, m);
  }
}

namespace fft {

void forward(const TorusGrid& grid, const double* in, std::complex<double>* out) {
  const int m = grid.cells_per_axis;
  const std::size_t n = grid.total_cells();
  std::vector<std::complex<double>> buf(n);
  for (std::size_t i = 0; i < n; ++i) buf[i] = in[i];
  execute(grid.dim, m, FFTW_FORWARD, buf.data(), out);
  // normalize and shift phases to cell centers
  const double inv_n = 1.0 / static_cast<double>(n);
  if (grid.dim == 1) {
    for (int i = 0; i < m; ++i) {
      const double ph = -kPi * fold(i, m) / m;
      out[i] *= inv_n * std::complex<double>(std::cos(ph), std::sin(ph));
    }
  } else {
    for (int i1 = 0; i1 < m; ++i1)
      for (int i2 = 0; i2 < m; ++i2) {
        const double ph = -kPi * (fold(i1, m) + fold(i2, m)) / m;
        out[static_cast<std::size_t>(i1) * m + i2] *=
            inv_n * std::complex<double>(std::cos(ph), std::sin(ph));
      }
  }
}

void inverse(const TorusGrid& grid, const std::complex<double>* in, double* out) {
  const int m = grid.cells_per_axis;
  const std::size_t n = grid.total_cells();
  std::vector<std::complex<double>> buf(n), res(n);
  if (grid.dim == 1) {
    for (int i = 0; i < m; ++i) {
      const double ph = kPi * fold(i, m) / m;
      buf[i] = in[i] * std::complex<double>(std::cos(ph), std::sin(ph));
    }
  } else {
    for (int i1 = 0; i1 < m; ++i1)
      for (int i2 = 0; i2 < m; ++i2) {
        const double ph = kPi * (fold(i1, m) + fold(i2, m)) / m;
        buf[static_cast<std::size_t>(i1) * m + i2] =
            in[static_cast<std::size_t>(i1) * m + i2] *
            std::complex<double>(std::cos(ph), std::sin(ph));
      }
  }
  execute(grid.dim, m, FFTW_BACKWARD, buf.data(), res.data());
  for (std::size_t i = 0; i < n; ++i) out[i] = res[i].real();
}

}  // namespace fft

SpectralField forward_fft(const TorusField& field) {
  SpectralField spec{field.grid(), std::vector<std::complex<double>>(field.size())};
  fft::forward(field.grid(), field.values().data(), spec.coeffs.data());
  return spec;
}

TorusField inverse_fft(const SpectralField& spec) {
  if (spec.coeffs.size() != spec.grid.total_cells())
    throw std::invalid_argument("inverse_fft: coefficient count does not match grid");
  std::vector<double> v(spec.coeffs.size());
  fft::inverse(spec.grid, spec.coeffs.data(), v.data());
  return TorusField(spec.grid, std::move(v));
}

TorusField spectral_shift(const TorusField& field, const std::vector<double>& offset) {
  const TorusGrid& g = field.grid();
  if (offset.size() != static_cast<std::size_t>(g.dim))
    throw std::invalid_argument("spectral_shift: offset dimension mismatch");
  const int m = g.cells_per_axis;
  const double dx = g.spacing();

  // reduce mod 1 per axis
  double s[2] = {0.0, 0.0};
  for (int d = 0; d < g.dim; ++d) {
    s[d] = offset[d] - std::floor(offset[d]);
    if (s[d] == 1.0) s[d] = 0.0;
  }

  // lattice shifts are exact circular rotations
  bool lattice = true;
  long shift_cells[2] = {0, 0};
  for (int d = 0; d < g.dim; ++d) {
    const double t = s[d] / dx;
    const double r = std::round(t);
    if (std::abs(t - r) > 1e-9) lattice = false;
    shift_cells[d] = static_cast<long>(r) % m;
  }
  if (lattice) {
    std::vector<double> v(field.size());
    if (g.dim == 1) {
      for (int k = 0; k < m; ++k) v[(k + shift_cells[0]) % m] = field[k];
    } else {
      for (int k1 = 0; k1 < m; ++k1)
        for (int k2 = 0; k2 < m; ++k2)
          v[(((k1 + shift_cells[0]) % m) * static_cast<std::size_t>(m)) +
            ((k2 + shift_cells[1]) % m)] = field[static_cast<std::size_t>(k1) * m + k2];
    }
    return TorusField(g, std::move(v));
  }

  SpectralField spec = forward_fft(field);
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    int n[2];
    spec.frequency(i, n);
    const double ph = -2.0 * kPi * (n[0] * s[0] + n[1] * s[1]);
    spec.coeffs[i] *= std::complex<double>(std::cos(ph), std::sin(ph));
  }
  return inverse_fft(spec);
}

double lp_norm(const TorusField& field, double p) {
  if (p < 1.0) throw std::invalid_argument("lp_norm: p must be >= 1");
  const std::vector<double>& v = field.values();
  if (std::isinf(p)) {
    double mx = 0.0;
    for (double x : v) mx = std::max(mx, std::abs(x));
    return mx;
  }
  const double cell = std::pow(field.grid().spacing(), field.grid().dim);
  double s = 0.0;
  for (double x : v) s += std::pow(std::abs(x), p);
  return std::pow(s * cell, 1.0 / p);
}

double bv_seminorm(const TorusField& field) {
  const TorusGrid& g = field.grid();
  const int m = g.cells_per_axis;
  const double face = std::pow(g.spacing(), g.dim - 1);
  double s = 0.0;
  if (g.dim == 1) {
    for (int k = 0; k < m; ++k) s += std::abs(field[(k + 1) % m] - field[k]);
  } else {
    for (int k1 = 0; k1 < m; ++k1)
      for (int k2 = 0; k2 < m; ++k2) {
        const std::size_t i = static_cast<std::size_t>(k1) * m + k2;
        s += std::abs(field[(static_cast<std::size_t>((k1 + 1) % m)) * m + k2] - field[i]);
        s += std::abs(field[static_cast<std::size_t>(k1) * m + ((k2 + 1) % m)] - field[i]);
      }
  }
  return s * face;
}

double wlam_norm(const TorusField& field, double lambda, double p) {
  if (lambda < 0.0) throw std::invalid_argument("wlam_norm: lambda must be >= 0");
  SpectralField spec = forward_fft(field);
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    int n[2];
    spec.frequency(i, n);
    const double n2 = static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1];
    // homogeneous convention: the mean is dropped for every lambda
    spec.coeffs[i] *= (n2 == 0.0) ? 0.0 : std::pow(n2, 0.5 * lambda);
  }
  return lp_norm(inverse_fft(spec), p);
}

TorusField frac_laplacian(const TorusField& field, double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("frac_laplacian: alpha must be in (0,1]");
  SpectralField spec = forward_fft(field);
  for (std::size_t i = 0; i < spec.coeffs.size(); ++i) {
    int n[2];
    spec.frequency(i, n);
    const double n2 = static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1];
    spec.coeffs[i] *= std::pow(n2, alpha);
  }
  return inverse_fft(spec);
}

}  // namespace spdelab
