#pragma once

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace spdelab {

// symmetric N x N matrix value, N in {1,2}
struct SymMat {
  double a11 = 0.0;
  double a22 = 0.0;
  double a12 = 0.0;

  // sigma . A . sigma
  double quad(const double sig[2], int dim) const {
    if (dim == 1) return a11 * sig[0] * sig[0];
    return a11 * sig[0] * sig[0] + 2.0 * a12 * sig[0] * sig[1] + a22 * sig[1] * sig[1];
  }
  double min_eig(int dim) const;
  double max_eig(int dim) const;
  bool is_zero() const { return a11 == 0.0 && a22 == 0.0 && a12 == 0.0; }

  // symmetric nonnegative square root
  SymMat sqrt_psd(int dim) const;
};

// Flux/diffusion model: componentwise flux F with derivative f = F', diffusion
// matrix A with square root sigma, primitives beta_ik of sigma_ik and B_ij of
// a_ij (both vanishing at 0), and the growth exponents p1 (A') and p2 (F'').
// Immutable after construction; shareable across workers.
class FluxModel {
 public:
  int dim = 1;
  std::string name;
  std::function<double(int /*axis*/, double /*xi*/)> F;
  std::function<double(int, double)> f;
  std::function<SymMat(double)> A;
  std::function<SymMat(double)> sigma;
  std::function<double(int /*i*/, int /*k*/, double)> beta;
  std::function<double(int /*i*/, int /*j*/, double)> Bprim;
  double p1 = 0.0;
  double p2 = 0.0;
  bool zero_diffusion = false;  // A identically zero
  bool zero_flux = false;       // F identically zero

  double p0() const { return std::max(0.0, std::max(p1, p2)); }
  // max |f_i(xi)| over xi in [lo,hi], dense sampling
  double max_abs_f(double lo, double hi) const;
  // max eigenvalue of A over xi in [lo,hi], dense sampling
  double max_eig_A(double lo, double hi) const;
};

FluxModel make_burgers(int dim = 1);
// porous medium a(xi) = m |xi|^(m-1) on the diagonal, optional hyperbolic flux
FluxModel make_porous_medium(double m, int dim = 1,
                             const std::shared_ptr<const FluxModel>& flux = nullptr);
// f_i(xi) = sgn(xi) |xi|^(p_i), purely hyperbolic
FluxModel make_power_flux(const std::vector<double>& exponents);

// generic model from callables; sigma / beta / Bprim are derived numerically
// (symmetric square root per xi, tabulated with linear interpolation) unless
// closed forms are supplied
struct ModelSpec {
  int dim = 1;
  std::string name = "custom";
  std::function<double(int, double)> F;
  std::function<double(int, double)> f;
  std::function<SymMat(double)> A;  // null means A == 0
  std::function<SymMat(double)> sigma;
  std::function<double(int, int, double)> beta;
  std::function<double(int, int, double)> Bprim;
  double p1 = 0.0;
  double p2 = 0.0;
  double table_halfwidth = 8.0;  // tabulation window for the derived callables
  int table_points = 1 << 14;
};
FluxModel make_custom(const ModelSpec& spec);

// A^eps = (A * bump_width) + eps I ; the mollified part keeps its own
// sigma/beta for the parabolic dissipation bookkeeping, the eps floor enters
// the stepping and the eps|Du|^2 mass separately.
struct RegularizedModel {
  std::shared_ptr<const FluxModel> base;
  std::shared_ptr<const FluxModel> mollified;  // flux of base, A replaced by A * bump
  double eps = 0.0;
  double width = 0.0;

  SymMat A_eps(double xi) const {
    SymMat s = mollified->A(xi);
    s.a11 += eps;
    if (base->dim == 2) s.a22 += eps;
    return s;
  }
  double Bprim_eps(int i, int j, double xi) const {
    return mollified->Bprim(i, j, xi) + (i == j ? eps * xi : 0.0);
  }
  double max_eig_A_eps(double lo, double hi) const {
    return mollified->max_eig_A(lo, hi) + eps;
  }
};

RegularizedModel regularize(const FluxModel& base, double eps, double mollifier_width);

// Lebesgue measure of {xi in window : |f(xi) sigma - z|^2 + sigma A(xi) sigma <= eps}
// by uniform midpoint counting; (f sigma)^i = f^i sigma^i componentwise.
double sublevel_measure(const FluxModel& model, const std::vector<double>& sigma_dir,
                        const std::vector<double>& z, double eps, double xi_lo, double xi_hi,
                        int resolution);

struct ThetaEstimate {
  double theta_hat = 0.0;     // in (0,1]
  double constant_hat = 0.0;  // fitted C
  double fit_r2 = 0.0;
  std::vector<double> eps_ladder;
  bool clamped = false;        // raw fit exceeded 1 and was clamped
  double zbox_halfwidth = 0.0; // z scanned over [-h,h]^N
  bool zbox_is_default = true; // the default box 2*max|f| was used
};

// the flux is linear/degenerate: the sublevel measure does not shrink with eps
struct ThetaDegenerateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};
// every sampled measure was zero: the xi window misses the relevant set
struct ThetaWindowError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

ThetaEstimate estimate_theta(const FluxModel& model, int sigma_samples, int z_samples,
                             const std::vector<double>& eps_ladder, double xi_lo, double xi_hi,
                             double zbox_halfwidth = -1.0 /* <0: default 2 max|f| */);

}  // namespace spdelab
