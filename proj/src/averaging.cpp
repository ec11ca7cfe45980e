#include "spdelab/averaging.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>

#include "spdelab/quadrature.hpp"

namespace spdelab {

namespace {

constexpr double kPi = std::numbers::pi;

// lifted snapshot transformed per band: chi_hat(n, xi_j)
std::vector<std::complex<double>> lift_fft(const TorusField& field, const XiGrid& xigrid) {
  const KineticDensity dens = lift(field, xigrid);
  const std::size_t n = field.grid().total_cells();
  std::vector<std::complex<double>> out(static_cast<std::size_t>(xigrid.cells) * n);
  for (int j = 0; j < xigrid.cells; ++j)
    fft::forward(field.grid(), dens.band(j), out.data() + static_cast<std::size_t>(j) * n);
  return out;
}

double mod2_of(const int n[2]) {
  return static_cast<double>(n[0]) * n[0] + static_cast<double>(n[1]) * n[1];
}

// composite Simpson weights on an odd node count
std::vector<double> simpson_weights(int nodes, double h) {
  std::vector<double> w(nodes, 0.0);
  for (int i = 0; i < nodes; ++i)
    w[i] = (i == 0 || i == nodes - 1) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
  for (double& x : w) x *= h / 3.0;
  return w;
}

}  // namespace

void AveragingConfig::validate() const {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("averaging: alpha must be in (0,1]");
  if (!(gamma > 0.0)) throw std::invalid_argument("averaging: gamma must be > 0");
  if (lambda < 0.0) throw std::invalid_argument("averaging: lambda must be >= 0");
  if (!(theta > 0.0 && theta <= 1.0))
    throw std::invalid_argument("averaging: theta must be in (0,1]");
  if (!((lambda + 2.0) / (2.0 * alpha) < 2.0))
    throw std::invalid_argument("averaging: need (lambda+2)/(2 alpha) < 2");
}

std::complex<double> semigroup_multiplier(const int n[2], double xi, const FluxModel& model,
                                          const double dbeta[2], double dt, double gamma,
                                          double alpha, FreqConvention conv) {
  if (dt < 0.0) throw std::invalid_argument("semigroup_multiplier: dt >= 0");
  double phase = 0.0;
  for (int d = 0; d < model.dim; ++d) phase -= 2.0 * kPi * model.f(d, xi) * dbeta[d] * n[d];
  const double n2 = mod2_of(n);
  double damp = gamma * (std::pow(n2, alpha) + 1.0) * dt;
  if (!model.zero_diffusion && n2 > 0.0) {
    double sig[2] = {static_cast<double>(n[0]), static_cast<double>(n[1])};
    double nan = model.A(xi).quad(sig, model.dim);
    if (conv == FreqConvention::physical) nan *= 4.0 * kPi * kPi;
    damp += nan * dt;
  }
  return std::exp(-damp) * std::complex<double>(std::cos(phase), std::sin(phase));
}

TorusField compute_u0(const TorusField& u0_field, const FluxModel& model,
                      const DrivingPath& path, double t, double gamma, double alpha,
                      const XiGrid& xigrid, FreqConvention conv) {
  if (std::abs(u0_field.mean()) > 1e-9)
    throw std::invalid_argument("compute_u0: input must be mean-free");
  const TorusGrid& g = u0_field.grid();
  const std::size_t n = g.total_cells();
  const double dxi = xigrid.spacing();

  const auto chi_hat = lift_fft(u0_field, xigrid);
  double dbeta[2] = {0.0, 0.0};
  path.eval(t, dbeta);  // beta(t) - beta(0), beta(0) = 0

  SpectralField spec{g, std::vector<std::complex<double>>(n, {0.0, 0.0})};
  for (std::size_t i = 0; i < n; ++i) {
    int nf[2];
    spec.frequency(i, nf);
    if (nf[0] == 0 && nf[1] == 0) continue;  // u0_hat(0,t) = 0 exactly
    std::complex<double> acc{0.0, 0.0};
    for (int j = 0; j < xigrid.cells; ++j) {
      const std::complex<double> c = chi_hat[static_cast<std::size_t>(j) * n + i];
      if (c == std::complex<double>(0.0, 0.0)) continue;
      acc += semigroup_multiplier(nf, xigrid.cell_center(j), model, dbeta, t, gamma, alpha,
                                  conv) *
             c;
    }
    spec.coeffs[i] = dxi * acc;
  }
  return inverse_fft(spec);
}

std::vector<TorusField> compute_u1(const Trajectory& traj, const FluxModel& model,
                                   const DrivingPath& path, double gamma, double alpha,
                                   const XiGrid& xigrid, FreqConvention conv) {
  if (traj.snapshots.size() < 2)
    throw std::invalid_argument("compute_u1: need at least 2 snapshots");
  const TorusGrid& g = traj.snapshots.front().grid();
  const std::size_t n = g.total_cells();
  const double dxi = xigrid.spacing();
  const std::size_t nrec = traj.times.size();

  // chi_hat per snapshot
  std::vector<std::vector<std::complex<double>>> chi_hat(nrec);
  for (std::size_t k = 0; k < nrec; ++k) chi_hat[k] = lift_fft(traj.snapshots[k], xigrid);

  std::vector<double> beta_at(nrec * 2, 0.0);
  for (std::size_t k = 0; k < nrec; ++k) path.eval(traj.times[k], &beta_at[2 * k]);

  std::vector<TorusField> out;
  out.reserve(nrec);
  for (std::size_t r = 0; r < nrec; ++r) {
    SpectralField spec{g, std::vector<std::complex<double>>(n, {0.0, 0.0})};
    if (r == 0) {
      out.push_back(inverse_fft(spec));  // empty time integral
      continue;
    }
    const double t = traj.times[r];
    // trapezoid weights over s_0..s_r
    std::vector<double> w(r + 1, 0.0);
    for (std::size_t k = 0; k <= r; ++k) {
      const double lo = (k == 0) ? traj.times[0] : traj.times[k - 1];
      const double hi = (k == r) ? traj.times[r] : traj.times[k + 1];
      w[k] = 0.5 * (hi - lo);
    }
    for (std::size_t i = 0; i < n; ++i) {
      int nf[2];
      spec.frequency(i, nf);
      const double omega_bar = gamma * (std::pow(mod2_of(nf), alpha) + 1.0);
      std::complex<double> acc{0.0, 0.0};
      for (std::size_t k = 0; k <= r; ++k) {
        double dbeta[2] = {beta_at[2 * r] - beta_at[2 * k],
                           beta_at[2 * r + 1] - beta_at[2 * k + 1]};
        std::complex<double> inner{0.0, 0.0};
        const auto& ch = chi_hat[k];
        for (int j = 0; j < xigrid.cells; ++j) {
          const std::complex<double> c = ch[static_cast<std::size_t>(j) * n + i];
          if (c == std::complex<double>(0.0, 0.0)) continue;
          inner += semigroup_multiplier(nf, xigrid.cell_center(j), model, dbeta, t - traj.times[k],
                                        gamma, alpha, conv) *
                   c;
        }
        acc += w[k] * inner;
      }
      spec.coeffs[i] = omega_bar * dxi * acc;
    }
    out.push_back(inverse_fft(spec));
  }
  return out;
}

SplitUp split_up(const Trajectory& traj, const FluxModel& model, const DrivingPath& path,
                 double gamma, double alpha, const XiGrid& xigrid, FreqConvention conv) {
  AveragingConfig cfg{alpha, gamma, 0.0, 1.0};
  cfg.validate();
  SplitUp s;
  s.times = traj.times;
  const TorusField& u0 = traj.snapshots.front();
  s.u1_part = compute_u1(traj, model, path, gamma, alpha, xigrid, conv);
  for (std::size_t r = 0; r < traj.times.size(); ++r) {
    s.u0_part.push_back(
        compute_u0(u0, model, path, traj.times[r], gamma, alpha, xigrid, conv));
    const TorusField& u = traj.snapshots[r];
    std::vector<double> q(u.size());
    for (std::size_t i = 0; i < u.size(); ++i)
      q[i] = u[i] - s.u0_part[r][i] - s.u1_part[r][i];
    s.q_part.emplace_back(u.grid(), std::move(q));
    s.u0_l2.push_back(lp_norm(s.u0_part[r], 2.0));
    s.u1_l2.push_back(lp_norm(s.u1_part[r], 2.0));
    s.q_l1.push_back(lp_norm(s.q_part[r], 1.0));
    double resid = 0.0;
    for (std::size_t i = 0; i < u.size(); ++i)
      resid = std::max(resid, std::abs(u[i] - (s.u0_part[r][i] + s.u1_part[r][i] +
                                               s.q_part[r][i])));
    s.additivity_residual = std::max(s.additivity_residual, resid);
  }
  return s;
}

FracHeatResult frac_heat_bound_check(double alpha, double beta_exp,
                                     const std::vector<double>& gamma_ladder,
                                     const std::vector<double>& t_ladder, int n_max) {
  if (!(alpha > 0.0 && alpha <= 1.0))
    throw std::invalid_argument("frac_heat_bound_check: alpha in (0,1]");
  if (beta_exp < 0.0) throw std::invalid_argument("frac_heat_bound_check: beta >= 0");
  if (n_max < 1) throw std::invalid_argument("frac_heat_bound_check: n_max >= 1");

  std::vector<double> scaled;
  for (double gamma : gamma_ladder)
    for (double t : t_ladder) {
      const double gt = gamma * t;
      double sup = (beta_exp == 0.0) ? std::exp(-gt) : 0.0;  // n = 0 term
      for (int n = 1; n <= n_max; ++n) {
        const double n2a = std::pow(static_cast<double>(n) * n, alpha);
        sup = std::max(sup, std::pow(n, beta_exp) * std::exp(-gt * (n2a + 1.0)));
      }
      scaled.push_back(sup * std::pow(gt, beta_exp / (2.0 * alpha)));
    }
  FracHeatResult res;
  res.fitted_c = *std::max_element(scaled.begin(), scaled.end());
  for (double v : scaled)
    if (v > res.fitted_c + 1e-9) ++res.violations;
  return res;
}

PhiLemmaResult phi_lemma_check(const std::function<double(double)>& a,
                               const std::function<double(double)>& b,
                               const std::function<double(double)>& f, double delta,
                               const std::function<double(double)>& iota, double w_window,
                               int quad_resolution, double xi_lo, double xi_hi) {
  if (!(delta > 0.0)) throw std::invalid_argument("phi_lemma_check: delta > 0");
  if (!(xi_hi > xi_lo)) throw std::invalid_argument("phi_lemma_check: empty xi window");
  if (quad_resolution < 100)
    throw std::invalid_argument("phi_lemma_check: quad_resolution >= 100");

  // verify iota as a sublevel envelope of |b - z|^2 + a over the window
  {
    const int scan = std::max(4000, quad_resolution);
    const double dxi = (xi_hi - xi_lo) / scan;
    double bmin = b(xi_lo), bmax = b(xi_lo);
    for (int j = 0; j < scan; ++j) {
      const double bv = b(xi_lo + (j + 0.5) * dxi);
      bmin = std::min(bmin, bv);
      bmax = std::max(bmax, bv);
    }
    for (int e = 0; e <= 12; ++e) {
      const double eps = 1e-4 * std::pow(10.0, e / 3.0);
      for (int zi = 0; zi <= 200; ++zi) {
        const double z = (bmin - 1.0) + (bmax - bmin + 2.0) * zi / 200.0;
        long count = 0;
        for (int j = 0; j < scan; ++j) {
          const double xi = xi_lo + (j + 0.5) * dxi;
          const double d = b(xi) - z;
          if (d * d + a(xi) <= eps) ++count;
        }
        if (count * dxi > iota(eps) + 2.0 * dxi)
          throw std::invalid_argument("phi_lemma_check: unverified envelope");
      }
    }
  }

  const int nxi = quad_resolution | 1;  // odd node count
  const double hxi = (xi_hi - xi_lo) / (nxi - 1);
  const std::vector<double> wxi = simpson_weights(nxi, hxi);
  std::vector<double> av(nxi), bv(nxi), fv(nxi);
  for (int j = 0; j < nxi; ++j) {
    const double xi = xi_lo + j * hxi;
    av[j] = a(xi);
    bv[j] = b(xi);
    fv[j] = f(xi);
  }

  double f_l2sq = 0.0, damped_l1 = 0.0;
  for (int j = 0; j < nxi; ++j) {
    f_l2sq += wxi[j] * fv[j] * fv[j];
    damped_l1 += wxi[j] * std::abs(fv[j]) * std::exp(-delta * av[j]);
  }

  const int nw = quad_resolution | 1;
  const double hw = 2.0 * w_window / (nw - 1);
  const std::vector<double> ww = simpson_weights(nw, hw);
  double lhs = 0.0;
  for (int q = 0; q < nw; ++q) {
    const double w = -w_window + q * hw;
    std::complex<double> phi{0.0, 0.0};
    for (int j = 0; j < nxi; ++j) {
      const double ph = bv[j] * w;
      phi += wxi[j] * fv[j] * std::exp(-delta * av[j]) *
             std::complex<double>(std::cos(ph), std::sin(ph));
    }
    phi *= std::exp(-w * w / delta);
    lhs += ww[q] * std::norm(phi);
  }

  // Gaussian tail of the discarded |w| > W region must be negligible
  const double tail =
      damped_l1 * damped_l1 * std::sqrt(kPi * delta / 2.0) *
      std::erfc(w_window * std::sqrt(2.0 / delta));
  if (lhs > 0.0 && tail > 1e-8 * lhs)
    throw std::invalid_argument("phi_lemma_check: w window too small for the tail estimate");

  // segmented so the adaptive rule cannot skip the e^{-tau/4} support
  double tau_int = 0.0;
  for (double lo = 0.0; lo < 80.0; lo += 4.0)
    tau_int += integrate(
        [&](double tau) { return std::exp(-0.25 * tau) * iota(tau / delta); }, lo, lo + 4.0,
        1e-13);
  PhiLemmaResult res;
  res.lhs = lhs;
  res.rhs = 0.25 * std::sqrt(delta * kPi) * tau_int * f_l2sq;
  return res;
}

}  // namespace spdelab
