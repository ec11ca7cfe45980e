#include "spdelab/solvers.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstring>
#include <numbers>
#include <stdexcept>

#include "spdelab/detail/linear_table.hpp"

namespace spdelab {

namespace {

using detail::LinearTable;

constexpr double kPi = std::numbers::pi;

void check_state(const std::vector<double>& u, const XiGrid& xigrid, double t) {
  for (double x : u) {
    if (!std::isfinite(x))
      throw std::runtime_error("solver: NaN detected at t=" + std::to_string(t));
    if (x < xigrid.xi_min || x > xigrid.xi_max)
      throw std::runtime_error("solver: state left the xi window at t=" + std::to_string(t));
  }
}

// Engquist-Osher split primitives P+-(u) = int_0^u max/min(f_i, 0) per axis
struct EOTables {
  LinearTable pplus[2];
  LinearTable pminus[2];
  double max_abs_f[2] = {0.0, 0.0};

  EOTables(const FluxModel& model, double lo, double hi) {
    const int n = 8193;
    for (int i = 0; i < model.dim; ++i) {
      std::vector<double> yp(n), ym(n);
      for (int j = 0; j < n; ++j) {
        const double xi = lo + (hi - lo) * j / (n - 1);
        const double fv = model.f(i, xi);
        yp[j] = std::max(fv, 0.0);
        ym[j] = std::min(fv, 0.0);
        max_abs_f[i] = std::max(max_abs_f[i], std::abs(fv));
      }
      pplus[i] = LinearTable(lo, hi, std::move(yp));
      pminus[i] = LinearTable(lo, hi, std::move(ym));
    }
  }

  // numerical flux for G(u) = F_i(u) * zdot at an interface (a|b)
  double flux(int i, double a, double b, double zdot) const {
    if (zdot >= 0.0)
      return zdot * (pplus[i].primitive(a, 0.0) + pminus[i].primitive(b, 0.0));
    return zdot * (pminus[i].primitive(a, 0.0) + pplus[i].primitive(b, 0.0));
  }
};

// explicit conservative stepper for the regularized equation
class ReferenceStepper {
 public:
  ReferenceStepper(const RegularizedModel& reg, const TorusGrid& grid, double xi_lo, double xi_hi,
                   double cfl_h, double cfl_p)
      : reg_(reg), grid_(grid), eo_(*reg.base, xi_lo, xi_hi), cfl_h_(cfl_h), cfl_p_(cfl_p) {
    lambda_max_ = reg.max_eig_A_eps(xi_lo, xi_hi);
    has_offdiag_ = false;
    if (!reg.mollified->zero_diffusion) {
      for (int j = 0; j <= 64; ++j) {
        const double xi = xi_lo + (xi_hi - xi_lo) * j / 64.0;
        if (std::abs(reg.mollified->A(xi).a12) > 0.0) has_offdiag_ = true;
      }
    }
  }

  double dt_max(const double zdot[2]) const {
    const double dx = grid_.spacing();
    double dt = cfl_p_ * dx * dx / (2.0 * grid_.dim * std::max(lambda_max_, 1e-300));
    for (int i = 0; i < grid_.dim; ++i) {
      const double speed = eo_.max_abs_f[i] * std::abs(zdot[i]);
      if (speed > 0.0) dt = std::min(dt, cfl_h_ * dx / speed);
    }
    return dt;
  }

  // eps |Du|^2 mass of the current state (centered gradient)
  double grad_sq_mass(const std::vector<double>& u) const {
    const int m = grid_.cells_per_axis;
    const double dx = grid_.spacing();
    const double cell = std::pow(dx, grid_.dim);
    double acc = 0.0;
    if (grid_.dim == 1) {
      for (int k = 0; k < m; ++k) {
        const double g = (u[(k + 1) % m] - u[(k + m - 1) % m]) / (2.0 * dx);
        acc += g * g;
      }
    } else {
      for (int k1 = 0; k1 < m; ++k1)
        for (int k2 = 0; k2 < m; ++k2) {
          const double g1 = (u[static_cast<std::size_t>((k1 + 1) % m) * m + k2] -
                             u[static_cast<std::size_t>((k1 + m - 1) % m) * m + k2]) /
                            (2.0 * dx);
          const double g2 = (u[static_cast<std::size_t>(k1) * m + (k2 + 1) % m] -
                             u[static_cast<std::size_t>(k1) * m + (k2 + m - 1) % m]) /
                            (2.0 * dx);
          acc += g1 * g1 + g2 * g2;
        }
    }
    return acc * cell;
  }

  void step(std::vector<double>& u, const double zdot[2], double dt) {
    const int m = grid_.cells_per_axis;
    const double dx = grid_.spacing();
    const std::size_t n = grid_.total_cells();
    unew_.resize(n);
    w0_.resize(n);

    if (grid_.dim == 1) {
      flux_.resize(n);
      for (int k = 0; k < m; ++k) flux_[k] = eo_.flux(0, u[k], u[(k + 1) % m], zdot[0]);
      for (std::size_t k = 0; k < n; ++k) w0_[k] = reg_.Bprim_eps(0, 0, u[k]);
      for (int k = 0; k < m; ++k) {
        const double div_flux = (flux_[k] - flux_[(k + m - 1) % m]) / dx;
        const double lap =
            (w0_[(k + 1) % m] - 2.0 * w0_[k] + w0_[(k + m - 1) % m]) / (dx * dx);
        unew_[k] = u[k] - dt * div_flux + dt * lap;
      }
      u.swap(unew_);
      return;
    }

    flux_.resize(n);
    flux2_.resize(n);
    w1_.resize(n);
    auto idx = [m](int k1, int k2) {
      return static_cast<std::size_t>(((k1 % m) + m) % m) * m + (((k2 % m) + m) % m);
    };
    for (int k1 = 0; k1 < m; ++k1)
      for (int k2 = 0; k2 < m; ++k2) {
        flux_[idx(k1, k2)] = eo_.flux(0, u[idx(k1, k2)], u[idx(k1 + 1, k2)], zdot[0]);
        flux2_[idx(k1, k2)] = eo_.flux(1, u[idx(k1, k2)], u[idx(k1, k2 + 1)], zdot[1]);
      }
    for (std::size_t k = 0; k < n; ++k) {
      w0_[k] = reg_.Bprim_eps(0, 0, u[k]);
      w1_[k] = reg_.Bprim_eps(1, 1, u[k]);
    }
    if (has_offdiag_) {
      b12_.resize(n);
      for (std::size_t k = 0; k < n; ++k) b12_[k] = reg_.Bprim_eps(0, 1, u[k]);
    }
    for (int k1 = 0; k1 < m; ++k1)
      for (int k2 = 0; k2 < m; ++k2) {
        const std::size_t q = idx(k1, k2);
        const double div_flux = (flux_[q] - flux_[idx(k1 - 1, k2)]) / dx +
                                (flux2_[q] - flux2_[idx(k1, k2 - 1)]) / dx;
        double lap = (w0_[idx(k1 + 1, k2)] - 2.0 * w0_[q] + w0_[idx(k1 - 1, k2)]) / (dx * dx) +
                     (w1_[idx(k1, k2 + 1)] - 2.0 * w1_[q] + w1_[idx(k1, k2 - 1)]) / (dx * dx);
        if (has_offdiag_)
          lap += 2.0 *
                 (b12_[idx(k1 + 1, k2 + 1)] - b12_[idx(k1 + 1, k2 - 1)] -
                  b12_[idx(k1 - 1, k2 + 1)] + b12_[idx(k1 - 1, k2 - 1)]) /
                 (4.0 * dx * dx);
        unew_[q] = u[q] - dt * div_flux + dt * lap;
      }
    u.swap(unew_);
  }

  double eps() const { return reg_.eps; }
  bool mollified_has_diffusion() const { return !reg_.mollified->zero_diffusion; }
  const FluxModel& mollified() const { return *reg_.mollified; }

 private:
  const RegularizedModel& reg_;
  TorusGrid grid_;
  EOTables eo_;
  double cfl_h_, cfl_p_;
  double lambda_max_ = 0.0;
  bool has_offdiag_ = false;
  std::vector<double> unew_, flux_, flux2_, w0_, w1_, b12_;
};

// degenerate-diffusion substep via primitives B_ij (no eps floor)
class ParabolicStepper {
 public:
  ParabolicStepper(const FluxModel& model, const TorusGrid& grid, double xi_lo, double xi_hi,
                   double cfl_p)
      : model_(model), grid_(grid), cfl_p_(cfl_p) {
    lambda_max_ = model.max_eig_A(xi_lo, xi_hi);
    has_offdiag_ = false;
    if (!model.zero_diffusion) {
      for (int j = 0; j <= 64; ++j) {
        const double xi = xi_lo + (xi_hi - xi_lo) * j / 64.0;
        if (std::abs(model.A(xi).a12) > 0.0) has_offdiag_ = true;
      }
    }
  }

  bool active() const { return !model_.zero_diffusion; }
  double dt_max() const {
    const double dx = grid_.spacing();
    return cfl_p_ * dx * dx / (2.0 * grid_.dim * std::max(lambda_max_, 1e-300));
  }

  void substep(std::vector<double>& u, double dt) {
    const int m = grid_.cells_per_axis;
    const double dx = grid_.spacing();
    const std::size_t n = grid_.total_cells();
    unew_.resize(n);
    w0_.resize(n);
    if (grid_.dim == 1) {
      for (std::size_t k = 0; k < n; ++k) w0_[k] = model_.Bprim(0, 0, u[k]);
      for (int k = 0; k < m; ++k)
        unew_[k] = u[k] + dt *
                              (w0_[(k + 1) % m] - 2.0 * w0_[k] + w0_[(k + m - 1) % m]) /
                              (dx * dx);
      u.swap(unew_);
      return;
    }
    w1_.resize(n);
    auto idx = [m](int k1, int k2) {
      return static_cast<std::size_t>(((k1 % m) + m) % m) * m + (((k2 % m) + m) % m);
    };
    for (std::size_t k = 0; k < n; ++k) {
      w0_[k] = model_.Bprim(0, 0, u[k]);
      w1_[k] = model_.Bprim(1, 1, u[k]);
    }
    if (has_offdiag_) {
      b12_.resize(n);
      for (std::size_t k = 0; k < n; ++k) b12_[k] = model_.Bprim(0, 1, u[k]);
    }
    for (int k1 = 0; k1 < m; ++k1)
      for (int k2 = 0; k2 < m; ++k2) {
        const std::size_t q = idx(k1, k2);
        double lap = (w0_[idx(k1 + 1, k2)] - 2.0 * w0_[q] + w0_[idx(k1 - 1, k2)]) / (dx * dx) +
                     (w1_[idx(k1, k2 + 1)] - 2.0 * w1_[q] + w1_[idx(k1, k2 - 1)]) / (dx * dx);
        if (has_offdiag_)
          lap += 2.0 *
                 (b12_[idx(k1 + 1, k2 + 1)] - b12_[idx(k1 + 1, k2 - 1)] -
                  b12_[idx(k1 - 1, k2 + 1)] + b12_[idx(k1 - 1, k2 - 1)]) /
                 (4.0 * dx * dx);
        unew_[q] = u[q] + dt * lap;
      }
    u.swap(unew_);
  }

 private:
  const FluxModel& model_;
  TorusGrid grid_;
  double cfl_p_;
  double lambda_max_ = 0.0;
  bool has_offdiag_ = false;
  std::vector<double> unew_, w0_, w1_, b12_;
};

// exact kinetic transport: per-band spectral shift, accumulated into one
// inverse transform of the reconstruction
class TransportStepper {
 public:
  TransportStepper(const FluxModel& model, const TorusGrid& grid, const XiGrid& xigrid)
      : model_(model), grid_(grid), xigrid_(xigrid) {
    fc_.resize(static_cast<std::size_t>(xigrid.cells) * model.dim);
    for (int j = 0; j < xigrid.cells; ++j)
      for (int d = 0; d < model.dim; ++d)
        fc_[static_cast<std::size_t>(j) * model.dim + d] = model.f(d, xigrid.cell_center(j));
    const std::size_t n = grid.total_cells();
    bands_.resize(static_cast<std::size_t>(xigrid.cells) * n);
    row_hat_.resize(n);
    acc_.resize(n);
    const int m = grid.cells_per_axis;
    ph_[0].resize(m / 2 + 1);
    ph_[1].resize(m / 2 + 1);
  }

  void transport(std::vector<double>& u, const double dz[2]) {
    if (model_.zero_flux) return;
    bool zero = true;
    for (int d = 0; d < model_.dim; ++d)
      if (dz[d] != 0.0) zero = false;
    if (zero) return;

    const int m = grid_.cells_per_axis;
    const std::size_t n = grid_.total_cells();
    const double dxi = xigrid_.spacing();

    double umin = u[0], umax = u[0];
    for (double x : u) {
      umin = std::min(umin, x);
      umax = std::max(umax, x);
    }
    if (umin < xigrid_.xi_min || umax > xigrid_.xi_max)
      throw std::runtime_error("kinetic transport: state outside the xi window");
    const int jlo = xigrid_.cell_of(std::min(0.0, umin));
    const int jhi = xigrid_.cell_of(std::max(0.0, umax));

    // lift the touched bands
    for (int j = jlo; j <= jhi; ++j)
      std::memset(bands_.data() + static_cast<std::size_t>(j) * n, 0, n * sizeof(double));
    for (std::size_t k = 0; k < n; ++k) {
      const double v = u[k];
      if (v == 0.0) continue;
      const double lo = std::min(0.0, v), hi = std::max(0.0, v);
      const double sign = v > 0.0 ? 1.0 : -1.0;
      const int a = xigrid_.cell_of(lo), b = xigrid_.cell_of(hi);
      for (int j = a; j <= b; ++j) {
        const double overlap =
            std::min(hi, xigrid_.cell_lo(j + 1)) - std::max(lo, xigrid_.cell_lo(j));
        if (overlap > 0.0) bands_[static_cast<std::size_t>(j) * n + k] = sign * overlap / dxi;
      }
    }

    std::fill(acc_.begin(), acc_.end(), std::complex<double>(0.0, 0.0));
    for (int j = jlo; j <= jhi; ++j) {
      const double* band = bands_.data() + static_cast<std::size_t>(j) * n;
      fft::forward(grid_, band, row_hat_.data());
      // per-axis phase tables e^(-2 pi i n s), n = 0..m/2; negatives by conjugation
      for (int d = 0; d < grid_.dim; ++d) {
        const double s = fc_[static_cast<std::size_t>(j) * model_.dim + d] * dz[d];
        const std::complex<double> stepph =
            std::exp(std::complex<double>(0.0, -2.0 * kPi * s));
        ph_[d][0] = {1.0, 0.0};
        for (int q = 1; q <= m / 2; ++q) ph_[d][q] = ph_[d][q - 1] * stepph;
      }
      auto phase_of = [this, m](int d, int i) {
        return i <= m / 2 ? ph_[d][i] : std::conj(ph_[d][m - i]);
      };
      if (grid_.dim == 1) {
        for (int i = 0; i < m; ++i) acc_[i] += dxi * row_hat_[i] * phase_of(0, i);
      } else {
        for (int i1 = 0; i1 < m; ++i1) {
          const std::complex<double> p1 = phase_of(0, i1);
          for (int i2 = 0; i2 < m; ++i2)
            acc_[static_cast<std::size_t>(i1) * m + i2] +=
                dxi * row_hat_[static_cast<std::size_t>(i1) * m + i2] * p1 * phase_of(1, i2);
        }
      }
    }
    fft::inverse(grid_, acc_.data(), u.data());
  }

 private:
  const FluxModel& model_;
  TorusGrid grid_;
  XiGrid xigrid_;
  std::vector<double> fc_;     // f_d at band centers
  std::vector<double> bands_;  // lifted occupancy, band-major
  std::vector<std::complex<double>> row_hat_, acc_;
  std::vector<std::complex<double>> ph_[2];
};

std::vector<double> record_schedule(const SolverConfig& config) {
  std::vector<double> recs;
  if (!config.record_times.empty()) {
    recs = config.record_times;
    std::sort(recs.begin(), recs.end());
  } else {
    if (!(config.record_every > 0.0))
      throw std::invalid_argument("run: record_every must be positive");
    for (double t = config.record_every; t < config.t_end - 1e-12; t += config.record_every)
      recs.push_back(t);
  }
  recs.push_back(config.t_end);
  return recs;
}

}  // namespace

double l1_distance(const TorusField& a, const TorusField& b) {
  if (!(a.grid() == b.grid())) throw std::invalid_argument("l1_distance: grid mismatch");
  const double cell = std::pow(a.grid().spacing(), a.grid().dim);
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += std::abs(a[i] - b[i]);
  return s * cell;
}

TorusField step_reference(const TorusField& u, const RegularizedModel& model,
                          const DrivingPath& path, double t, double dt, double cfl_hyperbolic,
                          double cfl_parabolic) {
  if (!(dt > 0.0)) throw std::invalid_argument("step_reference: dt must be positive");
  double lo = 0.0, hi = 0.0;
  for (std::size_t i = 0; i < u.size(); ++i) {
    lo = std::min(lo, u[i]);
    hi = std::max(hi, u[i]);
  }
  const double pad = 1e-6 + 0.01 * (hi - lo);
  ReferenceStepper stepper(model, u.grid(), lo - pad, hi + pad, cfl_hyperbolic, cfl_parabolic);

  // frozen slope of the piecewise-linear path at time t
  double zdot[2] = {0.0, 0.0};
  {
    const auto& kt = path.knot_times();
    auto it = std::upper_bound(kt.begin(), kt.end(), t);
    std::size_t hi_k = std::min<std::size_t>(std::distance(kt.begin(), it), kt.size() - 1);
    if (hi_k == 0) hi_k = 1;
    const std::size_t lo_k = hi_k - 1;
    const double len = kt[hi_k] - kt[lo_k];
    for (int d = 0; d < path.dim(); ++d)
      zdot[d] = (path.knot_value(hi_k, d) - path.knot_value(lo_k, d)) / len;
  }
  if (dt > stepper.dt_max(zdot) * (1.0 + 1e-9))
    throw std::invalid_argument("step_reference: CFL violation");
  std::vector<double> v(u.values());
  stepper.step(v, zdot, dt);
  for (double x : v)
    if (!std::isfinite(x)) throw std::runtime_error("step_reference: NaN detected");
  return TorusField(u.grid(), std::move(v));
}

TorusField kinetic_transport(const TorusField& u, const FluxModel& model, const XiGrid& xigrid,
                             const std::vector<double>& dz) {
  if (dz.size() != static_cast<std::size_t>(model.dim))
    throw std::invalid_argument("kinetic_transport: dz dimension mismatch");
  for (double d : dz)
    if (!std::isfinite(d)) throw std::invalid_argument("kinetic_transport: non-finite dz");
  TransportStepper stepper(model, u.grid(), xigrid);
  std::vector<double> v(u.values());
  double dzv[2] = {dz[0], model.dim == 2 ? dz[1] : 0.0};
  stepper.transport(v, dzv);
  return TorusField(u.grid(), std::move(v));
}

TorusField step_pathwise(const TorusField& u, const FluxModel& model, const XiGrid& xigrid,
                         const std::vector<double>& dz, double dt, double cfl_parabolic) {
  TorusField after = kinetic_transport(u, model, xigrid, dz);
  if (model.zero_diffusion) return after;
  ParabolicStepper par(model, u.grid(), xigrid.xi_min, xigrid.xi_max, cfl_parabolic);
  if (dt > par.dt_max() * (1.0 + 1e-9))
    throw std::invalid_argument("step_pathwise: parabolic CFL violation");
  std::vector<double> v(after.values());
  par.substep(v, dt);
  return TorusField(u.grid(), std::move(v));
}

Trajectory run(const SolverConfig& config, const DrivingPath& path, const TorusField& u0) {
  if (!(u0.grid() == config.grid)) throw std::invalid_argument("run: u0 grid mismatch");
  if (config.scheme == Scheme::reference && !config.reg)
    throw std::invalid_argument("run: reference scheme needs a RegularizedModel");
  if (config.scheme == Scheme::pathwise && !config.model)
    throw std::invalid_argument("run: pathwise scheme needs a FluxModel");
  if (!(config.t_end > 0.0) || config.t_end > path.horizon() * (1.0 + 1e-12))
    throw std::invalid_argument("run: t_end outside the path horizon");
  const int dim = config.grid.dim;
  const FluxModel& hyper_model =
      config.scheme == Scheme::reference ? *config.reg->base : *config.model;
  if (hyper_model.dim != dim) throw std::invalid_argument("run: model dimension mismatch");

  // event times: record times and path knots
  const std::vector<double> recs = record_schedule(config);
  std::vector<double> events(recs);
  for (double t : path.knot_times())
    if (t > 1e-15 && t < config.t_end - 1e-15) events.push_back(t);
  std::sort(events.begin(), events.end());
  events.erase(std::unique(events.begin(), events.end(),
                           [](double a, double b) { return std::abs(a - b) < 1e-13; }),
               events.end());

  std::vector<double> u(u0.values());
  check_state(u, config.xigrid, 0.0);

  Trajectory traj;
  double q_eps = 0.0, q_diss = 0.0;
  const double base_l1 = lp_norm(u0, 1.0), base_l2 = lp_norm(u0, 2.0);
  const double base_linf = lp_norm(u0, std::numeric_limits<double>::infinity());
  const double base_bv = bv_seminorm(u0);
  const double tol = config.monitor_tol_c * config.grid.spacing();
  bool warned_lp = false, warned_bv = false;

  auto record = [&](double t, const std::vector<double>& state) {
    TorusField snap(config.grid, state);
    MonitorRow row;
    row.t = t;
    row.l1 = lp_norm(snap, 1.0);
    row.l2 = lp_norm(snap, 2.0);
    row.linf = lp_norm(snap, std::numeric_limits<double>::infinity());
    row.bv = bv_seminorm(snap);
    row.mass = snap.mean();
    row.q_eps = q_eps;
    row.q_diss = q_diss;
    if (!warned_lp &&
        (row.l1 > base_l1 + tol || row.l2 > base_l2 + tol || row.linf > base_linf + tol)) {
      traj.warnings.push_back("Lp monitor exceeded ||u0||_p + C dx (C=" +
                              std::to_string(config.monitor_tol_c) + ") at t=" +
                              std::to_string(t));
      warned_lp = true;
    }
    if (!warned_bv && row.bv > base_bv * (1.0 + config.monitor_bv_factor) + 1e-14) {
      traj.warnings.push_back("BV monitor exceeded BV(u0)(1+" +
                              std::to_string(config.monitor_bv_factor) + ") at t=" +
                              std::to_string(t));
      warned_bv = true;
    }
    traj.times.push_back(t);
    traj.monitors.push_back(row);
    traj.snapshots.push_back(std::move(snap));
  };

  record(0.0, u);

  std::unique_ptr<ReferenceStepper> ref;
  std::unique_ptr<TransportStepper> trans;
  std::unique_ptr<ParabolicStepper> par;
  if (config.scheme == Scheme::reference) {
    ref = std::make_unique<ReferenceStepper>(*config.reg, config.grid, config.xigrid.xi_min,
                                             config.xigrid.xi_max, config.cfl_hyperbolic,
                                             config.cfl_parabolic);
  } else {
    trans = std::make_unique<TransportStepper>(*config.model, config.grid, config.xigrid);
    par = std::make_unique<ParabolicStepper>(*config.model, config.grid, config.xigrid.xi_min,
                                             config.xigrid.xi_max, config.cfl_parabolic);
  }

  std::vector<double> diss_scratch;
  std::size_t next_rec = 0;
  double t = 0.0;
  double zprev[2] = {0.0, 0.0}, znext[2] = {0.0, 0.0};
  path.eval(0.0, zprev);

  for (double tb : events) {
    const double len = tb - t;
    if (len <= 1e-15) {
      t = tb;
    } else {
      path.eval(tb, znext);
      if (config.scheme == Scheme::reference) {
        double zdot[2] = {0.0, 0.0};
        for (int d = 0; d < dim; ++d) zdot[d] = (znext[d] - zprev[d]) / len;
        const double dtm = ref->dt_max(zdot);
        const long nsub = std::max(1L, static_cast<long>(std::ceil(len / dtm - 1e-12)));
        const double dt = len / static_cast<double>(nsub);
        if (dt < 1e-14) throw std::runtime_error("run: step-size underflow");
        for (long s = 0; s < nsub; ++s) {
          q_eps += dt * ref->eps() * ref->grad_sq_mass(u);
          if (ref->mollified_has_diffusion())
            q_diss += dt * detail::dissipation_mass_raw(config.grid, u.data(), ref->mollified(),
                                                        0.0, diss_scratch);
          ref->step(u, zdot, dt);
        }
        check_state(u, config.xigrid, tb);
      } else {
        double dz[2] = {0.0, 0.0};
        for (int d = 0; d < dim; ++d) dz[d] = znext[d] - zprev[d];
        if (config.strang_symmetrized) {
          double half[2] = {0.5 * dz[0], 0.5 * dz[1]};
          trans->transport(u, half);
          if (par->active()) {
            const double dtm = par->dt_max();
            const long nsub = std::max(1L, static_cast<long>(std::ceil(len / dtm - 1e-12)));
            const double dt = len / static_cast<double>(nsub);
            if (dt < 1e-14) throw std::runtime_error("run: step-size underflow");
            for (long s = 0; s < nsub; ++s) {
              q_diss += dt * detail::dissipation_mass_raw(config.grid, u.data(), *config.model,
                                                          0.0, diss_scratch);
              par->substep(u, dt);
            }
          }
          trans->transport(u, half);
        } else {
          trans->transport(u, dz);
          if (par->active()) {
            const double dtm = par->dt_max();
            const long nsub = std::max(1L, static_cast<long>(std::ceil(len / dtm - 1e-12)));
            const double dt = len / static_cast<double>(nsub);
            if (dt < 1e-14) throw std::runtime_error("run: step-size underflow");
            for (long s = 0; s < nsub; ++s) {
              q_diss += dt * detail::dissipation_mass_raw(config.grid, u.data(), *config.model,
                                                          0.0, diss_scratch);
              par->substep(u, dt);
            }
          }
        }
        check_state(u, config.xigrid, tb);
      }
      t = tb;
      zprev[0] = znext[0];
      zprev[1] = znext[1];
    }
    if (next_rec < recs.size() && std::abs(t - recs[next_rec]) < 1e-12) {
      record(t, u);
      ++next_rec;
    }
  }
  return traj;
}

std::pair<double, double> l1_contraction_check(const SolverConfig& config,
                                               const DrivingPath& path, const TorusField& u0_a,
                                               const TorusField& u0_b) {
  Trajectory ta = run(config, path, u0_a);
  Trajectory tb = run(config, path, u0_b);
  return {l1_distance(ta.snapshots.back(), tb.snapshots.back()), l1_distance(u0_a, u0_b)};
}

}  // namespace spdelab
