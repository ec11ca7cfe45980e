#include "spdelab/kinetic.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace spdelab {

namespace {

double bump_val(double r) {
  if (std::abs(r) >= 1.0) return 0.0;
  return std::exp(-1.0 / (1.0 - r * r));
}

// exact L1 distance between a cellwise-constant periodic field and its shift
double shifted_l1_distance(const TorusGrid& g, const double* v, const double s_in[2]) {
  const int m = g.cells_per_axis;
  const double dx = g.spacing();
  double s[2] = {0.0, 0.0};
  long cells[2] = {0, 0};
  double frac[2] = {0.0, 0.0};
  for (int d = 0; d < g.dim; ++d) {
    s[d] = s_in[d] - std::floor(s_in[d]);
    const double t = s[d] / dx;
    cells[d] = static_cast<long>(std::floor(t));
    frac[d] = (t - static_cast<double>(cells[d])) * dx;  // in [0, dx)
    cells[d] %= m;
  }
  auto wrap = [m](long k) { return static_cast<std::size_t>(((k % m) + m) % m); };
  double acc = 0.0;
  if (g.dim == 1) {
    for (int k = 0; k < m; ++k) {
      const double a = v[k];
      acc += (dx - frac[0]) * std::abs(a - v[wrap(k - cells[0])]);
      acc += frac[0] * std::abs(a - v[wrap(k - cells[0] - 1)]);
    }
    return acc;
  }
  for (int k1 = 0; k1 < m; ++k1)
    for (int k2 = 0; k2 < m; ++k2) {
      const double a = v[static_cast<std::size_t>(k1) * m + k2];
      for (int d1 = 0; d1 <= 1; ++d1)
        for (int d2 = 0; d2 <= 1; ++d2) {
          const double w1 = d1 ? frac[0] : dx - frac[0];
          const double w2 = d2 ? frac[1] : dx - frac[1];
          if (w1 == 0.0 || w2 == 0.0) continue;
          const double b = v[wrap(k1 - cells[0] - d1) * m + wrap(k2 - cells[1] - d2)];
          acc += w1 * w2 * std::abs(a - b);
        }
    }
  return acc;
}

}  // namespace

int XiGrid::cell_of(double xi) const {
  const int j = static_cast<int>(std::floor((xi - xi_min) / spacing()));
  return std::clamp(j, 0, cells - 1);
}

XiGrid XiGrid::make(double xi_min, double xi_max, int cells) {
  if (!(xi_min < 0.0 && 0.0 < xi_max)) throw std::invalid_argument("XiGrid: need xi_min < 0 < xi_max");
  if (cells < 2) throw std::invalid_argument("XiGrid: need >= 2 cells");
  const double d = (xi_max - xi_min) / cells;
  const double t = -xi_min / d;
  if (std::abs(t - std::round(t)) > 1e-9)
    throw std::invalid_argument("XiGrid: 0 must be a cell boundary");
  return XiGrid{xi_min, xi_max, cells};
}

XiGrid XiGrid::symmetric(double halfwidth, int cells) {
  if (!(halfwidth > 0.0)) throw std::invalid_argument("XiGrid: halfwidth > 0");
  if (cells % 2 != 0) ++cells;
  return make(-halfwidth, halfwidth, cells);
}

int chi(double u, double xi) {
  if (u > 0.0 && 0.0 <= xi && xi <= u) return 1;
  if (u < 0.0 && u <= xi && xi <= 0.0) return -1;
  return 0;
}

KineticDensity lift(const TorusField& field, const XiGrid& xigrid) {
  const TorusGrid& g = field.grid();
  KineticDensity d(xigrid, g);
  const double dxi = xigrid.spacing();
  const std::size_t n = g.total_cells();
  for (std::size_t k = 0; k < n; ++k) {
    const double u = field[k];
    if (u < xigrid.xi_min || u > xigrid.xi_max)
      throw std::invalid_argument("lift: field value outside the xi window");
    if (u == 0.0) continue;
    const double lo = std::min(0.0, u), hi = std::max(0.0, u);
    const double sign = u > 0.0 ? 1.0 : -1.0;
    const int jlo = xigrid.cell_of(lo), jhi = xigrid.cell_of(hi);
    for (int j = jlo; j <= jhi; ++j) {
      const double overlap =
          std::min(hi, xigrid.cell_lo(j + 1)) - std::max(lo, xigrid.cell_lo(j));
      if (overlap > 0.0) d.band(j)[k] = sign * overlap / dxi;
    }
  }
  return d;
}

TorusField reconstruct(const KineticDensity& density) {
  const std::size_t n = density.grid().total_cells();
  const double dxi = density.xigrid().spacing();
  std::vector<double> v(n, 0.0);
  for (int j = 0; j < density.xigrid().cells; ++j) {
    const double* b = density.band(j);
    for (std::size_t k = 0; k < n; ++k) v[k] += b[k];
  }
  for (double& x : v) x *= dxi;
  return TorusField(density.grid(), std::move(v));
}

namespace detail {

double dissipation_mass_raw(const TorusGrid& g, const double* values, const FluxModel& model,
                            double weight_p, std::vector<double>& scratch) {
  if (model.zero_diffusion) return 0.0;
  const int m = g.cells_per_axis;
  const double dx = g.spacing();
  const double cell = std::pow(dx, g.dim);
  const std::size_t n = g.total_cells();

  // composed primitives beta_ik(u(.)) per (i,k), packed into scratch
  const std::size_t pairs = static_cast<std::size_t>(g.dim) * g.dim;
  scratch.resize(pairs * n);
  for (int i = 0; i < g.dim; ++i)
    for (int k = 0; k < g.dim; ++k) {
      double* c = scratch.data() + (static_cast<std::size_t>(i) * g.dim + k) * n;
      for (std::size_t q = 0; q < n; ++q) c[q] = model.beta(i, k, values[q]);
    }

  double mass = 0.0;
  for (std::size_t q = 0; q < n; ++q) {
    double sum_k = 0.0;
    for (int k = 0; k < g.dim; ++k) {
      double div = 0.0;
      for (int i = 0; i < g.dim; ++i) {
        const double* c = scratch.data() + (static_cast<std::size_t>(i) * g.dim + k) * n;
        std::size_t fwd, bwd;
        if (g.dim == 1) {
          fwd = (q + 1) % m;
          bwd = (q + m - 1) % m;
        } else {
          const int k1 = static_cast<int>(q) / m, k2 = static_cast<int>(q) % m;
          if (i == 0) {
            fwd = static_cast<std::size_t>((k1 + 1) % m) * m + k2;
            bwd = static_cast<std::size_t>((k1 + m - 1) % m) * m + k2;
          } else {
            fwd = static_cast<std::size_t>(k1) * m + (k2 + 1) % m;
            bwd = static_cast<std::size_t>(k1) * m + (k2 + m - 1) % m;
          }
        }
        div += (c[fwd] - c[bwd]) / (2.0 * dx);
      }
      sum_k += div * div;
    }
    const double w = (weight_p == 0.0) ? 1.0 : std::pow(std::abs(values[q]), weight_p);
    mass += w * sum_k;
  }
  return mass * cell;
}

}  // namespace detail

double dissipation_mass(const TorusField& field, const FluxModel& model, double weight_p) {
  if (!(weight_p > -1.0)) throw std::invalid_argument("dissipation_mass: p > -1 required");
  std::vector<double> scratch;
  return detail::dissipation_mass_raw(field.grid(), field.values().data(), model, weight_p,
                                      scratch);
}

KineticBalance entropy_balance(const TorusField& u0, const TorusField& uT, double accumulated_q,
                               double p, double n_mass_direct) {
  if (!(p > -1.0)) throw std::invalid_argument("entropy_balance: p > -1 required");
  KineticBalance b;
  b.p = p;
  b.lhs_initial = std::pow(lp_norm(u0, p + 2.0), p + 2.0);
  b.lhs_final = std::pow(lp_norm(uT, p + 2.0), p + 2.0);
  b.weighted_q_mass = (p + 2.0) * (p + 1.0) * accumulated_q;
  b.n_mass_direct = n_mass_direct;
  b.residual = b.lhs_initial - b.lhs_final - b.weighted_q_mass;
  return b;
}

MollificationError mollification_error(const TorusField& field, const FluxModel& model,
                                       const std::vector<double>& path_value, double eps,
                                       const XiGrid& xigrid) {
  const TorusGrid& g = field.grid();
  const double dx = g.spacing();
  if (!(eps >= 2.0 * dx))
    throw std::invalid_argument("mollification_error: eps below 2 dx is unresolvable");
  if (path_value.size() != static_cast<std::size_t>(g.dim))
    throw std::invalid_argument("mollification_error: path value dimension mismatch");

  const KineticDensity dens = lift(field, xigrid);
  const double dxi = xigrid.spacing();
  const int m = g.cells_per_axis;
  const std::size_t n = g.total_cells();

  // radial bump kernel on lattice offsets |t dx| <= eps, unit mass
  const int taps = static_cast<int>(std::floor(eps / dx));
  std::vector<double> w1d;
  std::vector<std::vector<double>> w2d;
  if (g.dim == 1) {
    w1d.resize(2 * taps + 1);
    double tot = 0.0;
    for (int t = -taps; t <= taps; ++t) tot += (w1d[t + taps] = bump_val(t * dx / eps));
    for (double& w : w1d) w /= tot;
  } else {
    w2d.assign(2 * taps + 1, std::vector<double>(2 * taps + 1, 0.0));
    double tot = 0.0;
    for (int t1 = -taps; t1 <= taps; ++t1)
      for (int t2 = -taps; t2 <= taps; ++t2)
        tot += (w2d[t1 + taps][t2 + taps] = bump_val(std::hypot(t1 * dx, t2 * dx) / eps));
    for (auto& row : w2d)
      for (double& w : row) w /= tot;
  }

  MollificationError out;
  const double cell = std::pow(dx, g.dim);
  std::vector<double> mollified(n);
  for (int j = 0; j < xigrid.cells; ++j) {
    const double* b = dens.band(j);
    // lattice-kernel mollification commutes with the characteristic shift, so
    // the L1 error is computed against the unshifted band
    if (g.dim == 1) {
      for (int k = 0; k < m; ++k) {
        double acc = 0.0;
        for (int t = -taps; t <= taps; ++t) acc += w1d[t + taps] * b[((k - t) % m + m) % m];
        mollified[k] = acc;
      }
    } else {
      for (int k1 = 0; k1 < m; ++k1)
        for (int k2 = 0; k2 < m; ++k2) {
          double acc = 0.0;
          for (int t1 = -taps; t1 <= taps; ++t1)
            for (int t2 = -taps; t2 <= taps; ++t2)
              acc += w2d[t1 + taps][t2 + taps] *
                     b[static_cast<std::size_t>(((k1 - t1) % m + m) % m) * m +
                       ((k2 - t2) % m + m) % m];
          mollified[static_cast<std::size_t>(k1) * m + k2] = acc;
        }
    }
    double l1 = 0.0;
    for (std::size_t k = 0; k < n; ++k) l1 += std::abs(mollified[k] - b[k]);
    out.lhs += l1 * cell * dxi;

    // shift along the characteristic by f(xi) z, exact for cellwise fields
    double shift[2] = {0.0, 0.0};
    bool nonzero = false;
    for (int d = 0; d < g.dim; ++d) {
      shift[d] = model.f(d, xigrid.cell_center(j)) * path_value[d];
      if (shift[d] != 0.0) nonzero = true;
    }
    if (nonzero) out.shift_lhs += shifted_l1_distance(g, b, shift) * dxi;
  }

  const double bv = bv_seminorm(field);
  out.bound = eps * bv;
  double fmax = 0.0, znorm = 0.0;
  for (std::size_t k = 0; k < n; ++k) {
    double f2 = 0.0;
    for (int d = 0; d < g.dim; ++d) {
      const double fd = model.f(d, field[k]);
      f2 += fd * fd;
    }
    fmax = std::max(fmax, std::sqrt(f2));
  }
  for (int d = 0; d < g.dim; ++d) znorm += path_value[d] * path_value[d];
  out.shift_bound = fmax * std::sqrt(znorm) * bv;
  return out;
}

}  // namespace spdelab
