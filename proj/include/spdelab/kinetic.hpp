#pragma once

#include <vector>

#include "spdelab/model.hpp"
#include "spdelab/torus_field.hpp"

namespace spdelab {

// Velocity grid for the kinetic variable xi. Zero must be a cell boundary
// (the kinetic function changes sign there).
struct XiGrid {
  double xi_min = -1.0;
  double xi_max = 1.0;
  int cells = 2;

  double spacing() const { return (xi_max - xi_min) / cells; }
  double cell_lo(int j) const { return xi_min + j * spacing(); }
  double cell_center(int j) const { return xi_min + (j + 0.5) * spacing(); }
  int cell_of(double xi) const;

  static XiGrid make(double xi_min, double xi_max, int cells);
  static XiGrid symmetric(double halfwidth, int cells);  // cells rounded up to even
};

// kinetic function: +1 if 0 <= xi <= u, -1 if u <= xi <= 0, else 0
int chi(double u, double xi);

// Per-cell averages of chi(u(x), .) over xi cells: signed fractional occupancy
// in [-1,1], band-major layout. reconstruct(lift(u)) == u exactly.
class KineticDensity {
 public:
  KineticDensity(XiGrid xigrid, TorusGrid grid)
      : xigrid_(xigrid), grid_(grid),
        bands_(static_cast<std::size_t>(xigrid.cells) * grid.total_cells(), 0.0) {}

  const XiGrid& xigrid() const { return xigrid_; }
  const TorusGrid& grid() const { return grid_; }
  double* band(int j) { return bands_.data() + static_cast<std::size_t>(j) * grid_.total_cells(); }
  const double* band(int j) const {
    return bands_.data() + static_cast<std::size_t>(j) * grid_.total_cells();
  }

 private:
  XiGrid xigrid_;
  TorusGrid grid_;
  std::vector<double> bands_;
};

KineticDensity lift(const TorusField& field, const XiGrid& xigrid);
TorusField reconstruct(const KineticDensity& density);

// integral of |u|^p sum_k (sum_i D_i beta_ik(u))^2 with centered differences;
// the delta(xi - u) weight is evaluated by composition at xi = u(x)
double dissipation_mass(const TorusField& field, const FluxModel& model, double weight_p);

struct KineticBalance {
  double p = 0.0;
  double lhs_initial = 0.0;    // ||u0||_{p+2}^{p+2}
  double lhs_final = 0.0;      // ||u(t)||_{p+2}^{p+2}
  double weighted_q_mass = 0.0;  // (p+2)(p+1) * accumulated_q
  double n_mass_direct = 0.0;
  double residual = 0.0;       // lhs_initial - lhs_final - weighted_q_mass
};

// accumulated_q is the |xi|^p-weighted total kinetic-measure mass supplied by
// the caller (for the reference solver: eps |Du|^2 mass plus dissipation mass)
KineticBalance entropy_balance(const TorusField& u0, const TorusField& uT, double accumulated_q,
                               double p, double n_mass_direct = 0.0);

struct MollificationError {
  double lhs = 0.0;          // || chi * rho_eps - chi(. - f(xi) z) ||_L1
  double bound = 0.0;        // eps BV(u)
  double shift_lhs = 0.0;    // || chi(. - f(xi) z) - chi ||_L1
  double shift_bound = 0.0;  // max|f(u)| |z| BV(u)
};

// mollification-along-characteristics error and the pure shift error, with
// their BV bounds; eps must resolve at least two cells
MollificationError mollification_error(const TorusField& field, const FluxModel& model,
                                       const std::vector<double>& path_value, double eps,
                                       const XiGrid& xigrid);

namespace detail {
// dissipation_mass on a raw value buffer; scratch is resized as needed
double dissipation_mass_raw(const TorusGrid& grid, const double* values, const FluxModel& model,
                            double weight_p, std::vector<double>& scratch);
}  // namespace detail

}  // namespace spdelab
