#pragma once

#include <memory>
#include <string>
#include <utility>
#include <vector>

#include "spdelab/kinetic.hpp"
#include "spdelab/model.hpp"
#include "spdelab/paths.hpp"
#include "spdelab/torus_field.hpp"

namespace spdelab {

enum class Scheme { reference, pathwise };

struct SolverConfig {
  Scheme scheme = Scheme::pathwise;
  TorusGrid grid;
  XiGrid xigrid;
  std::shared_ptr<const FluxModel> model;       // pathwise scheme
  std::shared_ptr<const RegularizedModel> reg;  // reference scheme
  double cfl_hyperbolic = 0.45;
  double cfl_parabolic = 0.45;
  double t_end = 1.0;
  double record_every = 0.1;
  std::vector<double> record_times;  // optional explicit schedule (overrides record_every)
  bool strang_symmetrized = false;
  double monitor_tol_c = 4.0;       // Lp warning threshold ||u0||_p + C dx
  double monitor_bv_factor = 0.02;  // BV warning threshold BV(u0) (1 + factor)
};

struct MonitorRow {
  double t = 0.0;
  double l1 = 0.0, l2 = 0.0, linf = 0.0, bv = 0.0, mass = 0.0;
  double q_eps = 0.0;   // accumulated eps |Du|^2 mass
  double q_diss = 0.0;  // accumulated parabolic dissipation mass
};

struct Trajectory {
  std::vector<double> times;
  std::vector<TorusField> snapshots;
  std::vector<MonitorRow> monitors;
  std::vector<std::string> warnings;

  double q_eps_total() const { return monitors.empty() ? 0.0 : monitors.back().q_eps; }
  double q_diss_total() const { return monitors.empty() ? 0.0 : monitors.back().q_diss; }
};

// One explicit conservative step of the viscous approximation: Engquist-Osher
// fluxes per axis with the slope of `path` frozen at time t, second differences
// of the regularized primitives for the parabolic part. dt must satisfy both
// CFL constraints.
TorusField step_reference(const TorusField& u, const RegularizedModel& model,
                          const DrivingPath& path, double t, double dt,
                          double cfl_hyperbolic = 0.45, double cfl_parabolic = 0.45);

// Exact kinetic transport: lift to the xi grid, shift every band by
// (f^1(xi) dz^1, ..., f^N(xi) dz^N) spectrally, reconstruct. No CFL restriction.
TorusField kinetic_transport(const TorusField& u, const FluxModel& model, const XiGrid& xigrid,
                             const std::vector<double>& dz);

// transport then one conservative degenerate-diffusion substep (no eps floor)
TorusField step_pathwise(const TorusField& u, const FluxModel& model, const XiGrid& xigrid,
                         const std::vector<double>& dz, double dt, double cfl_parabolic = 0.45);

Trajectory run(const SolverConfig& config, const DrivingPath& path, const TorusField& u0);

// (lhs, rhs) = (||u_a(T) - u_b(T)||_1, ||u0_a - u0_b||_1) under the same path
std::pair<double, double> l1_contraction_check(const SolverConfig& config,
                                               const DrivingPath& path, const TorusField& u0_a,
                                               const TorusField& u0_b);

double l1_distance(const TorusField& a, const TorusField& b);

}  // namespace spdelab
