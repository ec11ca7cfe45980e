#include "spdelab/experiments.hpp"

#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <mutex>
#include <numbers>
#include <thread>

#include "spdelab/averaging.hpp"
#include "spdelab/kinetic.hpp"
#include "spdelab/model.hpp"
#include "spdelab/paths.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

namespace {

constexpr double kPi = std::numbers::pi;
constexpr double kInf = std::numeric_limits<double>::infinity();

// ---- config schema ---------------------------------------------------------

const std::set<std::string> kCommonKeys = {
    "experiment",       "master_seed",        "mc_paths",
    "workers",          "output_dir",         "model.kind",
    "model.m",          "model.eps",          "model.mollifier_width",
    "model.p1",         "model.p2",           "model.with_flux",
    "grid.dim",         "grid.cells",         "grid.xi_cells",
    "grid.xi_pad",      "u0.kind",            "u0.amplitude",
    "u0.mean",          "solver.scheme",      "solver.cfl_hyperbolic",
    "solver.cfl_parabolic", "solver.t_end",   "solver.record_every",
    "solver.strang",    "solver.monitor_tol_c"};

std::set<std::string> with_keys(std::initializer_list<std::string> extra) {
  std::set<std::string> s = kCommonKeys;
  s.insert({"path.kind", "path.knots_per_unit"});
  for (const auto& k : extra) s.insert(k);
  return s;
}

const std::set<std::string> kThetaKeys = {"theta.sigma_samples", "theta.z_samples",
                                          "theta.eps_min",       "theta.eps_max",
                                          "theta.eps_points",    "theta.window_halfwidth",
                                          "theta.zbox_halfwidth"};

// ---- shared construction ----------------------------------------------------

struct Setup {
  std::shared_ptr<const FluxModel> model;
  std::shared_ptr<const RegularizedModel> reg;
  TorusGrid grid;
  XiGrid xigrid;
  int workers = 1;
  std::uint64_t master_seed = 0;
  int mc_paths = 1;
};

std::shared_ptr<const FluxModel> build_model(const Config& c) {
  const std::string kind = c.get_string("model.kind", "burgers");
  const int dim = static_cast<int>(c.get_int("grid.dim", 1));
  if (kind == "burgers") return std::make_shared<FluxModel>(make_burgers(dim));
  if (kind == "porous") {
    std::shared_ptr<const FluxModel> flux;
    if (c.get_string("model.with_flux", "none") == "burgers")
      flux = std::make_shared<FluxModel>(make_burgers(dim));
    return std::make_shared<FluxModel>(
        make_porous_medium(c.get_double("model.m", 2.0), dim, flux));
  }
  if (kind == "power") {
    std::vector<double> exps{c.get_double("model.p1", 2.0)};
    if (dim == 2) exps.push_back(c.get_double("model.p2", 2.0));
    return std::make_shared<FluxModel>(make_power_flux(exps));
  }
  if (kind == "linear") {
    // linear flux F(u) = u per axis; degenerate test case for the estimator
    ModelSpec spec;
    spec.dim = dim;
    spec.name = "linear";
    spec.F = [](int, double xi) { return xi; };
    spec.f = [](int, double) { return 1.0; };
    return std::make_shared<FluxModel>(make_custom(spec));
  }
  throw std::invalid_argument("config: unknown model.kind '" + kind + "'");
}

TorusField build_u0(const Config& c, const TorusGrid& grid) {
  const std::string kind = c.get_string("u0.kind", "sin");
  const double amp = c.get_double("u0.amplitude", 0.5);
  const double mean = c.get_double("u0.mean", 0.0);
  if (kind == "const") {
    return TorusField(grid, std::vector<double>(grid.total_cells(), mean));
  }
  if (kind == "sin") {
    if (grid.dim == 1)
      return TorusField::from_function(
          grid, [=](double x) { return mean + amp * std::sin(2.0 * kPi * x); });
    return TorusField::from_function(grid, [=](double x, double y) {
      return mean + amp * std::sin(2.0 * kPi * x) * std::sin(2.0 * kPi * y);
    });
  }
  if (kind == "step") {
    if (grid.dim == 1)
      return TorusField::from_function(
          grid, [=](double x) { return mean + (x < 0.5 ? 0.5 : -0.5) * amp; });
    return TorusField::from_function(grid, [=](double x, double y) {
      return mean + ((x < 0.5) == (y < 0.5) ? 0.5 : -0.5) * amp;
    });
  }
  if (kind == "bump") {
    auto bump = [](double r) { return std::abs(r) < 1.0 ? std::exp(1.0 - 1.0 / (1.0 - r * r)) : 0.0; };
    TorusField raw =
        grid.dim == 1
            ? TorusField::from_function(grid, [=](double x) { return amp * bump((x - 0.5) / 0.3); })
            : TorusField::from_function(grid, [=](double x, double y) {
                return amp * bump(std::hypot(x - 0.5, y - 0.5) / 0.3);
              });
    std::vector<double> v(raw.values());
    const double m0 = raw.mean();
    for (double& x : v) x += mean - m0;
    return TorusField(grid, std::move(v));
  }
  throw std::invalid_argument("config: unknown u0.kind '" + kind + "'");
}

Setup build_setup(const Config& c) {
  Setup s;
  s.model = build_model(c);
  s.grid = TorusGrid::make(static_cast<int>(c.get_int("grid.dim", 1)),
                           static_cast<int>(c.get_int("grid.cells", 256)));
  const TorusField u0 = build_u0(c, s.grid);
  const double umax = lp_norm(u0, kInf);
  const double pad = c.get_double("grid.xi_pad", 0.5);
  int xi_cells = static_cast<int>(c.get_int("grid.xi_cells", s.grid.cells_per_axis));
  s.xigrid = XiGrid::symmetric(umax + pad, xi_cells);
  if (c.get_string("solver.scheme", "pathwise") == "reference" ||
      c.get_string("experiment", "") == "stability" ||
      c.get_string("experiment", "") == "wongzakai") {
    s.reg = std::make_shared<RegularizedModel>(regularize(
        *s.model, c.get_double("model.eps", 1e-3), c.get_double("model.mollifier_width", 1e-3)));
  }
  s.workers = static_cast<int>(c.get_int("workers", 0));
  if (s.workers <= 0)
    s.workers = std::max(1u, std::thread::hardware_concurrency());
  s.master_seed = c.get_seed("master_seed", 20240801ULL);
  s.mc_paths = static_cast<int>(c.get_int("mc_paths", 1));
  return s;
}

SolverConfig solver_config(const Config& c, const Setup& s, Scheme scheme) {
  SolverConfig sc;
  sc.scheme = scheme;
  sc.grid = s.grid;
  sc.xigrid = s.xigrid;
  sc.model = s.model;
  sc.reg = s.reg;
  sc.cfl_hyperbolic = c.get_double("solver.cfl_hyperbolic", 0.45);
  sc.cfl_parabolic = c.get_double("solver.cfl_parabolic", 0.45);
  sc.t_end = c.get_double("solver.t_end", 1.0);
  sc.record_every = c.get_double("solver.record_every", sc.t_end);
  sc.strang_symmetrized = c.get_bool("solver.strang", false);
  sc.monitor_tol_c = c.get_double("solver.monitor_tol_c", 4.0);
  return sc;
}

DrivingPath build_path(const Config& c, const Setup& s, int path_index, double horizon) {
  const std::string kind = c.get_string("path.kind", "brownian");
  if (kind == "deterministic") return make_linear_path(s.grid.dim, horizon, 1.0);
  if (kind == "brownian") {
    const int kpu = static_cast<int>(c.get_int("path.knots_per_unit", 16384));
    return sample_brownian(s.grid.dim, horizon, kpu, derive_seed(s.master_seed, path_index));
  }
  throw std::invalid_argument("config: unknown path.kind '" + kind + "'");
}

void parallel_for(int n, int workers, const std::function<void(int)>& fn) {
  if (workers <= 1 || n <= 1) {
    for (int i = 0; i < n; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr first_error;
  std::mutex err_mu;
  std::vector<std::thread> pool;
  const int nw = std::min(workers, n);
  pool.reserve(nw);
  for (int w = 0; w < nw; ++w)
    pool.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= n) return;
        try {
          fn(i);
        } catch (...) {
          std::scoped_lock lock(err_mu);
          if (!first_error) first_error = std::current_exception();
          return;
        }
      }
    });
  for (auto& t : pool) t.join();
  if (first_error) std::rethrow_exception(first_error);
}

std::string run_dir(const Config& c) {
  const std::string base = resolve_output_dir(c);
  const std::string dir = base + "/" + c.hash();
  std::filesystem::create_directories(dir);
  return dir;
}

RunRecord make_record(const Config& c, const char* experiment) {
  RunRecord r;
  r.experiment = experiment;
  r.config_hash = c.hash();
  r.seed = c.get_seed("master_seed", 20240801ULL);
  return r;
}

// run the experiment body, catching failures into the record
template <class Body>
RunRecord guarded(const Config& c, const char* name, Body body) {
  RunRecord rec = make_record(c, name);
  const auto t0 = std::chrono::steady_clock::now();
  try {
    body(rec);
  } catch (const std::exception& e) {
    rec.status = "fail";
    rec.payload["error"] = e.what();
  }
  rec.wall_time_sec =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  append_jsonl(rec, resolve_output_dir(c));
  return rec;
}

ThetaEstimate run_theta(const Config& c, const FluxModel& model) {
  const int sigma_samples = static_cast<int>(c.get_int("theta.sigma_samples", 16));
  const int z_samples = static_cast<int>(c.get_int("theta.z_samples", 81));
  const double halfwidth = c.get_double("theta.window_halfwidth", 2.0);
  const double eps_min = c.get_double("theta.eps_min", 1e-4);
  const double eps_max = c.get_double("theta.eps_max", 1e-1);
  const int eps_points = static_cast<int>(c.get_int("theta.eps_points", 7));
  std::vector<double> ladder(eps_points);
  for (int i = 0; i < eps_points; ++i)
    ladder[i] = eps_min * std::pow(eps_max / eps_min, static_cast<double>(i) / (eps_points - 1));
  const double zbox = c.get_double("theta.zbox_halfwidth", -1.0);
  return estimate_theta(model, sigma_samples, z_samples, ladder, -halfwidth, halfwidth, zbox);
}

nlohmann::ordered_json theta_json(const ThetaEstimate& est) {
  nlohmann::ordered_json j;
  j["theta_hat"] = est.theta_hat;
  j["constant_hat"] = est.constant_hat;
  j["fit_r2"] = est.fit_r2;
  j["clamped"] = est.clamped;
  j["eps_ladder"] = est.eps_ladder;
  j["zbox_halfwidth"] = est.zbox_halfwidth;
  j["zbox_is_default"] = est.zbox_is_default;
  return j;
}

double fractional_norm(const TorusField& u, double p) { return std::pow(lp_norm(u, p), p); }

}  // namespace

std::string resolve_output_dir(const Config& c) {
  if (const char* env = std::getenv("SPDELAB_OUT"); env && *env) return env;
  return c.get_string("output_dir", "out");
}

void write_monitors_csv(const Trajectory& traj, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_monitors_csv: cannot open " + path);
  out.precision(17);
  out << "t,l1,l2,linf,bv,mass,q_eps,q_diss\n";
  for (const auto& m : traj.monitors)
    out << m.t << "," << m.l1 << "," << m.l2 << "," << m.linf << "," << m.bv << "," << m.mass
        << "," << m.q_eps << "," << m.q_diss << "\n";
}

void write_snapshot_csv(const TorusField& field, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("write_snapshot_csv: cannot open " + path);
  out.precision(17);
  const int m = field.grid().cells_per_axis;
  if (field.grid().dim == 1) {
    out << "i,u\n";
    for (int i = 0; i < m; ++i) out << i << "," << field[i] << "\n";
  } else {
    out << "i,j,u\n";
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j)
        out << i << "," << j << "," << field[static_cast<std::size_t>(i) * m + j] << "\n";
  }
}

RunRecord exp_simulate(const Config& c) {
  c.validate_keys(with_keys({"simulate.dump_snapshots"}));
  return guarded(c, "simulate", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    const Scheme scheme = c.get_string("solver.scheme", "pathwise") == "reference"
                              ? Scheme::reference
                              : Scheme::pathwise;
    if (scheme == Scheme::reference && !s.reg)
      s.reg = std::make_shared<RegularizedModel>(
          regularize(*s.model, c.get_double("model.eps", 1e-3),
                     c.get_double("model.mollifier_width", 1e-3)));
    SolverConfig sc = solver_config(c, s, scheme);
    const TorusField u0 = build_u0(c, s.grid);
    const DrivingPath path = build_path(c, s, 0, sc.t_end);
    const Trajectory traj = run(sc, path, u0);

    const std::string dir = run_dir(c);
    write_monitors_csv(traj, dir + "/monitors.csv");
    if (c.get_bool("simulate.dump_snapshots", false)) {
      for (std::size_t k = 0; k < traj.snapshots.size(); ++k)
        write_snapshot_csv(traj.snapshots[k], dir + "/snapshot_" + std::to_string(k) + ".csv");
    }

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    for (const auto& m : traj.monitors)
      rows.push_back({{"t", m.t}, {"l1", m.l1}, {"l2", m.l2}, {"linf", m.linf}, {"bv", m.bv},
                      {"mass", m.mass}, {"q_eps", m.q_eps}, {"q_diss", m.q_diss}});
    rec.payload["monitor_rows"] = rows;
    rec.payload["warnings"] = traj.warnings;
    rec.payload["final_l1"] = traj.monitors.back().l1;
  });
}

RunRecord exp_theta(const Config& c) {
  auto keys = with_keys({});
  keys.insert(kThetaKeys.begin(), kThetaKeys.end());
  c.validate_keys(keys);
  return guarded(c, "theta", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    try {
      const ThetaEstimate est = run_theta(c, *s.model);
      rec.payload["theta"] = theta_json(est);
    } catch (const ThetaDegenerateError& e) {
      rec.status = "fail";
      rec.payload["error_kind"] = "degenerate";
      rec.payload["error"] = e.what();
    } catch (const ThetaWindowError& e) {
      rec.status = "fail";
      rec.payload["error_kind"] = "window_miss";
      rec.payload["error"] = e.what();
    }
  });
}

RunRecord exp_lemmas(const Config& c) {
  c.validate_keys(with_keys({"lemmas.quad_resolution"}));
  return guarded(c, "lemmas", [&](RunRecord& rec) {
    const int res = static_cast<int>(c.get_int("lemmas.quad_resolution", 2001));
    nlohmann::ordered_json cases = nlohmann::ordered_json::array();
    bool all_ok = true;

    // phi-function families: (a, b, f, iota) with scanned deltas
    struct Family {
      const char* name;
      std::function<double(double)> a, b, f, iota;
      double xi_lo, xi_hi;
      std::vector<double> deltas;
    };
    const std::vector<Family> families = {
        {"indicator_a0",
         [](double) { return 0.0; },
         [](double xi) { return xi; },
         [](double) { return 1.0; },
         [](double e) { return 2.0 * std::sqrt(e); },
         0.0, 1.0, {0.1, 1.0, 10.0}},
        {"burgers_diffusion_gaussian",
         [](double xi) { return xi * xi; },
         [](double xi) { return xi; },
         [](double xi) { return std::exp(-xi * xi); },
         [](double e) { return 2.0 * std::sqrt(e); },
         -8.0, 8.0, {0.1, 1.0, 10.0}},
        {"zero_f",
         [](double) { return 0.0; },
         [](double xi) { return xi; },
         [](double) { return 0.0; },
         [](double e) { return 2.0 * std::sqrt(e); },
         0.0, 1.0, {1.0}},
    };
    for (const auto& fam : families) {
      for (double delta : fam.deltas) {
        const double w_window = std::sqrt(std::max(1.0, delta) * 12.0);
        const PhiLemmaResult r = phi_lemma_check(fam.a, fam.b, fam.f, delta, fam.iota, w_window,
                                                 res, fam.xi_lo, fam.xi_hi);
        const bool ok = r.lhs <= r.rhs * 1.001;
        all_ok = all_ok && ok;
        cases.push_back({{"case", fam.name}, {"delta", delta}, {"lhs", r.lhs}, {"rhs", r.rhs},
                         {"ok", ok}});
      }
    }

    // fractional-heat multiplier bound on a 5x5 ladder
    const std::vector<double> gammas = {1e-3, 1e-2, 1e-1, 1.0, 10.0};
    const std::vector<double> ts = {1e-2, 1e-1, 1.0, 10.0, 100.0};
    const std::vector<std::pair<double, double>> ab = {{0.5, 1.0}, {1.0, 1.0}, {1.0, 2.0}};
    for (const auto& [alpha, beta] : ab) {
      const FracHeatResult r = frac_heat_bound_check(alpha, beta, gammas, ts, 2000);
      const bool ok = r.violations == 0;
      all_ok = all_ok && ok;
      cases.push_back({{"case", "frac_heat"}, {"alpha", alpha}, {"beta", beta},
                       {"fitted_C", r.fitted_c}, {"violations", r.violations}, {"ok", ok}});
    }
    rec.payload["cases"] = cases;
    if (!all_ok) rec.status = "fail";
  });
}

namespace {

// shared runs for the stability and Wong-Zakai experiments
struct StabilityCampaign {
  std::vector<int> levels;
  std::vector<std::vector<double>> dist;    // [path][level] sup |z - z^(l)|
  std::vector<std::vector<double>> diff;    // [path][level] L1(u^z - u^(l)) at T
  std::vector<std::vector<double>> cauchy;  // [path][level-1] L1(u^(l) - u^(l+1))
  std::vector<std::vector<double>> pw_gap;  // [path][level] L1(u^(l) - u_pathwise)
  std::vector<double> exponent;             // per-path fit (NaN when at floor)
  std::vector<double> fitted_const;
};

StabilityCampaign stability_campaign(const Config& c, const Setup& s) {
  const int lmin = static_cast<int>(c.get_int("levels.min", 4));
  const int lmax = static_cast<int>(c.get_int("levels.max", 9));
  if (lmin >= lmax) throw std::invalid_argument("levels.min must be < levels.max");
  const double t_end = c.get_double("solver.t_end", 0.5);

  StabilityCampaign out;
  for (int l = lmin; l <= lmax; ++l) out.levels.push_back(l);
  const int npaths = s.mc_paths;
  const int nlev = static_cast<int>(out.levels.size());
  out.dist.assign(npaths, std::vector<double>(nlev, 0.0));
  out.diff.assign(npaths, std::vector<double>(nlev, 0.0));
  out.cauchy.assign(npaths, std::vector<double>(nlev - 1, 0.0));
  out.pw_gap.assign(npaths, std::vector<double>(nlev, 0.0));
  out.exponent.assign(npaths, 0.0);
  out.fitted_const.assign(npaths, 0.0);

  parallel_for(npaths, s.workers, [&](int p) {
    const Config& cc = c;
    Setup local = s;  // shared immutable models; copies of pods
    const DrivingPath base = build_path(cc, local, p, t_end);
    const TorusField u0 = build_u0(cc, local.grid);

    SolverConfig ref_cfg = solver_config(cc, local, Scheme::reference);
    ref_cfg.t_end = t_end;
    ref_cfg.record_every = t_end;
    SolverConfig pw_cfg = solver_config(cc, local, Scheme::pathwise);
    pw_cfg.t_end = t_end;
    pw_cfg.record_every = t_end;

    const Trajectory tz = run(ref_cfg, base, u0);
    const Trajectory tpw = run(pw_cfg, base, u0);
    std::vector<TorusField> ul;
    for (int li = 0; li < nlev; ++li) {
      const DrivingPath zl = dyadic_linearization(base, out.levels[li]);
      const Trajectory tl = run(ref_cfg, zl, u0);
      ul.push_back(tl.snapshots.back());
      out.dist[p][li] = sup_distance(base, zl, 0.0, t_end);
      out.diff[p][li] = l1_distance(tz.snapshots.back(), ul.back());
      out.pw_gap[p][li] = l1_distance(ul.back(), tpw.snapshots.back());
    }
    for (int li = 0; li + 1 < nlev; ++li)
      out.cauchy[p][li] = l1_distance(ul[li], ul[li + 1]);

    // per-path rate fit in log-log; flag the noise floor
    constexpr double kFloor = 1e-10;
    std::vector<double> lx, ly;
    for (int li = 0; li < nlev; ++li) {
      if (out.diff[p][li] > kFloor && out.dist[p][li] > 0.0) {
        lx.push_back(std::log(out.dist[p][li]));
        ly.push_back(std::log(out.diff[p][li]));
      }
    }
    if (lx.size() < 3) {
      out.exponent[p] = std::nan("");
      out.fitted_const[p] = std::nan("");
    } else {
      const LinearFit fit = linear_fit(lx, ly);
      out.exponent[p] = fit.slope;
      out.fitted_const[p] = std::exp(fit.intercept);
    }
  });
  return out;
}

nlohmann::ordered_json campaign_json(const StabilityCampaign& camp) {
  nlohmann::ordered_json j;
  j["levels"] = camp.levels;
  j["dist"] = camp.dist;
  j["diff"] = camp.diff;
  j["cauchy"] = camp.cauchy;
  j["pw_gap"] = camp.pw_gap;
  return j;
}

}  // namespace

RunRecord exp_stability(const Config& c) {
  c.validate_keys(with_keys({"levels.min", "levels.max"}));
  return guarded(c, "stability", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    const StabilityCampaign camp = stability_campaign(c, s);

    std::vector<double> exps, consts;
    for (std::size_t p = 0; p < camp.exponent.size(); ++p)
      if (!std::isnan(camp.exponent[p])) {
        exps.push_back(camp.exponent[p]);
        consts.push_back(camp.fitted_const[p]);
      }
    rec.payload["campaign"] = campaign_json(camp);
    if (exps.empty()) {
      rec.status = "floor";
      rec.payload["note"] = "all path differences at the noise floor";
      return;
    }
    const auto med = [](const std::vector<double>& v) { return median(v); };
    const BootstrapCI ci = bootstrap_ci(exps, med, derive_seed(s.master_seed, 0xb00737ULL));
    rec.payload["exponent_median"] = ci.estimate;
    rec.payload["exponent_ci_low"] = ci.lower;
    rec.payload["exponent_ci_high"] = ci.upper;
    rec.payload["constant_median"] = median(consts);
    rec.payload["paths_used"] = exps.size();
    if (!(ci.estimate >= 0.45 && ci.lower >= 0.40)) rec.status = "fail";
  });
}

RunRecord exp_wongzakai(const Config& c) {
  c.validate_keys(with_keys({"levels.min", "levels.max"}));
  return guarded(c, "wongzakai", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    const StabilityCampaign camp = stability_campaign(c, s);
    rec.payload["campaign"] = campaign_json(camp);

    const int nlev = static_cast<int>(camp.levels.size());
    std::vector<double> med_cauchy(nlev - 1), med_gap(nlev);
    for (int li = 0; li + 1 < nlev; ++li) {
      std::vector<double> col;
      for (const auto& row : camp.cauchy) col.push_back(row[li]);
      med_cauchy[li] = median(col);
    }
    for (int li = 0; li < nlev; ++li) {
      std::vector<double> col;
      for (const auto& row : camp.pw_gap) col.push_back(row[li]);
      med_gap[li] = median(col);
    }
    rec.payload["median_cauchy"] = med_cauchy;
    rec.payload["median_pw_gap"] = med_gap;

    bool cauchy_decreasing = true;
    for (int li = 0; li + 1 < nlev - 1; ++li)
      if (!(med_cauchy[li + 1] < med_cauchy[li])) cauchy_decreasing = false;
    const bool gap_decreasing = med_gap.back() < med_gap.front();
    int gap_every_path = 0;
    for (const auto& row : camp.pw_gap)
      if (row.back() < row.front()) ++gap_every_path;
    rec.payload["cauchy_strictly_decreasing"] = cauchy_decreasing;
    rec.payload["gap_decreasing"] = gap_decreasing;
    rec.payload["gap_decreasing_paths"] = gap_every_path;
    if (!(cauchy_decreasing && gap_decreasing)) rec.status = "fail";
  });
}

RunRecord exp_decay(const Config& c) {
  auto keys = with_keys({"decay.t_min", "decay.points_per_octave"});
  keys.insert(kThetaKeys.begin(), kThetaKeys.end());
  c.validate_keys(keys);
  return guarded(c, "decay", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    const double t_end = c.get_double("solver.t_end", 32.0);
    if (t_end < 4.0) throw std::invalid_argument("exp_decay: t_end >= 4 required");
    const ThetaEstimate theta = run_theta(c, *s.model);
    rec.payload["theta"] = theta_json(theta);
    const double rate = theta.theta_hat / (4.0 + theta.theta_hat);

    const TorusField u0 = build_u0(c, s.grid);
    const double ubar = u0.mean();
    const double p0 = s.model->p0();
    const double u0_norm = fractional_norm(u0, 2.0 + p0);

    // log time grid on [t_min, t_end]
    const double t_min = c.get_double("decay.t_min", 1.0);
    const int ppo = static_cast<int>(c.get_int("decay.points_per_octave", 2));
    std::vector<double> t_grid;
    const int octaves = static_cast<int>(std::round(std::log2(t_end / t_min)));
    for (int k = 0; k <= octaves * ppo; ++k)
      t_grid.push_back(t_min * std::pow(2.0, static_cast<double>(k) / ppo));

    SolverConfig sc = solver_config(c, s, Scheme::pathwise);
    sc.t_end = t_end;
    sc.record_times = t_grid;

    const int npaths = s.mc_paths;
    std::vector<std::vector<double>> l1_dev(npaths);
    parallel_for(npaths, s.workers, [&](int p) {
      const DrivingPath path = build_path(c, s, p, t_end);
      const Trajectory traj = run(sc, path, u0);
      std::vector<double> row;
      for (std::size_t k = 0; k < traj.times.size(); ++k) {
        if (traj.times[k] < t_min - 1e-12) continue;
        std::vector<double> dev(traj.snapshots[k].values());
        for (double& x : dev) x -= ubar;
        row.push_back(lp_norm(TorusField(s.grid, std::move(dev)), 1.0));
      }
      l1_dev[p] = std::move(row);
    });

    nlohmann::ordered_json rows = nlohmann::ordered_json::array();
    bool pass = true, inconclusive = false;
    std::vector<double> log_t, log_mean;
    for (std::size_t k = 0; k < t_grid.size(); ++k) {
      std::vector<double> col;
      for (int p = 0; p < npaths; ++p) col.push_back(l1_dev[p][k]);
      const double m = mean(col), se = std_error(col);
      const double bound = std::pow(t_grid[k], -rate) * (u0_norm + 1.0);
      rows.push_back({{"t", t_grid[k]}, {"mean_l1", m}, {"se", se}, {"bound", bound}});
      if (t_grid[k] >= 1.0) {
        if (m + 2.0 * se > bound) {
          if (m - 2.0 * se <= bound) inconclusive = true;
          else pass = false;
        }
        if (m > 0.0) {
          log_t.push_back(std::log(t_grid[k]));
          log_mean.push_back(std::log(m));
        }
      }
    }
    rec.payload["rows"] = rows;
    rec.payload["bound_exponent"] = -rate;
    rec.payload["u0_norm_plus_one"] = u0_norm + 1.0;
    if (log_t.size() >= 3) {
      const LinearFit fit = linear_fit(log_t, log_mean);
      rec.payload["empirical_exponent"] = fit.slope;
      rec.payload["empirical_exponent_stderr"] = fit.slope_stderr;
    }
    if (!pass) rec.status = "fail";
    else if (inconclusive) rec.status = "inconclusive";
  });
}

RunRecord exp_regularity(const Config& c) {
  auto keys = with_keys({"lambda", "regularity.delta", "regularity.refine"});
  keys.insert(kThetaKeys.begin(), kThetaKeys.end());
  c.validate_keys(keys);
  return guarded(c, "regularity", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    const ThetaEstimate theta = run_theta(c, *s.model);
    rec.payload["theta"] = theta_json(theta);
    const double lambda = c.get_double("lambda", 0.5);
    const double lambda_max = 2.0 * theta.theta_hat / (theta.theta_hat + 2.0);
    rec.payload["lambda"] = lambda;
    rec.payload["lambda_admissible_sup"] = lambda_max;
    if (!(lambda > 0.0 && lambda < lambda_max))
      throw std::invalid_argument("exp_regularity: lambda outside the admissible interval (0, " +
                                  std::to_string(lambda_max) + ")");

    const double delta = c.get_double("regularity.delta", 0.25);
    const double t_end = c.get_double("solver.t_end", 1.0);

    auto campaign = [&](int cells) {
      Config cc = c;
      cc.set("grid.cells", std::to_string(cells));
      Setup sl = build_setup(cc);
      SolverConfig sc = solver_config(cc, sl, Scheme::pathwise);
      sc.t_end = t_end;
      sc.record_every = c.get_double("solver.record_every", t_end / 16.0);
      const TorusField u0 = build_u0(cc, sl.grid);
      const int npaths = sl.mc_paths;
      std::vector<double> integrals(npaths, 0.0);
      std::vector<std::vector<double>> norms(npaths);
      std::vector<double> times;
      parallel_for(npaths, sl.workers, [&](int p) {
        const DrivingPath path = build_path(cc, sl, p, t_end);
        const Trajectory traj = run(sc, path, u0);
        std::vector<double> w;
        for (const auto& snap : traj.snapshots) w.push_back(wlam_norm(snap, lambda, 1.0));
        // trapezoid in time
        double acc = 0.0;
        for (std::size_t k = 0; k + 1 < w.size(); ++k)
          acc += 0.5 * (w[k] + w[k + 1]) * (traj.times[k + 1] - traj.times[k]);
        integrals[p] = acc;
        norms[p] = std::move(w);
        if (p == 0) times = traj.times;
      });
      double sup_mean = 0.0;
      for (std::size_t k = 0; k < times.size(); ++k) {
        if (times[k] < delta) continue;
        std::vector<double> col;
        for (int p = 0; p < npaths; ++p) col.push_back(norms[p][k]);
        sup_mean = std::max(sup_mean, mean(col));
      }
      return std::tuple<double, double, double>(mean(integrals), std_error(integrals), sup_mean);
    };

    const int cells = static_cast<int>(c.get_int("grid.cells", 128));
    const auto [coarse, coarse_se, coarse_sup] = campaign(cells);
    rec.payload["E_int_wlam"] = coarse;
    rec.payload["E_int_wlam_se"] = coarse_se;
    rec.payload["sup_mean_wlam_after_delta"] = coarse_sup;
    if (c.get_bool("regularity.refine", true)) {
      const auto [fine, fine_se, fine_sup] = campaign(cells * 2);
      rec.payload["E_int_wlam_refined"] = fine;
      rec.payload["E_int_wlam_refined_se"] = fine_se;
      rec.payload["sup_mean_wlam_after_delta_refined"] = fine_sup;
      const double ratio = fine / coarse;
      rec.payload["refinement_ratio"] = ratio;
      if (!(fine < coarse * 1.25)) rec.status = "fail";
    }
  });
}

RunRecord exp_splitup(const Config& c) {
  c.validate_keys(with_keys({"gamma", "alpha", "splitup.gamma_ladder"}));
  return guarded(c, "splitup", [&](RunRecord& rec) {
    Setup s = build_setup(c);
    const double alpha = c.get_double("alpha", 1.0);
    const std::vector<double> gammas =
        c.get_list("splitup.gamma_ladder", {c.get_double("gamma", 1.0)});
    const double t_end = c.get_double("solver.t_end", 1.0);

    SolverConfig sc = solver_config(c, s, Scheme::pathwise);
    sc.t_end = t_end;
    sc.record_every = c.get_double("solver.record_every", t_end / 32.0);
    TorusField u0 = build_u0(c, s.grid);
    if (std::abs(u0.mean()) > 1e-12) {
      std::vector<double> v(u0.values());
      const double m0 = u0.mean();
      for (double& x : v) x -= m0;  // split-up works with the mean-free reduction
      u0 = TorusField(s.grid, std::move(v));
    }

    const int npaths = s.mc_paths;
    // per path and gamma: time-integrated squared norms
    std::vector<std::vector<double>> int_u0(gammas.size(), std::vector<double>(npaths, 0.0));
    std::vector<std::vector<double>> int_u1(gammas.size(), std::vector<double>(npaths, 0.0));
    std::vector<double> max_resid(npaths, 0.0);
    std::vector<double> max_u0hat0(npaths, 0.0);
    std::mutex csv_mu;
    std::ofstream csv(run_dir(c) + "/splitup.csv");
    csv.precision(17);
    csv << "gamma,t,u0_l2,u1_l2,q_l1\n";

    parallel_for(npaths, s.workers, [&](int p) {
      const DrivingPath path = build_path(c, s, p, t_end);
      const Trajectory traj = run(sc, path, u0);
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        const SplitUp su =
            split_up(traj, *s.model, path, gammas[gi], alpha, s.xigrid);
        max_resid[p] = std::max(max_resid[p], su.additivity_residual);
        for (std::size_t k = 0; k < su.times.size(); ++k) {
          max_u0hat0[p] =
              std::max(max_u0hat0[p], std::abs(forward_fft(su.u0_part[k]).coeffs[0]));
        }
        double acc0 = 0.0, acc1 = 0.0;
        for (std::size_t k = 0; k + 1 < su.times.size(); ++k) {
          const double dt = su.times[k + 1] - su.times[k];
          acc0 += 0.5 * (su.u0_l2[k] * su.u0_l2[k] + su.u0_l2[k + 1] * su.u0_l2[k + 1]) * dt;
          acc1 += 0.5 * (su.u1_l2[k] * su.u1_l2[k] + su.u1_l2[k + 1] * su.u1_l2[k + 1]) * dt;
        }
        int_u0[gi][p] = acc0;
        int_u1[gi][p] = acc1;
        std::scoped_lock lock(csv_mu);
        for (std::size_t k = 0; k < su.times.size(); ++k)
          csv << gammas[gi] << "," << su.times[k] << "," << su.u0_l2[k] << "," << su.u1_l2[k]
              << "," << su.q_l1[k] << "\n";
      }
    });

    rec.payload["gamma_ladder"] = gammas;
    rec.payload["additivity_residual_max"] = *std::max_element(max_resid.begin(), max_resid.end());
    rec.payload["u0hat0_max"] = *std::max_element(max_u0hat0.begin(), max_u0hat0.end());
    std::vector<double> mean_u0(gammas.size()), mean_u1(gammas.size());
    for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
      mean_u0[gi] = mean(int_u0[gi]);
      mean_u1[gi] = mean(int_u1[gi]);
    }
    rec.payload["E_int_u0_sq"] = mean_u0;
    rec.payload["E_int_u1_sq"] = mean_u1;
    if (gammas.size() >= 3) {
      std::vector<double> lg, l0, l1v;
      for (std::size_t gi = 0; gi < gammas.size(); ++gi) {
        lg.push_back(std::log(gammas[gi]));
        l0.push_back(std::log(std::max(mean_u0[gi], 1e-300)));
        l1v.push_back(std::log(std::max(mean_u1[gi], 1e-300)));
      }
      rec.payload["u0_gamma_slope"] = linear_fit(lg, l0).slope;
      rec.payload["u1_gamma_slope"] = linear_fit(lg, l1v).slope;
    }
    if (rec.payload["additivity_residual_max"].get<double>() >= 1e-9) rec.status = "fail";
  });
}

RunRecord run_experiment(const Config& c) {
  const std::string kind = c.require_string("experiment");
  if (kind == "simulate") return exp_simulate(c);
  if (kind == "theta") return exp_theta(c);
  if (kind == "lemmas") return exp_lemmas(c);
  if (kind == "stability") return exp_stability(c);
  if (kind == "wongzakai") return exp_wongzakai(c);
  if (kind == "decay") return exp_decay(c);
  if (kind == "regularity") return exp_regularity(c);
  if (kind == "splitup") return exp_splitup(c);
  throw std::invalid_argument("config: unknown experiment '" + kind + "'");
}

}  // namespace spdelab
