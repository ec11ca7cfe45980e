#include "spdelab/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "spdelab/detail/linear_table.hpp"
#include "spdelab/quadrature.hpp"
#include "spdelab/stats.hpp"

namespace spdelab {

namespace {

using detail::LinearTable;

double sgn(double x) { return x > 0.0 ? 1.0 : (x < 0.0 ? -1.0 : 0.0); }

// standard even bump on (-1,1), normalized to unit mass
double bump_constant() {
  static const double c =
      1.0 / integrate([](double r) { return std::exp(-1.0 / (1.0 - r * r)); }, -1.0 + 1e-14,
                      1.0 - 1e-14, 1e-13);
  return c;
}

double bump(double r) {
  if (std::abs(r) >= 1.0) return 0.0;
  return bump_constant() * std::exp(-1.0 / (1.0 - r * r));
}

}  // namespace

double SymMat::min_eig(int dim) const {
  if (dim == 1) return a11;
  const double tr = a11 + a22;
  const double disc = std::sqrt(std::max(0.0, (a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
  return 0.5 * (tr - disc);
}

double SymMat::max_eig(int dim) const {
  if (dim == 1) return a11;
  const double tr = a11 + a22;
  const double disc = std::sqrt(std::max(0.0, (a11 - a22) * (a11 - a22) + 4.0 * a12 * a12));
  return 0.5 * (tr + disc);
}

SymMat SymMat::sqrt_psd(int dim) const {
  if (dim == 1) return SymMat{std::sqrt(std::max(0.0, a11)), 0.0, 0.0};
  if (a12 == 0.0)
    return SymMat{std::sqrt(std::max(0.0, a11)), std::sqrt(std::max(0.0, a22)), 0.0};
  const double det = std::max(0.0, a11 * a22 - a12 * a12);
  const double s = std::sqrt(det);
  const double t = std::sqrt(std::max(0.0, a11 + a22 + 2.0 * s));
  if (t == 0.0) return SymMat{};
  return SymMat{(a11 + s) / t, (a22 + s) / t, a12 / t};
}

double FluxModel::max_abs_f(double lo, double hi) const {
  const int n = 2049;
  double mx = 0.0;
  for (int j = 0; j < n; ++j) {
    const double xi = lo + (hi - lo) * j / (n - 1);
    for (int i = 0; i < dim; ++i) mx = std::max(mx, std::abs(f(i, xi)));
  }
  return mx;
}

double FluxModel::max_eig_A(double lo, double hi) const {
  if (zero_diffusion) return 0.0;
  const int n = 2049;
  double mx = 0.0;
  for (int j = 0; j < n; ++j) {
    const double xi = lo + (hi - lo) * j / (n - 1);
    mx = std::max(mx, A(xi).max_eig(dim));
  }
  return mx;
}

FluxModel make_burgers(int dim) {
  FluxModel m;
  m.dim = dim;
  m.name = "burgers";
  m.F = [](int, double xi) { return 0.5 * xi * xi; };
  m.f = [](int, double xi) { return xi; };
  m.A = [](double) { return SymMat{}; };
  m.sigma = [](double) { return SymMat{}; };
  m.beta = [](int, int, double) { return 0.0; };
  m.Bprim = [](int, int, double) { return 0.0; };
  m.p1 = 0.0;
  m.p2 = 0.0;
  m.zero_diffusion = true;
  return m;
}

FluxModel make_porous_medium(double mexp, int dim,
                             const std::shared_ptr<const FluxModel>& flux) {
  if (!(mexp > 1.0)) throw std::invalid_argument("make_porous_medium: m must be > 1");
  if (flux && flux->dim != dim)
    throw std::invalid_argument("make_porous_medium: flux dimension mismatch");
  FluxModel m;
  m.dim = dim;
  m.name = "porous";
  if (flux) {
    auto fm = flux;
    m.F = [fm](int i, double xi) { return fm->F(i, xi); };
    m.f = [fm](int i, double xi) { return fm->f(i, xi); };
    m.p2 = fm->p2;
    m.zero_flux = fm->zero_flux;
  } else {
    m.F = [](int, double) { return 0.0; };
    m.f = [](int, double) { return 0.0; };
    m.zero_flux = true;
  }
  // a(xi) = m |xi|^(m-1) on the diagonal; sigma, beta, B in closed form
  const double me = mexp;
  m.A = [me, dim](double xi) {
    const double a = me * std::pow(std::abs(xi), me - 1.0);
    return SymMat{a, dim == 2 ? a : 0.0, 0.0};
  };
  m.sigma = [me, dim](double xi) {
    const double s = std::sqrt(me * std::pow(std::abs(xi), me - 1.0));
    return SymMat{s, dim == 2 ? s : 0.0, 0.0};
  };
  m.beta = [me](int i, int k, double xi) {
    if (i != k) return 0.0;
    const double q = 0.5 * (me + 1.0);
    return 2.0 * std::sqrt(me) / (me + 1.0) * sgn(xi) * std::pow(std::abs(xi), q);
  };
  m.Bprim = [me](int i, int j, double xi) {
    if (i != j) return 0.0;
    return std::pow(std::abs(xi), me - 1.0) * xi;  // u^[m]
  };
  m.p1 = me - 2.0;
  return m;
}

FluxModel make_power_flux(const std::vector<double>& exponents) {
  if (exponents.empty() || exponents.size() > 2)
    throw std::invalid_argument("make_power_flux: need 1 or 2 exponents");
  for (double p : exponents)
    if (!(p >= 1.0)) throw std::invalid_argument("make_power_flux: exponents must be >= 1");
  FluxModel m;
  m.dim = static_cast<int>(exponents.size());
  m.name = "power";
  auto exps = exponents;
  m.F = [exps](int i, double xi) {
    return std::pow(std::abs(xi), exps[i] + 1.0) / (exps[i] + 1.0);
  };
  m.f = [exps](int i, double xi) { return sgn(xi) * std::pow(std::abs(xi), exps[i]); };
  m.A = [](double) { return SymMat{}; };
  m.sigma = [](double) { return SymMat{}; };
  m.beta = [](int, int, double) { return 0.0; };
  m.Bprim = [](int, int, double) { return 0.0; };
  m.p1 = 0.0;
  m.p2 = *std::max_element(exponents.begin(), exponents.end()) - 1.0;
  m.zero_diffusion = true;
  return m;
}

FluxModel make_custom(const ModelSpec& spec) {
  if (spec.dim != 1 && spec.dim != 2) throw std::invalid_argument("make_custom: dim in {1,2}");
  FluxModel m;
  m.dim = spec.dim;
  m.name = spec.name;
  m.F = spec.F ? spec.F : [](int, double) { return 0.0; };
  m.f = spec.f ? spec.f : [](int, double) { return 0.0; };
  m.zero_flux = !spec.f;
  m.p1 = spec.p1;
  m.p2 = spec.p2;
  if (!spec.A) {
    m.A = [](double) { return SymMat{}; };
    m.sigma = [](double) { return SymMat{}; };
    m.beta = [](int, int, double) { return 0.0; };
    m.Bprim = [](int, int, double) { return 0.0; };
    m.zero_diffusion = true;
    return m;
  }
  m.A = spec.A;

  // PSD sanity on sampled xi
  for (int j = 0; j <= 200; ++j) {
    const double xi = -spec.table_halfwidth + j * spec.table_halfwidth / 100.0;
    if (m.A(xi).min_eig(m.dim) < -1e-12)
      throw std::invalid_argument("make_custom: A(xi) has a negative eigenvalue at xi=" +
                                  std::to_string(xi));
  }

  if (spec.sigma) {
    m.sigma = spec.sigma;
  } else {
    // symmetric square root per xi, tabulated with linear interpolation
    const int n = spec.table_points + 1;
    const double lo = -spec.table_halfwidth, hi = spec.table_halfwidth;
    std::vector<double> s11(n), s22(n), s12(n);
    auto aa = spec.A;
    const int dim = spec.dim;
    for (int j = 0; j < n; ++j) {
      const double xi = lo + (hi - lo) * j / (n - 1);
      const SymMat s = aa(xi).sqrt_psd(dim);
      s11[j] = s.a11;
      s22[j] = s.a22;
      s12[j] = s.a12;
    }
    auto t11 = std::make_shared<LinearTable>(lo, hi, std::move(s11));
    auto t22 = std::make_shared<LinearTable>(lo, hi, std::move(s22));
    auto t12 = std::make_shared<LinearTable>(lo, hi, std::move(s12));
    m.sigma = [t11, t22, t12](double xi) {
      return SymMat{t11->eval(xi), t22->eval(xi), t12->eval(xi)};
    };
  }

  if (spec.beta) {
    m.beta = spec.beta;
  } else {
    // primitives of the (tabulated) sigma entries, exact for the interpolant
    const int n = spec.table_points + 1;
    const double lo = -spec.table_halfwidth, hi = spec.table_halfwidth;
    auto sg = m.sigma;
    auto tab_of = [&](int i, int k) {
      std::vector<double> y(n);
      for (int j = 0; j < n; ++j) {
        const double xi = lo + (hi - lo) * j / (n - 1);
        const SymMat s = sg(xi);
        y[j] = (i == 0 && k == 0) ? s.a11 : ((i == 1 && k == 1) ? s.a22 : s.a12);
      }
      return std::make_shared<LinearTable>(lo, hi, std::move(y));
    };
    auto b00 = tab_of(0, 0), b11 = tab_of(1, 1), b01 = tab_of(0, 1);
    m.beta = [b00, b11, b01](int i, int k, double xi) {
      auto& t = (i == 0 && k == 0) ? *b00 : ((i == 1 && k == 1) ? *b11 : *b01);
      return t.primitive(xi, 0.0);
    };
  }

  if (spec.Bprim) {
    m.Bprim = spec.Bprim;
  } else {
    const int n = spec.table_points + 1;
    const double lo = -spec.table_halfwidth, hi = spec.table_halfwidth;
    auto aa = m.A;
    auto tab_of = [&](int i, int j) {
      std::vector<double> y(n);
      for (int q = 0; q < n; ++q) {
        const double xi = lo + (hi - lo) * q / (n - 1);
        const SymMat a = aa(xi);
        y[q] = (i == 0 && j == 0) ? a.a11 : ((i == 1 && j == 1) ? a.a22 : a.a12);
      }
      return std::make_shared<LinearTable>(lo, hi, std::move(y));
    };
    auto c00 = tab_of(0, 0), c11 = tab_of(1, 1), c01 = tab_of(0, 1);
    m.Bprim = [c00, c11, c01](int i, int j, double xi) {
      auto& t = (i == 0 && j == 0) ? *c00 : ((i == 1 && j == 1) ? *c11 : *c01);
      return t.primitive(xi, 0.0);
    };
  }
  return m;
}

RegularizedModel regularize(const FluxModel& base, double eps, double mollifier_width) {
  if (!(eps > 0.0)) throw std::invalid_argument("regularize: eps must be > 0");
  if (!(mollifier_width > 0.0))
    throw std::invalid_argument("regularize: mollifier width must be > 0");

  RegularizedModel r;
  r.base = std::make_shared<FluxModel>(base);
  r.eps = eps;
  r.width = mollifier_width;

  if (base.zero_diffusion) {
    // mollified zero is zero
    r.mollified = r.base;
    return r;
  }

  const double w = mollifier_width;
  auto baseA = base.A;
  ModelSpec spec;
  spec.dim = base.dim;
  spec.name = base.name + "_mollified";
  spec.F = base.F;
  spec.f = base.f;
  spec.p1 = base.p1;
  spec.p2 = base.p2;
  spec.A = [baseA, w](double xi) {
    auto comp = [&](auto pick) {
      return integrate([&](double s) { return pick(baseA(xi - s)) * bump(s / w) / w; }, -w, w,
                       1e-12);
    };
    SymMat out;
    out.a11 = comp([](const SymMat& a) { return a.a11; });
    out.a22 = comp([](const SymMat& a) { return a.a22; });
    out.a12 = comp([](const SymMat& a) { return a.a12; });
    return out;
  };
  FluxModel moll = make_custom(spec);
  moll.zero_flux = base.zero_flux;
  r.mollified = std::make_shared<FluxModel>(std::move(moll));
  return r;
}

double sublevel_measure(const FluxModel& model, const std::vector<double>& sigma_dir,
                        const std::vector<double>& z, double eps, double xi_lo, double xi_hi,
                        int resolution) {
  if (resolution < 1000) throw std::invalid_argument("sublevel_measure: resolution >= 1000");
  if (!(xi_hi > xi_lo)) throw std::invalid_argument("sublevel_measure: empty window");
  if (sigma_dir.size() != static_cast<std::size_t>(model.dim) ||
      z.size() != static_cast<std::size_t>(model.dim))
    throw std::invalid_argument("sublevel_measure: dimension mismatch");
  double norm2 = 0.0;
  for (double s : sigma_dir) norm2 += s * s;
  if (std::abs(std::sqrt(norm2) - 1.0) > 1e-10)
    throw std::invalid_argument("sublevel_measure: sigma_dir must be a unit vector");

  const double dxi = (xi_hi - xi_lo) / resolution;
  double sig[2] = {sigma_dir[0], model.dim == 2 ? sigma_dir[1] : 0.0};
  long count = 0;
  for (int j = 0; j < resolution; ++j) {
    const double xi = xi_lo + (j + 0.5) * dxi;
    double g = 0.0;
    for (int i = 0; i < model.dim; ++i) {
      const double d = model.f(i, xi) * sigma_dir[i] - z[i];
      g += d * d;
    }
    if (!model.zero_diffusion) g += model.A(xi).quad(sig, model.dim);
    if (g <= eps) ++count;
  }
  return count * dxi;
}

ThetaEstimate estimate_theta(const FluxModel& model, int sigma_samples, int z_samples,
                             const std::vector<double>& eps_ladder, double xi_lo, double xi_hi,
                             double zbox_halfwidth) {
  if (eps_ladder.size() < 5)
    throw std::invalid_argument("estimate_theta: need >= 5 ladder points");
  const auto [mn, mx] = std::minmax_element(eps_ladder.begin(), eps_ladder.end());
  if (*mx / *mn < 100.0)
    throw std::invalid_argument("estimate_theta: ladder must span >= 2 decades");
  if (z_samples < 3) throw std::invalid_argument("estimate_theta: z_samples >= 3");

  ThetaEstimate est;
  est.eps_ladder = eps_ladder;
  est.zbox_is_default = zbox_halfwidth < 0.0;
  const double zbox = est.zbox_is_default ? 2.0 * model.max_abs_f(xi_lo, xi_hi) : zbox_halfwidth;
  est.zbox_halfwidth = zbox;

  // sigma samples on the unit sphere
  std::vector<std::vector<double>> sigmas;
  if (model.dim == 1) {
    sigmas = {{1.0}, {-1.0}};
  } else {
    const int ns = std::max(4, sigma_samples);
    for (int a = 0; a < ns; ++a) {
      const double phi = 2.0 * std::numbers::pi * a / ns;
      sigmas.push_back({std::cos(phi), std::sin(phi)});
    }
  }

  // z grid over the box (componentwise)
  std::vector<double> zgrid(z_samples);
  for (int j = 0; j < z_samples; ++j)
    zgrid[j] = -zbox + 2.0 * zbox * j / (z_samples - 1);

  const int resolution = 4000;
  const double window_len = xi_hi - xi_lo;
  std::vector<double> worst(eps_ladder.size(), 0.0);
  for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
    double w = 0.0;
    for (const auto& sig : sigmas) {
      if (model.dim == 1) {
        for (double z0 : zgrid)
          w = std::max(w, sublevel_measure(model, sig, {z0}, eps_ladder[e], xi_lo, xi_hi,
                                           resolution));
      } else {
        for (double z0 : zgrid)
          for (double z1 : zgrid)
            w = std::max(w, sublevel_measure(model, sig, {z0, z1}, eps_ladder[e], xi_lo, xi_hi,
                                             resolution));
      }
    }
    worst[e] = w;
  }

  const double worst_at_min =
      worst[std::distance(eps_ladder.begin(), std::min_element(eps_ladder.begin(), eps_ladder.end()))];
  if (worst_at_min >= 0.95 * window_len)
    throw ThetaDegenerateError("estimate_theta: sublevel measure saturates the window (flux fails genuine nonlinearity)");
  bool all_zero = true;
  for (double w : worst)
    if (w > 0.0) all_zero = false;
  if (all_zero)
    throw ThetaWindowError("estimate_theta: all sublevel measures are zero (window misses the support)");

  std::vector<double> lx, ly;
  for (std::size_t e = 0; e < eps_ladder.size(); ++e) {
    if (worst[e] <= 0.0) continue;  // below grid resolution; drop from the fit
    lx.push_back(std::log(eps_ladder[e]));
    ly.push_back(std::log(worst[e]));
  }
  if (lx.size() < 5)
    throw ThetaWindowError("estimate_theta: fewer than 5 usable ladder points");
  const LinearFit fit = linear_fit(lx, ly);
  double theta = 2.0 * fit.slope;
  if (theta <= 0.0)
    throw ThetaDegenerateError("estimate_theta: non-positive fitted exponent");
  if (theta > 1.0) {
    theta = 1.0;
    est.clamped = true;
  }
  est.theta_hat = theta;
  est.constant_hat = std::exp(fit.intercept);
  est.fit_r2 = fit.r2;
  return est;
}

}  // namespace spdelab
