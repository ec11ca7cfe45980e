#include "spdelab/paths.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <ostream>
#include <random>
#include <sstream>
#include <stdexcept>

#include "spdelab/stats.hpp"

namespace spdelab {

DrivingPath::DrivingPath(int dim, std::vector<double> knot_times,
                         std::vector<double> knot_values)
    : dim_(dim), knots_(std::move(knot_times)), values_(std::move(knot_values)) {
  if (dim_ != 1 && dim_ != 2) throw std::invalid_argument("DrivingPath: dim in {1,2}");
  if (knots_.size() < 2) throw std::invalid_argument("DrivingPath: need >= 2 knots");
  if (values_.size() != knots_.size() * dim_)
    throw std::invalid_argument("DrivingPath: value count mismatch");
  if (knots_.front() != 0.0) throw std::invalid_argument("DrivingPath: first knot must be t=0");
  for (std::size_t k = 1; k < knots_.size(); ++k)
    if (!(knots_[k] > knots_[k - 1]))
      throw std::invalid_argument("DrivingPath: knots must be strictly increasing");
  for (int d = 0; d < dim_; ++d)
    if (values_[d] != 0.0) throw std::invalid_argument("DrivingPath: z(0) must be 0");
}

void DrivingPath::eval(double t, double out[2]) const {
  if (t < 0.0 || t > knots_.back() * (1.0 + 1e-12))
    throw std::invalid_argument("DrivingPath::eval: t outside [0,T]");
  t = std::min(t, knots_.back());
  const auto it = std::upper_bound(knots_.begin(), knots_.end(), t);
  const std::size_t hi = std::min<std::size_t>(std::distance(knots_.begin(), it), knots_.size() - 1);
  const std::size_t lo = hi - 1;
  const double w = (t - knots_[lo]) / (knots_[hi] - knots_[lo]);
  for (int d = 0; d < dim_; ++d)
    out[d] = (1.0 - w) * values_[lo * dim_ + d] + w * values_[hi * dim_ + d];
}

void DrivingPath::eval_two_sided(double t, double out[2]) const {
  if (t >= 0.0) {
    eval(t, out);
    return;
  }
  if (neg_knots_.empty())
    throw std::invalid_argument("DrivingPath: no negative-time branch attached");
  if (t < neg_knots_.front()) throw std::invalid_argument("DrivingPath: t before branch start");
  const auto it = std::upper_bound(neg_knots_.begin(), neg_knots_.end(), t);
  const std::size_t hi =
      std::min<std::size_t>(std::distance(neg_knots_.begin(), it), neg_knots_.size() - 1);
  const std::size_t lo = hi == 0 ? 0 : hi - 1;
  const double w =
      (hi == lo) ? 0.0 : (t - neg_knots_[lo]) / (neg_knots_[hi] - neg_knots_[lo]);
  for (int d = 0; d < dim_; ++d)
    out[d] = (1.0 - w) * neg_values_[lo * dim_ + d] + w * neg_values_[hi * dim_ + d];
}

void DrivingPath::attach_negative_branch(std::vector<double> knot_times_neg,
                                         std::vector<double> values_neg) {
  if (knot_times_neg.empty() || knot_times_neg.back() != 0.0)
    throw std::invalid_argument("DrivingPath: negative branch must end at t=0");
  if (values_neg.size() != knot_times_neg.size() * dim_)
    throw std::invalid_argument("DrivingPath: negative branch value count mismatch");
  for (int d = 0; d < dim_; ++d)
    if (values_neg[(knot_times_neg.size() - 1) * dim_ + d] != 0.0)
      throw std::invalid_argument("DrivingPath: negative branch must vanish at 0");
  neg_knots_ = std::move(knot_times_neg);
  neg_values_ = std::move(values_neg);
}

DrivingPath sample_brownian(int dim, double horizon, int knots_per_unit, std::uint64_t seed) {
  if (knots_per_unit < 2) throw std::invalid_argument("sample_brownian: knots_per_unit >= 2");
  if (!(horizon > 0.0)) throw std::invalid_argument("sample_brownian: horizon > 0");
  const std::size_t nk = static_cast<std::size_t>(std::llround(horizon * knots_per_unit));
  if (nk < 1) throw std::invalid_argument("sample_brownian: horizon too short for knot grid");
  const double dt = horizon / static_cast<double>(nk);
  const double sd = std::sqrt(dt);

  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<double> times(nk + 1), vals((nk + 1) * dim, 0.0);
  for (std::size_t k = 0; k <= nk; ++k) times[k] = horizon * static_cast<double>(k) / nk;
  for (std::size_t k = 1; k <= nk; ++k)
    for (int d = 0; d < dim; ++d)
      vals[k * dim + d] = vals[(k - 1) * dim + d] + sd * gauss(rng);

  DrivingPath p(dim, std::move(times), std::move(vals));

  // independent negative branch from a derived stream (two-sided motion)
  std::mt19937_64 rng_neg(derive_seed(seed, 0x5eedULL));
  std::vector<double> ntimes(nk + 1), nvals((nk + 1) * dim, 0.0);
  for (std::size_t k = 0; k <= nk; ++k)
    ntimes[k] = -horizon + horizon * static_cast<double>(k) / nk;
  for (std::size_t k = 1; k <= nk; ++k) {
    const std::size_t row = nk - k;  // fill backwards from 0
    for (int d = 0; d < dim; ++d)
      nvals[row * dim + d] = nvals[(row + 1) * dim + d] + sd * gauss(rng_neg);
  }
  p.attach_negative_branch(std::move(ntimes), std::move(nvals));
  return p;
}

DrivingPath make_linear_path(int dim, double horizon, double slope) {
  std::vector<double> times{0.0, horizon};
  std::vector<double> vals(2 * dim, 0.0);
  for (int d = 0; d < dim; ++d) vals[dim + d] = slope * horizon;
  return DrivingPath(dim, std::move(times), std::move(vals));
}

DrivingPath dyadic_linearization(const DrivingPath& path, int level) {
  if (level < 0) throw std::invalid_argument("dyadic_linearization: level >= 0");
  const std::size_t native = path.knot_count() - 1;
  const std::size_t pieces = std::size_t{1} << level;
  if (pieces > native || native % pieces != 0)
    throw std::invalid_argument(
        "dyadic_linearization: 2^l exceeds the native knot resolution; sample a finer base path");
  const std::size_t stride = native / pieces;
  std::vector<double> times(pieces + 1), vals((pieces + 1) * path.dim());
  for (std::size_t k = 0; k <= pieces; ++k) {
    times[k] = path.knot_times()[k * stride];
    for (int d = 0; d < path.dim(); ++d) vals[k * path.dim() + d] = path.knot_value(k * stride, d);
  }
  return DrivingPath(path.dim(), std::move(times), std::move(vals));
}

double sup_distance(const DrivingPath& p1, const DrivingPath& p2, double s, double t) {
  if (p1.dim() != p2.dim()) throw std::invalid_argument("sup_distance: dimension mismatch");
  if (s > t) throw std::invalid_argument("sup_distance: s > t");
  const double tmax = std::min(p1.horizon(), p2.horizon());
  if (s < 0.0 || t > tmax * (1.0 + 1e-12))
    throw std::invalid_argument("sup_distance: [s,t] outside the common horizon");
  std::vector<double> pts;
  pts.push_back(s);
  pts.push_back(std::min(t, tmax));
  for (double x : p1.knot_times())
    if (x > s && x < t) pts.push_back(x);
  for (double x : p2.knot_times())
    if (x > s && x < t) pts.push_back(x);
  std::sort(pts.begin(), pts.end());
  double mx = 0.0;
  double a[2], b[2];
  for (double x : pts) {
    p1.eval(x, a);
    p2.eval(x, b);
    double d2 = 0.0;
    for (int d = 0; d < p1.dim(); ++d) d2 += (a[d] - b[d]) * (a[d] - b[d]);
    mx = std::max(mx, std::sqrt(d2));
  }
  return mx;
}

void dump_path_csv(const DrivingPath& path, std::ostream& os) {
  os << "t";
  for (int d = 0; d < path.dim(); ++d) os << ",z" << (d + 1);
  os << "\n";
  os.precision(17);
  for (std::size_t k = 0; k < path.knot_count(); ++k) {
    os << path.knot_times()[k];
    for (int d = 0; d < path.dim(); ++d) os << "," << path.knot_value(k, d);
    os << "\n";
  }
}

DrivingPath load_path_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line)) throw std::invalid_argument("load_path_csv: empty stream");
  int dim = 0;
  {
    std::stringstream hs(line);
    std::string tok;
    while (std::getline(hs, tok, ',')) ++dim;
    --dim;  // first column is t
  }
  if (dim != 1 && dim != 2) throw std::invalid_argument("load_path_csv: bad header");
  std::vector<double> times, vals;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    std::stringstream ls(line);
    std::string tok;
    std::getline(ls, tok, ',');
    times.push_back(std::stod(tok));
    for (int d = 0; d < dim; ++d) {
      std::getline(ls, tok, ',');
      vals.push_back(std::stod(tok));
    }
  }
  return DrivingPath(dim, std::move(times), std::move(vals));
}

}  // namespace spdelab
