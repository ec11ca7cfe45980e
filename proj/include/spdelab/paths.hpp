#pragma once

#include <cstdint>
#include <iosfwd>
#include <vector>

namespace spdelab {

// Continuous driving signal z on [0,T]: piecewise linear through knot values,
// z(0) = 0. Brownian samples optionally carry a negative-time branch (two-sided
// motion); only t >= 0 is consumed by the solvers. Immutable after sampling.
class DrivingPath {
 public:
  DrivingPath(int dim, std::vector<double> knot_times, std::vector<double> knot_values);

  int dim() const { return dim_; }
  double horizon() const { return knots_.back(); }
  std::size_t knot_count() const { return knots_.size(); }
  const std::vector<double>& knot_times() const { return knots_; }
  // value of component d at knot k
  double knot_value(std::size_t k, int d) const { return values_[k * dim_ + d]; }

  void eval(double t, double out[2]) const;  // linear interpolation, t in [0,T]
  // two-sided extension (empty unless attached by the sampler)
  bool has_negative_branch() const { return !neg_knots_.empty(); }
  void eval_two_sided(double t, double out[2]) const;

  void attach_negative_branch(std::vector<double> knot_times_neg,
                              std::vector<double> values_neg);

 private:
  int dim_;
  std::vector<double> knots_;   // increasing, knots_[0] == 0
  std::vector<double> values_;  // (K+1) x dim, values_[0..dim) == 0
  std::vector<double> neg_knots_;   // increasing, ends at 0
  std::vector<double> neg_values_;  // matching layout, last row == 0
};

// Brownian sample with independent N(0, dt) increments per component on a
// uniform knot grid; deterministic given the seed; carries a negative branch.
DrivingPath sample_brownian(int dim, double horizon, int knots_per_unit, std::uint64_t seed);

// z(t) = slope * t componentwise
DrivingPath make_linear_path(int dim, double horizon, double slope = 1.0);

// piecewise-linear interpolation at times k 2^-l T; nodes must coincide with
// native knots (throws demanding a finer base sample otherwise)
DrivingPath dyadic_linearization(const DrivingPath& path, int level);

// max over the union of knot sets in [s,t] of |p1 - p2| (Euclidean)
double sup_distance(const DrivingPath& p1, const DrivingPath& p2, double s, double t);

void dump_path_csv(const DrivingPath& path, std::ostream& os);
DrivingPath load_path_csv(std::istream& is);

}  // namespace spdelab
