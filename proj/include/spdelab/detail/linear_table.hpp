#pragma once

#include <algorithm>
#include <cstddef>
#include <vector>

namespace spdelab::detail {

// piecewise-linear table on a uniform grid with the exact primitive of the
// interpolant (trapezoid at nodes, quadratic inside cells)
class LinearTable {
 public:
  LinearTable() = default;
  LinearTable(double lo, double hi, std::vector<double> y) : lo_(lo), hi_(hi), y_(std::move(y)) {
    dx_ = (hi_ - lo_) / static_cast<double>(y_.size() - 1);
    prim_.resize(y_.size(), 0.0);
    for (std::size_t i = 1; i < y_.size(); ++i)
      prim_[i] = prim_[i - 1] + 0.5 * (y_[i - 1] + y_[i]) * dx_;
  }

  double eval(double x) const {
    if (x <= lo_) return y_.front();
    if (x >= hi_) return y_.back();
    const double t = (x - lo_) / dx_;
    const std::size_t i = std::min(static_cast<std::size_t>(t), y_.size() - 2);
    const double w = t - static_cast<double>(i);
    return (1.0 - w) * y_[i] + w * y_[i + 1];
  }

  // integral of the interpolant from a to x
  double primitive(double x, double a) const { return prim_at(x) - prim_at(a); }

 private:
  double prim_at(double x) const {
    if (x <= lo_) return y_.front() * (x - lo_);
    if (x >= hi_) return prim_.back() + y_.back() * (x - hi_);
    const double t = (x - lo_) / dx_;
    const std::size_t i = std::min(static_cast<std::size_t>(t), y_.size() - 2);
    const double r = x - (lo_ + static_cast<double>(i) * dx_);
    const double slope = (y_[i + 1] - y_[i]) / dx_;
    return prim_[i] + y_[i] * r + 0.5 * slope * r * r;
  }

  double lo_ = 0.0, hi_ = 0.0, dx_ = 1.0;
  std::vector<double> y_;
  std::vector<double> prim_;
};

}  // namespace spdelab::detail
