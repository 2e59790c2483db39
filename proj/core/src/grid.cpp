#include "hjhomog/grid.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace homog {

PeriodicGrid::PeriodicGrid(int dim, int n) : dim_(dim), n_(n) {
  if (dim != 1 && dim != 2) throw input_error("grid: dim must be 1 or 2");
  if (n < 8)
    throw resolution_error("grid: need at least 8 nodes per axis, got " +
                               std::to_string(n),
                           8);
  spacing_ = 1.0 / n;
  node_count_ = dim == 1 ? std::size_t(n) : std::size_t(n) * std::size_t(n);
}

std::size_t PeriodicGrid::index(int i, int j) const {
  i = wrap(i);
  if (dim_ == 1) return std::size_t(i);
  j = wrap(j);
  return std::size_t(i) * std::size_t(n_) + std::size_t(j);
}

Vec PeriodicGrid::coords(std::size_t index) const {
  if (dim_ == 1) return vec1(double(index) * spacing_);
  std::size_t i = index / std::size_t(n_);
  std::size_t j = index % std::size_t(n_);
  return vec2(double(i) * spacing_, double(j) * spacing_);
}

int PeriodicGrid::axis_index(std::size_t index, int axis) const {
  if (dim_ == 1) return int(index);
  return axis == 0 ? int(index / std::size_t(n_)) : int(index % std::size_t(n_));
}

int PeriodicGrid::wrap(int i) const {
  int r = i % n_;
  return r < 0 ? r + n_ : r;
}

ValueField::ValueField(PeriodicGrid grid, std::vector<double> values,
                       double time)
    : grid_(grid), values_(std::move(values)), time_(time) {
  if (values_.size() != grid_.node_count())
    throw input_error("value field: expected " +
                      std::to_string(grid_.node_count()) + " values, got " +
                      std::to_string(values_.size()));
  for (double v : values_)
    if (!std::isfinite(v)) throw input_error("value field: non-finite value");
  recompute_lipschitz();
}

void ValueField::set_values(std::vector<double> values, double time) {
  if (values.size() != grid_.node_count())
    throw input_error("value field: expected " +
                      std::to_string(grid_.node_count()) + " values, got " +
                      std::to_string(values.size()));
  for (double v : values)
    if (!std::isfinite(v)) throw input_error("value field: non-finite value");
  values_ = std::move(values);
  time_ = time;
  recompute_lipschitz();
}

void ValueField::recompute_lipschitz() {
  const int n = grid_.n();
  const double inv_h = double(n);
  double worst = 0.0;
  if (grid_.dim() == 1) {
    for (int i = 0; i < n; ++i) {
      double d = std::abs(values_[grid_.index(i + 1)] - values_[grid_.index(i)]);
      worst = std::max(worst, d);
    }
  } else {
    for (int i = 0; i < n; ++i) {
      for (int j = 0; j < n; ++j) {
        double v = values_[grid_.index(i, j)];
        worst = std::max(worst, std::abs(values_[grid_.index(i + 1, j)] - v));
        worst = std::max(worst, std::abs(values_[grid_.index(i, j + 1)] - v));
      }
    }
  }
  lipschitz_ = worst * inv_h;
}

double ValueField::max_value() const {
  return *std::max_element(values_.begin(), values_.end());
}

double ValueField::min_value() const {
  return *std::min_element(values_.begin(), values_.end());
}

double ValueField::mean() const {
  return std::accumulate(values_.begin(), values_.end(), 0.0) /
         double(values_.size());
}

void ValueField::remove_mean() {
  double m = mean();
  std::vector<double> shifted = values_;
  for (double& v : shifted) v -= m;
  set_values(std::move(shifted), time_);
}

ValueField ValueField::sampled(const PeriodicGrid& grid,
                               const std::function<double(const Vec&)>& f,
                               double time) {
  std::vector<double> vals(grid.node_count());
  for (std::size_t i = 0; i < grid.node_count(); ++i) vals[i] = f(grid.coords(i));
  return ValueField(grid, std::move(vals), time);
}

double sup_distance(const ValueField& a, const ValueField& b) {
  if (a.grid().dim() != b.grid().dim() || a.grid().n() != b.grid().n())
    throw input_error("sup_distance: grids differ");
  double worst = 0.0;
  for (std::size_t i = 0; i < a.values().size(); ++i)
    worst = std::max(worst, std::abs(a[i] - b[i]));
  return worst;
}

}  // namespace homog
