#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "hjhomog/errors.hpp"
#include "hjhomog/vec.hpp"

namespace homog {

// Uniform periodic grid on the unit torus [0,1)^dim with n nodes per axis.
class PeriodicGrid {
 public:
  PeriodicGrid(int dim, int n);

  int dim() const { return dim_; }
  int n() const { return n_; }
  double spacing() const { return spacing_; }
  std::size_t node_count() const { return node_count_; }

  // Row-major flattening; the last axis varies fastest.
  std::size_t index(int i, int j = 0) const;
  Vec coords(std::size_t index) const;
  // Axis indices of a flattened node.
  int axis_index(std::size_t index, int axis) const;
  // Wraps an axis index into [0, n).
  int wrap(int i) const;

 private:
  int dim_;
  int n_;
  double spacing_;
  std::size_t node_count_;
};

// A scalar function sampled on a periodic grid at a fixed time.
class ValueField {
 public:
  ValueField(PeriodicGrid grid, std::vector<double> values, double time = 0.0);

  const PeriodicGrid& grid() const { return grid_; }
  const std::vector<double>& values() const { return values_; }
  double time() const { return time_; }
  double lipschitz_estimate() const { return lipschitz_; }

  double operator[](std::size_t i) const { return values_[i]; }
  void set_values(std::vector<double> values, double time);

  double max_value() const;
  double min_value() const;
  double mean() const;
  // Subtracts the mean in place.
  void remove_mean();

  static ValueField sampled(const PeriodicGrid& grid,
                            const std::function<double(const Vec&)>& f,
                            double time = 0.0);

 private:
  void recompute_lipschitz();

  PeriodicGrid grid_;
  std::vector<double> values_;
  double time_;
  double lipschitz_;
};

// Largest pointwise gap between two fields on the same grid.
double sup_distance(const ValueField& a, const ValueField& b);

}  // namespace homog
