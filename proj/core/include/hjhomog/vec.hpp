#pragma once

#include <array>
#include <cmath>
#include <cstddef>
#include <string>

namespace homog {

// Point or vector in one or two dimensions. The active dimension is carried
// by the owning object (model, grid, window); unused components stay zero.
using Vec = std::array<double, 2>;

inline Vec vec1(double x) { return {x, 0.0}; }
inline Vec vec2(double x, double y) { return {x, y}; }

inline double dot(const Vec& a, const Vec& b, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += a[d] * b[d];
  return s;
}

inline double norm2(const Vec& a, int dim) { return std::sqrt(dot(a, a, dim)); }

inline double norm1(const Vec& a, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s += std::abs(a[d]);
  return s;
}

inline double norm_inf(const Vec& a, int dim) {
  double s = 0.0;
  for (int d = 0; d < dim; ++d) s = std::max(s, std::abs(a[d]));
  return s;
}

// Wraps x into [0, 1).
inline double wrap_unit(double x) {
  double y = x - std::floor(x);
  if (y >= 1.0) y = 0.0;  // guards x = -tiny rounding up
  return y;
}

// Minimal-image representative of a coordinate difference in (-1/2, 1/2].
inline double min_image(double d) { return d - std::ceil(d - 0.5); }

inline std::string format_vec(const Vec& v, int dim) {
  std::string s = "(";
  for (int d = 0; d < dim; ++d) {
    if (d) s += ", ";
    s += std::to_string(v[d]);
  }
  s += ")";
  return s;
}

}  // namespace homog
