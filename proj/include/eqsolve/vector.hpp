#pragma once

#include <algorithm>
#include <cmath>
#include <span>
#include <vector>

#include "errors.hpp"

namespace eqsolve {

using Vector = std::vector<double>;

/// Euclidean norm, scaled so that tiny or huge components neither underflow
/// nor overflow. Returns exactly 0 iff every component is 0.
inline double norm2(std::span<const double> v) {
  double scale = 0.0;
  for (double x : v) scale = std::max(scale, std::abs(x));
  if (scale == 0.0 || !std::isfinite(scale)) return scale;
  double sum = 0.0;
  for (double x : v) {
    const double r = x / scale;
    sum += r * r;
  }
  return scale * std::sqrt(sum);
}

inline double norm_inf(std::span<const double> v) {
  double m = 0.0;
  for (double x : v) m = std::max(m, std::abs(x));
  return m;
}

inline double norm1(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += std::abs(x);
  return s;
}

inline double squared_norm(std::span<const double> v) {
  double s = 0.0;
  for (double x : v) s += x * x;
  return s;
}

inline double distance2(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("distance between vectors of different length");
  Vector d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  return norm2(d);
}

inline double distance_inf(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) throw DimensionMismatch("distance between vectors of different length");
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

}  // namespace eqsolve
