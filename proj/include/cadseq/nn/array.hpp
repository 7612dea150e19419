#pragma once

#include <cmath>
#include <cstddef>
#include <numeric>
#include <string>
#include <vector>

#include "cadseq/util/error.hpp"

namespace cadseq::nn {

/// Dense row-major value tensor.
template <class T>
struct Array {
  std::vector<std::size_t> shape;
  std::vector<T> v;

  Array() = default;
  explicit Array(std::vector<std::size_t> s) : shape(std::move(s)), v(count(shape), T(0)) {}
  Array(std::vector<std::size_t> s, std::vector<T> data)
      : shape(std::move(s)), v(std::move(data)) {
    if (v.size() != count(shape)) fail(ErrorKind::shape_mismatch, "array data/shape mismatch");
  }

  static std::size_t count(const std::vector<std::size_t>& s) {
    return std::accumulate(s.begin(), s.end(), std::size_t(1), std::multiplies<>());
  }

  std::size_t size() const { return v.size(); }
  std::size_t rank() const { return shape.size(); }
  std::size_t dim(std::size_t i) const { return shape[i]; }

  bool same_shape(const Array& o) const { return shape == o.shape; }

  bool finite() const {
    for (const T x : v)
      if (!std::isfinite(static_cast<double>(x))) return false;
    return true;
  }
};

template <class T>
std::string shape_str(const Array<T>& a) {
  std::string s = "[";
  for (std::size_t i = 0; i < a.shape.size(); ++i)
    s += (i ? "," : "") + std::to_string(a.shape[i]);
  return s + "]";
}

}  // namespace cadseq::nn
