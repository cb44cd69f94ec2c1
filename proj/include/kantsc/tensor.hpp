#pragma once

#include <cstddef>
#include <initializer_list>
#include <vector>

#include "kantsc/errors.hpp"

namespace kantsc {

// Dense row-major f64 array. The one numeric carrier used everywhere.
struct Tensor {
  std::vector<std::size_t> shape;
  std::vector<double> data;

  Tensor() = default;

  explicit Tensor(std::vector<std::size_t> s) : shape(std::move(s)) {
    data.assign(numel_of(shape), 0.0);
  }

  Tensor(std::vector<std::size_t> s, std::vector<double> d)
      : shape(std::move(s)), data(std::move(d)) {
    if (numel_of(shape) != data.size())
      throw ConfigError("tensor: shape does not match data length");
  }

  static std::size_t numel_of(const std::vector<std::size_t>& s) {
    std::size_t n = 1;
    for (std::size_t dim : s) n *= dim;
    return n;
  }

  static Tensor zeros(std::vector<std::size_t> s) { return Tensor(std::move(s)); }

  static Tensor full(std::vector<std::size_t> s, double v) {
    Tensor t(std::move(s));
    for (double& x : t.data) x = v;
    return t;
  }

  // 2D convenience for [rows, cols] matrices.
  static Tensor matrix(std::size_t rows, std::size_t cols,
                       std::initializer_list<double> vals) {
    Tensor t({rows, cols});
    std::size_t i = 0;
    for (double v : vals) t.data[i++] = v;
    if (i != t.data.size()) throw ConfigError("tensor: initializer size mismatch");
    return t;
  }

  std::size_t numel() const { return data.size(); }
  std::size_t dim(std::size_t i) const { return shape.at(i); }
  std::size_t rows() const { return shape.empty() ? 0 : shape[0]; }
  std::size_t cols() const { return shape.size() < 2 ? 1 : shape[1]; }

  double& at(std::size_t i, std::size_t j) { return data[i * shape[1] + j]; }
  double at(std::size_t i, std::size_t j) const { return data[i * shape[1] + j]; }
  double& at(std::size_t i, std::size_t j, std::size_t k) {
    return data[(i * shape[1] + j) * shape[2] + k];
  }
  double at(std::size_t i, std::size_t j, std::size_t k) const {
    return data[(i * shape[1] + j) * shape[2] + k];
  }

  Tensor reshape(std::vector<std::size_t> s) const {
    if (numel_of(s) != data.size())
      throw ConfigError("tensor: reshape element count mismatch");
    return Tensor(std::move(s), data);
  }

  void fill(double v) {
    for (double& x : data) x = v;
  }

  bool same_shape(const Tensor& other) const { return shape == other.shape; }

  bool all_finite() const;
};

bool tensors_bitwise_equal(const Tensor& a, const Tensor& b);

}  // namespace kantsc
