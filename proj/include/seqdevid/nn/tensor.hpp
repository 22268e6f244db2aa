#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <initializer_list>
#include <span>
#include <string>
#include <vector>

#include "seqdevid/error.hpp"

namespace seqdevid::nn {

using Vec = std::vector<double>;

/// Dense row-major matrix of doubles.
class Tensor2 {
 public:
  Tensor2() = default;
  Tensor2(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Tensor2(std::size_t rows, std::size_t cols, std::vector<double> data)
      : rows_(rows), cols_(cols), data_(std::move(data)) {
    if (data_.size() != rows_ * cols_) {
      throw Error(Errc::ShapeMismatch, "tensor data length " + std::to_string(data_.size()) +
                                           " != " + std::to_string(rows_) + "x" + std::to_string(cols_));
    }
  }
  Tensor2(std::initializer_list<std::initializer_list<double>> rows) {
    rows_ = rows.size();
    cols_ = rows_ ? rows.begin()->size() : 0;
    data_.reserve(rows_ * cols_);
    for (const auto& r : rows) {
      if (r.size() != cols_) throw Error(Errc::ShapeMismatch, "ragged initializer");
      data_.insert(data_.end(), r.begin(), r.end());
    }
  }

  std::size_t rows() const noexcept { return rows_; }
  std::size_t cols() const noexcept { return cols_; }
  std::size_t size() const noexcept { return data_.size(); }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::vector<double>& data() noexcept { return data_; }
  const std::vector<double>& data() const noexcept { return data_; }

  void fill(double v) { std::fill(data_.begin(), data_.end(), v); }

  bool all_finite() const {
    for (double v : data_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  friend bool operator==(const Tensor2&, const Tensor2&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

inline void require_shape(const Tensor2& t, std::size_t rows, std::size_t cols, const char* what) {
  if (t.rows() != rows || t.cols() != cols) {
    throw Error(Errc::ShapeMismatch, std::string(what) + ": expected " + std::to_string(rows) + "x" +
                                         std::to_string(cols) + ", got " + std::to_string(t.rows()) + "x" +
                                         std::to_string(t.cols()));
  }
}

inline void require_len(std::span<const double> v, std::size_t n, const char* what) {
  if (v.size() != n) {
    throw Error(Errc::ShapeMismatch,
                std::string(what) + ": expected length " + std::to_string(n) + ", got " + std::to_string(v.size()));
  }
}

inline double sigmoid(double x) {
  if (x >= 0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

/// out += M * x
inline void gemv_acc(const Tensor2& m, std::span<const double> x, std::span<double> out) {
  const std::size_t cols = m.cols();
  const double* p = m.data().data();
  for (std::size_t r = 0; r < m.rows(); ++r, p += cols) {
    double s = 0.0;
    for (std::size_t c = 0; c < cols; ++c) s += p[c] * x[c];
    out[r] += s;
  }
}

/// out += M^T * y
inline void gemv_t_acc(const Tensor2& m, std::span<const double> y, std::span<double> out) {
  const std::size_t cols = m.cols();
  const double* p = m.data().data();
  for (std::size_t r = 0; r < m.rows(); ++r, p += cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) out[c] += p[c] * yr;
  }
}

/// M += y * x^T
inline void outer_acc(Tensor2& m, std::span<const double> y, std::span<const double> x) {
  const std::size_t cols = m.cols();
  double* p = m.data().data();
  for (std::size_t r = 0; r < m.rows(); ++r, p += cols) {
    const double yr = y[r];
    if (yr == 0.0) continue;
    for (std::size_t c = 0; c < cols; ++c) p[c] += yr * x[c];
  }
}

}  // namespace seqdevid::nn
