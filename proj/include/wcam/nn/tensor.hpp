#pragma once

#include <Eigen/Dense>

#include <array>
#include <cstdint>
#include <string>

#include "wcam/util/error.hpp"

namespace wcam::nn {

using Index = Eigen::Index;

template <typename Scalar>
using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

template <typename Scalar>
using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;

template <typename Scalar>
using RowMatrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct Shape4 {
  Index n = 0, c = 0, h = 0, w = 0;

  Index numel() const { return n * c * h * w; }
  bool operator==(const Shape4&) const = default;
  std::string str() const {
    return "(" + std::to_string(n) + ", " + std::to_string(c) + ", " + std::to_string(h) + ", " +
           std::to_string(w) + ")";
  }
};

// Dense NCHW activation block. Storage is a single contiguous Eigen vector;
// per-sample views are (C x H*W) row-major maps so each channel is a
// contiguous row.
template <typename Scalar>
class Tensor {
 public:
  using SampleMap = Eigen::Map<RowMatrix<Scalar>>;
  using ConstSampleMap = Eigen::Map<const RowMatrix<Scalar>>;

  Tensor() = default;
  Tensor(Index n, Index c, Index h, Index w) : shape_{n, c, h, w}, data_(Vector<Scalar>::Zero(n * c * h * w)) {}
  explicit Tensor(const Shape4& s) : Tensor(s.n, s.c, s.h, s.w) {}

  const Shape4& shape() const { return shape_; }
  Index n() const { return shape_.n; }
  Index c() const { return shape_.c; }
  Index h() const { return shape_.h; }
  Index w() const { return shape_.w; }
  Index plane() const { return shape_.h * shape_.w; }
  Index sample_size() const { return shape_.c * plane(); }
  Index numel() const { return shape_.numel(); }
  bool empty() const { return numel() == 0; }

  Vector<Scalar>& data() { return data_; }
  const Vector<Scalar>& data() const { return data_; }

  SampleMap sample(Index i) { return SampleMap(data_.data() + i * sample_size(), shape_.c, plane()); }
  ConstSampleMap sample(Index i) const {
    return ConstSampleMap(data_.data() + i * sample_size(), shape_.c, plane());
  }

  Scalar& at(Index n, Index c, Index y, Index x) { return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x]; }
  Scalar at(Index n, Index c, Index y, Index x) const {
    return data_[((n * shape_.c + c) * shape_.h + y) * shape_.w + x];
  }

  void set_zero() { data_.setZero(); }

  template <typename Other>
  Tensor<Other> cast() const {
    Tensor<Other> out(shape_);
    out.data() = data_.template cast<Other>();
    return out;
  }

 private:
  Shape4 shape_{};
  Vector<Scalar> data_;
};

template <typename Scalar>
void require_shape(const Tensor<Scalar>& t, Index c, Index h, Index w, const char* where) {
  if (t.c() != c || t.h() != h || t.w() != w) {
    throw ShapeError(std::string(where) + ": expected (N, " + std::to_string(c) + ", " + std::to_string(h) + ", " +
                     std::to_string(w) + "), got " + t.shape().str());
  }
}

enum class Mode { train, eval };

}  // namespace wcam::nn
