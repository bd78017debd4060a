#pragma once

#include <span>

#include "wcam/nn/tensor.hpp"
#include "wcam/util/error.hpp"

namespace wcam::train {

inline double mse_loss(std::span<const double> pred, std::span<const double> target) {
  if (pred.size() != target.size()) throw ArgumentError("mse_loss: length mismatch");
  if (pred.empty()) throw ArgumentError("mse_loss: empty input");
  double sum = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) sum += (pred[i] - target[i]) * (pred[i] - target[i]);
  return sum / static_cast<double>(pred.size());
}

template <typename Scalar>
double mse_loss(const nn::Vector<Scalar>& pred, const nn::Vector<Scalar>& target) {
  if (pred.size() != target.size()) throw ArgumentError("mse_loss: length mismatch");
  if (pred.size() == 0) throw ArgumentError("mse_loss: empty input");
  double sum = 0.0;
  for (nn::Index i = 0; i < pred.size(); ++i) {
    const double d = static_cast<double>(pred[i]) - static_cast<double>(target[i]);
    sum += d * d;
  }
  return sum / static_cast<double>(pred.size());
}

// d(mse)/d(pred)
template <typename Scalar>
nn::Vector<Scalar> mse_loss_grad(const nn::Vector<Scalar>& pred, const nn::Vector<Scalar>& target) {
  if (pred.size() != target.size() || pred.size() == 0) throw ArgumentError("mse_loss_grad: bad lengths");
  return (pred - target) * (Scalar(2) / static_cast<Scalar>(pred.size()));
}

}  // namespace wcam::train
