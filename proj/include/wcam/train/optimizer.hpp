#pragma once

#include <vector>

#include "wcam/nn/parameter.hpp"
#include "wcam/util/error.hpp"

namespace wcam::train {

// SGD with heavy-ball momentum and L2 weight decay folded into the gradient:
//   d = g + wd * p;  v = mu * v + d;  p -= lr * v
template <typename Scalar>
class SgdMomentum {
 public:
  SgdMomentum(nn::ParameterList<Scalar> params, double momentum, double weight_decay)
      : params_(std::move(params)), momentum_(momentum), weight_decay_(weight_decay) {
    if (momentum < 0.0 || momentum >= 1.0) throw ArgumentError("momentum must be in [0, 1)");
    if (weight_decay < 0.0) throw ArgumentError("weight decay must be non-negative");
    for (const auto* p : params_) {
      if (!p->optimizable()) throw ArgumentError("parameter '" + p->name + "' is not optimizable");
      velocity_.push_back(nn::Vector<Scalar>::Zero(p->size()));
    }
  }

  void step(double lr) {
    const auto mu = static_cast<Scalar>(momentum_), wd = static_cast<Scalar>(weight_decay_);
    const auto rate = static_cast<Scalar>(lr);
    for (std::size_t i = 0; i < params_.size(); ++i) {
      auto& p = *params_[i];
      velocity_[i] = mu * velocity_[i] + p.grad + wd * p.value;
      p.value -= rate * velocity_[i];
    }
  }

  void zero_grad() {
    for (auto* p : params_) p->zero_grad();
  }

  const nn::ParameterList<Scalar>& parameters() const { return params_; }
  double momentum() const { return momentum_; }
  double weight_decay() const { return weight_decay_; }

 private:
  nn::ParameterList<Scalar> params_;
  std::vector<nn::Vector<Scalar>> velocity_;
  double momentum_;
  double weight_decay_;
};

}  // namespace wcam::train
