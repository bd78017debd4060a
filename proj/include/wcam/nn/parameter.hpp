#pragma once

#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "wcam/nn/tensor.hpp"
#include "wcam/util/random.hpp"

namespace wcam::nn {

// A named, flat parameter array with its gradient accumulator. Buffers (batch
// norm running statistics) share the type but are never optimized.
template <typename Scalar>
struct Parameter {
  std::string name;
  std::vector<Index> shape;
  Vector<Scalar> value;
  Vector<Scalar> grad;
  bool trainable = true;
  bool buffer = false;

  Parameter() = default;
  Parameter(std::string name_, std::vector<Index> shape_, bool is_buffer = false)
      : name(std::move(name_)), shape(std::move(shape_)), buffer(is_buffer) {
    const Index n = std::accumulate(shape.begin(), shape.end(), Index{1}, std::multiplies<>());
    value = Vector<Scalar>::Zero(n);
    grad = Vector<Scalar>::Zero(n);
    trainable = !is_buffer;
  }

  Index size() const { return value.size(); }
  bool optimizable() const { return trainable && !buffer; }
  void zero_grad() { grad.setZero(); }

  // Uniform in [-1/sqrt(fan_in), 1/sqrt(fan_in)].
  void init_fan_in_uniform(Index fan_in, Rng& rng) {
    const double bound = 1.0 / std::sqrt(static_cast<double>(fan_in));
    for (Index i = 0; i < value.size(); ++i) value[i] = static_cast<Scalar>(rng.uniform(-bound, bound));
  }
};

template <typename Scalar>
using ParameterList = std::vector<Parameter<Scalar>*>;

template <typename Scalar>
Index count_parameters(const ParameterList<Scalar>& params, bool trainable_only = false) {
  Index n = 0;
  for (const auto* p : params) {
    if (p->buffer) continue;
    if (trainable_only && !p->trainable) continue;
    n += p->size();
  }
  return n;
}

template <typename Scalar>
void set_trainable(const ParameterList<Scalar>& params, bool trainable) {
  for (auto* p : params)
    if (!p->buffer) p->trainable = trainable;
}

template <typename Scalar>
void zero_grads(const ParameterList<Scalar>& params) {
  for (auto* p : params) p->zero_grad();
}

inline std::string join_name(const std::string& prefix, const std::string& leaf) {
  return prefix.empty() ? leaf : prefix + "." + leaf;
}

}  // namespace wcam::nn
