#pragma once

#include <array>
#include <cstdint>

#include "wcam/data/image.hpp"
#include "wcam/data/normalization.hpp"
#include "wcam/nn/tensor.hpp"

namespace wcam::data {

// Planar float image of shape (1, 3, H, W).
using FloatImage = nn::Tensor<float>;

inline constexpr int kModelSide = 602;

FloatImage to_float(const Image& image);  // [0, 1]
Image to_bytes(const FloatImage& image);  // clamps to [0, 1], rounds

// Bilinear, half-pixel centres (align_corners = false), edge clamped.
FloatImage resize_bilinear(const FloatImage& image, int out_width, int out_height);

void normalize_inplace(FloatImage& image, const Normalization& norm);

// Resized to side x side on the [0, 1] scale, not yet normalized.
FloatImage resize_for_model(const Image& image, int side = kModelSide);

FloatImage preprocess(const Image& image, const Normalization& norm, int side = kModelSide);

struct AugmentParams {
  double flip_probability = 0.5;
  double jitter = 0.05;             // brightness/contrast/saturation factors in [1 - jitter, 1 + jitter]
  double max_rotation_deg = 45.0;
  int pad = 64;
  bool random_crop = true;          // false: centre crop
  int output_side = kModelSide;

  // Parameters under which augment() returns its input unchanged.
  static AugmentParams identity() { return {0.0, 0.0, 0.0, 64, false, kModelSide}; }
};

// Flip, colour jitter, rotation and pad-then-crop, in that order, on a [0, 1]
// image. Rotation and padding fill with `fill` (the per-channel mean).
FloatImage augment(const FloatImage& image, const AugmentParams& params, std::uint64_t seed,
                   const std::array<double, 3>& fill);

// Streaming per-channel mean and population standard deviation.
class NormalizationAccumulator {
 public:
  void add(const FloatImage& image);
  void merge(const NormalizationAccumulator& other);
  std::size_t pixels() const { return count_; }
  Normalization result() const;

 private:
  std::array<double, 3> sum_{};
  std::array<double, 3> sq_{};
  std::size_t count_ = 0;
};

}  // namespace wcam::data
