#include "wcam/data/transforms.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "wcam/util/error.hpp"
#include "wcam/util/random.hpp"

namespace wcam::data {

using nn::Index;

FloatImage to_float(const Image& image) {
  FloatImage out(1, 3, image.height, image.width);
  const Index plane = out.plane();
  for (Index i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c)
      out.data()[c * plane + i] = static_cast<float>(image.pixels[static_cast<std::size_t>(i) * 3 + c]) / 255.0f;
  return out;
}

Image to_bytes(const FloatImage& image) {
  Image out(static_cast<int>(image.w()), static_cast<int>(image.h()));
  const Index plane = image.plane();
  for (Index i = 0; i < plane; ++i)
    for (int c = 0; c < 3; ++c) {
      const float v = std::clamp(image.data()[c * plane + i], 0.0f, 1.0f);
      out.pixels[static_cast<std::size_t>(i) * 3 + c] = static_cast<std::uint8_t>(std::lround(v * 255.0f));
    }
  return out;
}

FloatImage resize_bilinear(const FloatImage& image, int out_width, int out_height) {
  if (out_width <= 0 || out_height <= 0) throw ArgumentError("resize target must be positive");
  const Index in_h = image.h(), in_w = image.w();
  if (in_h == out_height && in_w == out_width) return image;
  struct Tap {
    Index i0, i1;
    float w;
  };
  auto taps = [](Index in, Index out) {
    std::vector<Tap> t(static_cast<std::size_t>(out));
    const double scale = static_cast<double>(in) / static_cast<double>(out);
    for (Index o = 0; o < out; ++o) {
      const double src = std::max(0.0, (o + 0.5) * scale - 0.5);
      const Index i0 = std::min<Index>(static_cast<Index>(src), in - 1);
      t[static_cast<std::size_t>(o)] = {i0, std::min<Index>(i0 + 1, in - 1), static_cast<float>(src - i0)};
    }
    return t;
  };
  const auto ty = taps(in_h, out_height), tx = taps(in_w, out_width);
  FloatImage out(image.n(), image.c(), out_height, out_width);
  for (Index n = 0; n < image.n(); ++n)
    for (Index c = 0; c < image.c(); ++c)
      for (Index y = 0; y < out_height; ++y) {
        const auto& a = ty[static_cast<std::size_t>(y)];
        for (Index x = 0; x < out_width; ++x) {
          const auto& b = tx[static_cast<std::size_t>(x)];
          const float top = image.at(n, c, a.i0, b.i0) * (1 - b.w) + image.at(n, c, a.i0, b.i1) * b.w;
          const float bottom = image.at(n, c, a.i1, b.i0) * (1 - b.w) + image.at(n, c, a.i1, b.i1) * b.w;
          out.at(n, c, y, x) = top * (1 - a.w) + bottom * a.w;
        }
      }
  return out;
}

void normalize_inplace(FloatImage& image, const Normalization& norm) {
  for (Index n = 0; n < image.n(); ++n) {
    auto s = image.sample(n);
    for (Index c = 0; c < 3; ++c)
      s.row(c) = (s.row(c).array() - static_cast<float>(norm.mean[c])) / static_cast<float>(norm.std[c]);
  }
}

FloatImage resize_for_model(const Image& image, int side) {
  if (image.empty()) throw DecodeError("empty image");
  return resize_bilinear(to_float(image), side, side);
}

FloatImage preprocess(const Image& image, const Normalization& norm, int side) {
  auto out = resize_for_model(image, side);
  normalize_inplace(out, norm);
  return out;
}

namespace {

void clamp_unit(FloatImage& img) { img.data() = img.data().cwiseMax(0.0f).cwiseMin(1.0f); }

void adjust_brightness(FloatImage& img, float factor) {
  img.data() *= factor;
  clamp_unit(img);
}

Eigen::ArrayXf grayscale(const FloatImage& img) {
  const auto s = img.sample(0);
  return 0.299f * s.row(0).array() + 0.587f * s.row(1).array() + 0.114f * s.row(2).array();
}

void adjust_contrast(FloatImage& img, float factor) {
  const float mean = grayscale(img).mean();
  img.data() = ((img.data().array() - mean) * factor + mean).matrix();
  clamp_unit(img);
}

void adjust_saturation(FloatImage& img, float factor) {
  const Eigen::ArrayXf gray = grayscale(img);
  auto s = img.sample(0);
  for (Index c = 0; c < 3; ++c) s.row(c) = ((s.row(c).array().transpose() - gray) * factor + gray).transpose();
  clamp_unit(img);
}

FloatImage flip_horizontal(const FloatImage& img) {
  FloatImage out(img.shape());
  for (Index c = 0; c < img.c(); ++c)
    for (Index y = 0; y < img.h(); ++y)
      for (Index x = 0; x < img.w(); ++x) out.at(0, c, y, x) = img.at(0, c, y, img.w() - 1 - x);
  return out;
}

FloatImage rotate(const FloatImage& img, double degrees, const std::array<double, 3>& fill) {
  const double theta = degrees * std::numbers::pi / 180.0;
  const double cs = std::cos(theta), sn = std::sin(theta);
  const double cx = (img.w() - 1) / 2.0, cy = (img.h() - 1) / 2.0;
  FloatImage out(img.shape());
  for (Index y = 0; y < img.h(); ++y)
    for (Index x = 0; x < img.w(); ++x) {
      // inverse map: rotate the output coordinate back into the source
      const double dx = x - cx, dy = y - cy;
      const double sx = cs * dx + sn * dy + cx;
      const double sy = -sn * dx + cs * dy + cy;
      if (sx < 0 || sy < 0 || sx > img.w() - 1 || sy > img.h() - 1) {
        for (Index c = 0; c < 3; ++c) out.at(0, c, y, x) = static_cast<float>(fill[c]);
        continue;
      }
      const Index x0 = static_cast<Index>(sx), y0 = static_cast<Index>(sy);
      const Index x1 = std::min<Index>(x0 + 1, img.w() - 1), y1 = std::min<Index>(y0 + 1, img.h() - 1);
      const float wx = static_cast<float>(sx - x0), wy = static_cast<float>(sy - y0);
      for (Index c = 0; c < 3; ++c) {
        const float top = img.at(0, c, y0, x0) * (1 - wx) + img.at(0, c, y0, x1) * wx;
        const float bottom = img.at(0, c, y1, x0) * (1 - wx) + img.at(0, c, y1, x1) * wx;
        out.at(0, c, y, x) = top * (1 - wy) + bottom * wy;
      }
    }
  return out;
}

FloatImage pad_crop(const FloatImage& img, int pad, Index ox, Index oy, int side, const std::array<double, 3>& fill) {
  FloatImage out(1, 3, side, side);
  for (Index c = 0; c < 3; ++c)
    for (Index y = 0; y < side; ++y) {
      const Index sy = y + oy - pad;
      for (Index x = 0; x < side; ++x) {
        const Index sx = x + ox - pad;
        out.at(0, c, y, x) = (sy < 0 || sx < 0 || sy >= img.h() || sx >= img.w()) ? static_cast<float>(fill[c])
                                                                                  : img.at(0, c, sy, sx);
      }
    }
  return out;
}

}  // namespace

FloatImage augment(const FloatImage& image, const AugmentParams& params, std::uint64_t seed,
                   const std::array<double, 3>& fill) {
  if (image.n() != 1 || image.c() != 3) throw ShapeError("augment expects a single RGB image, got " + image.shape().str());
  const Index slack_x = image.w() + 2 * params.pad - params.output_side;
  const Index slack_y = image.h() + 2 * params.pad - params.output_side;
  if (slack_x < 0 || slack_y < 0) throw ShapeError("augment: padded image smaller than the crop");

  // All draws happen up front in a fixed order so the stream does not depend
  // on which operations end up being no-ops.
  Rng rng(seed);
  const bool flip = rng.uniform() < params.flip_probability;
  const double brightness = rng.uniform(1.0 - params.jitter, 1.0 + params.jitter);
  const double contrast = rng.uniform(1.0 - params.jitter, 1.0 + params.jitter);
  const double saturation = rng.uniform(1.0 - params.jitter, 1.0 + params.jitter);
  const double angle = rng.uniform(-params.max_rotation_deg, params.max_rotation_deg);
  const Index ox = params.random_crop ? rng.integer(0, slack_x) : slack_x / 2;
  const Index oy = params.random_crop ? rng.integer(0, slack_y) : slack_y / 2;

  FloatImage out = flip ? flip_horizontal(image) : image;
  if (brightness != 1.0) adjust_brightness(out, static_cast<float>(brightness));
  if (contrast != 1.0) adjust_contrast(out, static_cast<float>(contrast));
  if (saturation != 1.0) adjust_saturation(out, static_cast<float>(saturation));
  if (angle != 0.0) out = rotate(out, angle, fill);
  return pad_crop(out, params.pad, ox, oy, params.output_side, fill);
}

void NormalizationAccumulator::add(const FloatImage& image) {
  for (Index n = 0; n < image.n(); ++n) {
    const auto s = image.sample(n);
    for (Index c = 0; c < 3; ++c) {
      const auto row = s.row(c).cast<double>();
      sum_[c] += row.sum();
      sq_[c] += row.squaredNorm();
    }
    count_ += static_cast<std::size_t>(image.plane());
  }
}

void NormalizationAccumulator::merge(const NormalizationAccumulator& other) {
  for (int c = 0; c < 3; ++c) {
    sum_[c] += other.sum_[c];
    sq_[c] += other.sq_[c];
  }
  count_ += other.count_;
}

Normalization NormalizationAccumulator::result() const {
  if (count_ == 0) throw MissingDataError("normalization statistics need at least one image");
  Normalization n;
  const double count = static_cast<double>(count_);
  for (int c = 0; c < 3; ++c) {
    n.mean[c] = sum_[c] / count;
    const double var = std::max(0.0, sq_[c] / count - n.mean[c] * n.mean[c]);
    n.std[c] = var > 0.0 ? std::sqrt(var) : 1.0;
  }
  return n;
}

}  // namespace wcam::data
