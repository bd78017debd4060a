#pragma once

#include <cstdint>
#include <functional>
#include <vector>

#include "wcam/data/manifest.hpp"
#include "wcam/data/transforms.hpp"

namespace wcam::data {

struct Batch {
  nn::Tensor<float> images;        // (B, 3, side, side), normalized
  nn::Vector<float> targets;       // friction factors
  std::vector<std::size_t> indices;  // manifest sample indices
};

struct LoaderOptions {
  int batch_size = 16;
  bool shuffle = false;
  bool augment = false;
  AugmentParams augment_params;
  int workers = 1;
  int side = kModelSide;
  std::uint64_t seed = 0;
};

// Reads and prepares the samples of one split. Sample randomness comes from
// derive_seed(seed, {epoch, sample index}), so batch contents depend only on
// (seed, epoch) and never on the number of workers.
class DataLoader {
 public:
  using ImageReader = std::function<Image(const LabeledSample&)>;

  DataLoader(const DatasetManifest& manifest, Split split, LoaderOptions options, ImageReader reader = {});

  std::size_t size() const { return indices_.size(); }
  std::size_t batches() const;
  // Manifest indices in epoch order.
  std::vector<std::size_t> epoch_order(int epoch) const;
  Batch batch(int epoch, std::size_t b) const;
  Batch load(const std::vector<std::size_t>& indices, int epoch) const;

  const LoaderOptions& options() const { return options_; }

 private:
  nn::Tensor<float> load_one(std::size_t index, int epoch) const;

  const DatasetManifest& manifest_;
  std::vector<std::size_t> indices_;
  LoaderOptions options_;
  ImageReader reader_;
};

}  // namespace wcam::data
