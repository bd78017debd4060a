#include "wcam/data/loader.hpp"

#include <algorithm>
#include <numeric>
#include <thread>

#include "wcam/util/error.hpp"
#include "wcam/util/random.hpp"

namespace wcam::data {

DataLoader::DataLoader(const DatasetManifest& manifest, Split split, LoaderOptions options, ImageReader reader)
    : manifest_(manifest), indices_(manifest.indices(split)), options_(options), reader_(std::move(reader)) {
  if (options_.batch_size < 1) throw ArgumentError("batch size must be at least 1");
  if (indices_.empty()) throw ConfigError("split '" + to_string(split) + "' is empty");
  options_.workers = std::max(1, options_.workers);
  if (!reader_)
    reader_ = [&m = manifest_](const LabeledSample& s) {
      try {
        return read_image(m.image_path(s));
      } catch (const IoError& e) {
        throw DecodeError("sample " + s.image_ref + " (" + s.camera_station_id + " " + format_iso(s.timestamp) +
                          "): " + e.what());
      }
    };
}

std::size_t DataLoader::batches() const {
  const auto b = static_cast<std::size_t>(options_.batch_size);
  return (indices_.size() + b - 1) / b;
}

std::vector<std::size_t> DataLoader::epoch_order(int epoch) const {
  auto order = indices_;
  if (options_.shuffle) {
    Rng rng(derive_seed(options_.seed, {static_cast<std::uint64_t>(epoch), 0x5u}));
    std::shuffle(order.begin(), order.end(), rng.engine());
  }
  return order;
}

Batch DataLoader::batch(int epoch, std::size_t b) const {
  const auto order = epoch_order(epoch);
  const auto bs = static_cast<std::size_t>(options_.batch_size);
  if (b >= batches()) throw ArgumentError("batch index out of range");
  const auto first = order.begin() + static_cast<std::ptrdiff_t>(b * bs);
  const auto last = order.begin() + static_cast<std::ptrdiff_t>(std::min(order.size(), (b + 1) * bs));
  return load({first, last}, epoch);
}

nn::Tensor<float> DataLoader::load_one(std::size_t index, int epoch) const {
  const auto& sample = manifest_.samples[index];
  auto image = resize_for_model(reader_(sample), options_.side);
  if (options_.augment) {
    auto params = options_.augment_params;
    params.output_side = options_.side;
    image = augment(image, params,
                    derive_seed(options_.seed, {static_cast<std::uint64_t>(epoch), static_cast<std::uint64_t>(index)}),
                    manifest_.normalization.mean);
  }
  normalize_inplace(image, manifest_.normalization);
  return image;
}

Batch DataLoader::load(const std::vector<std::size_t>& indices, int epoch) const {
  const auto side = static_cast<nn::Index>(options_.side);
  Batch batch{nn::Tensor<float>(static_cast<nn::Index>(indices.size()), 3, side, side),
              nn::Vector<float>(static_cast<nn::Index>(indices.size())), indices};
  const auto per_sample = batch.images.sample_size();
  auto work = [&](std::size_t k) {
    const auto img = load_one(indices[k], epoch);
    batch.images.data().segment(static_cast<nn::Index>(k) * per_sample, per_sample) = img.data();
    batch.targets[static_cast<nn::Index>(k)] = static_cast<float>(manifest_.samples[indices[k]].friction_factor);
  };
  const auto workers = std::min<std::size_t>(static_cast<std::size_t>(options_.workers), indices.size());
  if (workers <= 1) {
    for (std::size_t k = 0; k < indices.size(); ++k) work(k);
    return batch;
  }
  std::vector<std::exception_ptr> errors(workers);
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < workers; ++w)
      pool.emplace_back([&, w] {
        try {
          for (std::size_t k = w; k < indices.size(); k += workers) work(k);
        } catch (...) {
          errors[w] = std::current_exception();
        }
      });
  }
  for (auto& e : errors)
    if (e) std::rethrow_exception(e);
  return batch;
}

}  // namespace wcam::data
