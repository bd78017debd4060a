#include "wcam/eval/predict.hpp"

namespace wcam::eval {

Predictions predict(model::RegressionModel<float>& model, const data::DatasetManifest& manifest, data::Split split,
                    int batch_size, const data::DataLoader::ImageReader& reader, int workers) {
  data::LoaderOptions options;
  options.batch_size = batch_size;
  options.side = static_cast<int>(model.input_side());
  options.workers = workers;
  const data::DataLoader loader(manifest, split, options, reader);

  Predictions out;
  for (std::size_t b = 0; b < loader.batches(); ++b) {
    const auto batch = loader.batch(0, b);
    const auto pred = model.forward(batch.images, nn::Mode::eval);
    for (nn::Index i = 0; i < pred.size(); ++i) {
      out.preds.push_back(static_cast<double>(pred[i]));
      out.targets.push_back(manifest.samples[batch.indices[static_cast<std::size_t>(i)]].friction_factor);
    }
    out.indices.insert(out.indices.end(), batch.indices.begin(), batch.indices.end());
  }
  model.release_cache();
  return out;
}

}  // namespace wcam::eval
