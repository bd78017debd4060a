#include "wcam/eval/pca.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "wcam/data/transforms.hpp"

namespace wcam::eval {

PcaResult pca3(const Eigen::MatrixXd& tokens) {
  const auto p = tokens.rows(), d = tokens.cols();
  if (p < 2 || d < 1) throw ArgumentError("PCA needs at least two tokens of positive dimension");
  if (!tokens.allFinite()) throw ArgumentError("PCA input has non-finite values");

  PcaResult r;
  r.mean = tokens.colwise().mean().transpose();
  const Eigen::MatrixXd centred = tokens.rowwise() - r.mean.transpose();
  Eigen::BDCSVD<Eigen::MatrixXd> svd(centred, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();

  const double tol = s.size() > 0 ? s[0] * static_cast<double>(std::max(p, d)) * std::numeric_limits<double>::epsilon()
                                  : 0.0;
  r.components = Eigen::MatrixXd::Zero(d, kPcaComponents);
  r.scores = Eigen::MatrixXd::Zero(p, kPcaComponents);
  r.explained_variance.setZero();
  for (int k = 0; k < kPcaComponents && k < s.size(); ++k) {
    if (!(s[k] > tol)) break;
    Eigen::VectorXd v = svd.matrixV().col(k);
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v[arg] < 0) v = -v;
    r.components.col(k) = v;
    r.scores.col(k) = centred * v;
    r.explained_variance[k] = s[k] * s[k] / static_cast<double>(p - 1);
    r.rank = k + 1;
  }
  if (r.rank < kPcaComponents)
    r.warning = "token matrix has rank " + std::to_string(r.rank) + "; missing PCA components padded with zeros";
  return r;
}

Eigen::MatrixXd scale_scores(const Eigen::MatrixXd& scores) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(scores.rows(), scores.cols());
  for (Eigen::Index k = 0; k < scores.cols(); ++k) {
    const double lo = scores.col(k).minCoeff(), hi = scores.col(k).maxCoeff();
    if (hi > lo) out.col(k) = ((scores.col(k).array() - lo) / (hi - lo)).matrix();
  }
  return out.cwiseMax(0.0).cwiseMin(1.0);
}

data::Image render_scores(const Eigen::MatrixXd& scaled, int side, int upscale) {
  if (side <= 0 || upscale <= 0) throw ArgumentError("side and upscale must be positive");
  if (scaled.rows() != static_cast<Eigen::Index>(side) * side || scaled.cols() != kPcaComponents)
    throw ShapeError("expected " + std::to_string(side * side) + " x 3 scores");
  data::Image img(side * upscale, side * upscale);
  for (int y = 0; y < img.height; ++y)
    for (int x = 0; x < img.width; ++x) {
      const auto token = static_cast<Eigen::Index>(y / upscale) * side + x / upscale;
      for (int c = 0; c < 3; ++c)
        img.at(x, y, c) = static_cast<std::uint8_t>(std::lround(scaled(token, c) * 255.0));
    }
  return img;
}

TokenVisualization pca_token_visualization(const data::Image& image, model::Backbone<float>& backbone,
                                           model::Index grid_side, const data::Normalization& normalization,
                                           int upscale) {
  const auto side = static_cast<int>(grid_side * backbone.spec().patch_size);
  const auto input = data::preprocess(image, normalization, side);
  const auto grid = model::backbone_extract(input, backbone);  // (1, D, g, g)
  const auto d = grid.c(), p = grid.h() * grid.w();
  // channel-major (D x P) storage read as P tokens of D features
  const Eigen::MatrixXd tokens =
      Eigen::Map<const Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic>>(grid.data().data(), p, d).cast<double>();
  TokenVisualization out;
  out.pca = pca3(tokens);
  out.image = render_scores(scale_scores(out.pca.scores), static_cast<int>(grid.h()), upscale);
  return out;
}

}  // namespace wcam::eval
