#pragma once

#include <string>

#include <Eigen/Dense>

#include "wcam/data/image.hpp"
#include "wcam/data/normalization.hpp"
#include "wcam/model/models.hpp"

namespace wcam::eval {

inline constexpr int kPcaComponents = 3;

struct PcaResult {
  Eigen::VectorXd mean;                          // (D)
  Eigen::MatrixXd components;                    // (D x 3), orthonormal columns
  Eigen::MatrixXd scores;                        // (P x 3), centred tokens projected on the components
  Eigen::Vector3d explained_variance;            // non-increasing
  int rank = 0;                                  // nonzero singular values found, at most 3
  std::string warning;                           // set when fewer than 3 components exist
};

// Three-component PCA of the rows of `tokens` (one token per row). Each
// component is signed so its largest-magnitude loading is positive. Missing
// components of a rank-deficient matrix are zero columns and set `warning`.
PcaResult pca3(const Eigen::MatrixXd& tokens);

// Min-max scales each score column to [0, 1]; a constant column maps to 0.
Eigen::MatrixXd scale_scores(const Eigen::MatrixXd& scores);

// Renders P = side * side scaled scores as an RGB image, row-major token
// order, each token enlarged to upscale x upscale pixels.
data::Image render_scores(const Eigen::MatrixXd& scaled, int side, int upscale = 1);

struct TokenVisualization {
  data::Image image;
  PcaResult pca;
};

// Token grid of one image through the backbone, reduced to three PCA
// components fitted on that image's tokens alone.
TokenVisualization pca_token_visualization(const data::Image& image, model::Backbone<float>& backbone,
                                           model::Index grid_side, const data::Normalization& normalization,
                                           int upscale = 1);

}  // namespace wcam::eval
