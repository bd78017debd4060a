#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/nn/transformer.hpp"

namespace wcam::model {

using nn::Index;

enum class Architecture {
  wcamnet,
  resnet50_style,
  resnet152_style,
  vgg19_style,
  backbone_linear_head,
  vit_full_finetune,
};

enum class BackboneKind { pretrained_base, pretrained_large, tiny_random_frozen };

inline constexpr Index kPatchSize = 14;
inline constexpr Index kGridSide = 43;          // 602 / 14
inline constexpr Index kInputSide = kGridSide * kPatchSize;
inline constexpr Index kHdChannels = 64;
inline constexpr Index kDefaultSeReduction = 8;
inline constexpr Index kBaseEmbedDim = 768;
inline constexpr Index kLargeEmbedDim = 1024;
inline constexpr Index kTinyEmbedDim = 32;

struct BackboneSpec {
  BackboneKind kind = BackboneKind::tiny_random_frozen;
  Index embed_dim = kTinyEmbedDim;
  Index depth = 0;
  Index heads = 1;
  Index patch_size = kPatchSize;
  bool frozen = true;
  std::string weights_path;          // pretrained kinds only
  std::uint64_t seed = 0x5eedULL;    // initialization of random kinds

  static BackboneSpec pretrained_base(std::string weights_path);
  static BackboneSpec pretrained_large(std::string weights_path);
  static BackboneSpec tiny(Index embed_dim = kTinyEmbedDim, Index depth = 0, Index heads = 1);

  bool pretrained() const { return kind != BackboneKind::tiny_random_frozen; }
  nn::TransformerDims dims(Index grid_side) const;
};

struct ModelConfig {
  Architecture architecture = Architecture::wcamnet;
  BackboneSpec backbone;
  bool use_hd_branch = true;
  bool use_se_blocks = true;
  Index se_reduction = kDefaultSeReduction;
  Index grid_side = kGridSide;
  // Channel-width divisor for the CNN baselines (1 = reference widths).
  Index width_divisor = 1;
  std::uint64_t init_seed = 1;

  Index input_side() const { return grid_side * backbone.patch_size; }
  void validate() const;
};

std::string to_string(Architecture a);
std::string to_string(BackboneKind k);
Architecture parse_architecture(const std::string& name);
BackboneKind parse_backbone_kind(const std::string& name);
const std::vector<std::string>& registered_architectures();

void to_json(nlohmann::json& j, const BackboneSpec& s);
void from_json(const nlohmann::json& j, BackboneSpec& s);
void to_json(nlohmann::json& j, const ModelConfig& c);
void from_json(const nlohmann::json& j, ModelConfig& c);

// Desk-scale defaults: the tiny frozen backbone and CNN baselines at 1/16 width.
ModelConfig desk_config(Architecture a);
ModelConfig reference_config(Architecture a, const std::string& weights_path);

}  // namespace wcam::model
