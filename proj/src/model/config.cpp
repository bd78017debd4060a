#include "wcam/model/config.hpp"

#include <algorithm>

#include "wcam/util/error.hpp"

namespace wcam::model {

namespace {

struct ArchName {
  Architecture arch;
  const char* name;
};

constexpr ArchName kArchNames[] = {
    {Architecture::wcamnet, "wcamnet"},
    {Architecture::resnet50_style, "resnet50-style"},
    {Architecture::resnet152_style, "resnet152-style"},
    {Architecture::vgg19_style, "vgg19-style"},
    {Architecture::backbone_linear_head, "backbone-linear-head"},
    {Architecture::vit_full_finetune, "vit-full-finetune"},
};

}  // namespace

BackboneSpec BackboneSpec::pretrained_base(std::string weights_path) {
  BackboneSpec s;
  s.kind = BackboneKind::pretrained_base;
  s.embed_dim = kBaseEmbedDim;
  s.depth = 12;
  s.heads = 12;
  s.weights_path = std::move(weights_path);
  return s;
}

BackboneSpec BackboneSpec::pretrained_large(std::string weights_path) {
  BackboneSpec s;
  s.kind = BackboneKind::pretrained_large;
  s.embed_dim = kLargeEmbedDim;
  s.depth = 24;
  s.heads = 16;
  s.weights_path = std::move(weights_path);
  return s;
}

BackboneSpec BackboneSpec::tiny(Index embed_dim, Index depth, Index heads) {
  BackboneSpec s;
  s.kind = BackboneKind::tiny_random_frozen;
  s.embed_dim = embed_dim;
  s.depth = depth;
  s.heads = heads;
  return s;
}

nn::TransformerDims BackboneSpec::dims(Index grid_side) const {
  nn::TransformerDims d;
  d.embed_dim = embed_dim;
  d.depth = depth;
  d.heads = heads;
  d.patch_size = patch_size;
  d.grid_side = grid_side;
  return d;
}

void ModelConfig::validate() const {
  if (backbone.embed_dim <= 0) throw ConfigError("backbone.embed_dim must be positive");
  if (backbone.patch_size != kPatchSize) throw ConfigError("backbone.patch_size must be 14");
  if (backbone.depth < 0) throw ConfigError("backbone.depth must be >= 0");
  if (backbone.depth > 0 && (backbone.heads <= 0 || backbone.embed_dim % backbone.heads != 0))
    throw ConfigError("backbone.heads must divide backbone.embed_dim");
  if (grid_side <= 0) throw ConfigError("grid_side must be positive");
  if (se_reduction <= 0) throw ConfigError("se_reduction must be positive");
  if (width_divisor <= 0) throw ConfigError("width_divisor must be positive");
  if (architecture == Architecture::wcamnet && !backbone.frozen)
    throw ConfigError("wcamnet requires a frozen backbone");
}

std::string to_string(Architecture a) {
  for (const auto& e : kArchNames)
    if (e.arch == a) return e.name;
  return "unknown";
}

std::string to_string(BackboneKind k) {
  switch (k) {
    case BackboneKind::pretrained_base: return "pretrained-base";
    case BackboneKind::pretrained_large: return "pretrained-large";
    case BackboneKind::tiny_random_frozen: return "tiny-random-frozen";
  }
  return "unknown";
}

const std::vector<std::string>& registered_architectures() {
  static const std::vector<std::string> names = [] {
    std::vector<std::string> v;
    for (const auto& e : kArchNames) v.emplace_back(e.name);
    return v;
  }();
  return names;
}

Architecture parse_architecture(const std::string& name) {
  for (const auto& e : kArchNames)
    if (name == e.name) return e.arch;
  std::string valid;
  for (const auto& n : registered_architectures()) valid += (valid.empty() ? "" : ", ") + n;
  throw RegistryError("unknown architecture '" + name + "'; valid names: " + valid);
}

BackboneKind parse_backbone_kind(const std::string& name) {
  if (name == "pretrained-base") return BackboneKind::pretrained_base;
  if (name == "pretrained-large") return BackboneKind::pretrained_large;
  if (name == "tiny-random-frozen") return BackboneKind::tiny_random_frozen;
  throw ConfigError("unknown backbone kind '" + name +
                    "'; valid kinds: pretrained-base, pretrained-large, tiny-random-frozen");
}

void to_json(nlohmann::json& j, const BackboneSpec& s) {
  j = nlohmann::json{{"kind", to_string(s.kind)},     {"embed_dim", s.embed_dim}, {"depth", s.depth},
                     {"heads", s.heads},              {"patch_size", s.patch_size}, {"frozen", s.frozen},
                     {"weights_path", s.weights_path}, {"seed", s.seed}};
}

void from_json(const nlohmann::json& j, BackboneSpec& s) {
  s = BackboneSpec{};
  if (j.contains("kind")) {
    const auto kind = parse_backbone_kind(j.at("kind").get<std::string>());
    if (kind == BackboneKind::pretrained_base) s = BackboneSpec::pretrained_base("");
    if (kind == BackboneKind::pretrained_large) s = BackboneSpec::pretrained_large("");
  }
  s.embed_dim = j.value("embed_dim", s.embed_dim);
  s.depth = j.value("depth", s.depth);
  s.heads = j.value("heads", s.heads);
  s.patch_size = j.value("patch_size", s.patch_size);
  s.frozen = j.value("frozen", s.frozen);
  s.weights_path = j.value("weights_path", s.weights_path);
  s.seed = j.value("seed", s.seed);
}

void to_json(nlohmann::json& j, const ModelConfig& c) {
  j = nlohmann::json{{"architecture", to_string(c.architecture)},
                     {"backbone", c.backbone},
                     {"use_hd_branch", c.use_hd_branch},
                     {"use_se_blocks", c.use_se_blocks},
                     {"se_reduction", c.se_reduction},
                     {"grid_side", c.grid_side},
                     {"width_divisor", c.width_divisor},
                     {"init_seed", c.init_seed}};
}

void from_json(const nlohmann::json& j, ModelConfig& c) {
  c = ModelConfig{};
  c.architecture = parse_architecture(j.at("architecture").get<std::string>());
  if (j.contains("backbone")) c.backbone = j.at("backbone").get<BackboneSpec>();
  c.use_hd_branch = j.value("use_hd_branch", c.use_hd_branch);
  c.use_se_blocks = j.value("use_se_blocks", c.use_se_blocks);
  c.se_reduction = j.value("se_reduction", c.se_reduction);
  c.grid_side = j.value("grid_side", c.grid_side);
  c.width_divisor = j.value("width_divisor", c.width_divisor);
  c.init_seed = j.value("init_seed", c.init_seed);
}

ModelConfig desk_config(Architecture a) {
  ModelConfig c;
  c.architecture = a;
  c.backbone = BackboneSpec::tiny();
  c.width_divisor = 16;
  if (a == Architecture::vit_full_finetune) {
    // A transformer needs at least one attention block to be fine-tuned as one.
    c.backbone = BackboneSpec::tiny(kTinyEmbedDim, 1, 2);
    c.backbone.frozen = false;
  }
  return c;
}

ModelConfig reference_config(Architecture a, const std::string& weights_path) {
  ModelConfig c;
  c.architecture = a;
  c.backbone = BackboneSpec::pretrained_base(weights_path);
  if (a == Architecture::vit_full_finetune) c.backbone.frozen = false;
  return c;
}

}  // namespace wcam::model
