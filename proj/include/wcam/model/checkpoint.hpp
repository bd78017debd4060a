#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "wcam/data/normalization.hpp"
#include "wcam/model/config.hpp"
#include "wcam/nn/parameter.hpp"

namespace wcam::model {

inline constexpr std::uint32_t kCheckpointSchemaVersion = 1;

struct StoredTensor {
  std::vector<std::int64_t> shape;
  std::vector<float> values;
};

// Single-file archive: 8-byte magic "WCAMCKPT", u32 schema version, u64
// header length, JSON header (tensor directory plus free-form metadata), then
// the float32 little-endian payload of every tensor in directory order.
struct TensorArchive {
  nlohmann::json header = nlohmann::json::object();
  std::map<std::string, StoredTensor> tensors;
};

void write_tensor_archive(const std::filesystem::path& path, const TensorArchive& archive);
TensorArchive read_tensor_archive(const std::filesystem::path& path);

template <typename Scalar>
void export_parameters(const nn::ParameterList<Scalar>& params, TensorArchive& archive) {
  for (const auto* p : params) {
    StoredTensor t;
    t.shape.assign(p->shape.begin(), p->shape.end());
    t.values.resize(static_cast<std::size_t>(p->size()));
    for (nn::Index i = 0; i < p->size(); ++i) t.values[static_cast<std::size_t>(i)] = static_cast<float>(p->value[i]);
    archive.tensors[p->name] = std::move(t);
  }
}

// Copies archive tensors into matching parameters. Every listed parameter
// must be present with an identical shape.
template <typename Scalar>
void import_parameters(const nn::ParameterList<Scalar>& params, const TensorArchive& archive,
                       const std::string& strip_prefix = "") {
  for (auto* p : params) {
    std::string key = p->name;
    if (!strip_prefix.empty() && key.rfind(strip_prefix, 0) == 0) key = key.substr(strip_prefix.size());
    auto it = archive.tensors.find(key);
    if (it == archive.tensors.end()) it = archive.tensors.find(p->name);
    if (it == archive.tensors.end()) throw CheckpointError("missing tensor '" + key + "'");
    const std::vector<std::int64_t> expected(p->shape.begin(), p->shape.end());
    if (it->second.shape != expected) throw CheckpointError("shape mismatch for tensor '" + key + "'");
    for (nn::Index i = 0; i < p->size(); ++i)
      p->value[i] = static_cast<Scalar>(it->second.values[static_cast<std::size_t>(i)]);
  }
}

}  // namespace wcam::model
