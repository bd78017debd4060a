#include "wcam/model/checkpoint.hpp"

#include <array>
#include <bit>
#include <cstring>
#include <fstream>

#include "wcam/util/error.hpp"

namespace wcam::model {

namespace {

constexpr std::array<char, 8> kMagic{'W', 'C', 'A', 'M', 'C', 'K', 'P', 'T'};

static_assert(std::endian::native == std::endian::little, "archive payload is written in native little-endian order");

template <typename T>
void write_pod(std::ostream& out, T value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  if (!in) throw CheckpointError("truncated archive header");
  return value;
}

}  // namespace

void write_tensor_archive(const std::filesystem::path& path, const TensorArchive& archive) {
  nlohmann::json header = archive.header;
  header["schema_version"] = kCheckpointSchemaVersion;
  auto directory = nlohmann::json::array();
  std::uint64_t offset = 0;
  for (const auto& [name, t] : archive.tensors) {
    directory.push_back({{"name", name}, {"shape", t.shape}, {"offset", offset}, {"count", t.values.size()}});
    offset += t.values.size();
  }
  header["tensors"] = directory;
  const std::string text = header.dump();

  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  const auto tmp = std::filesystem::path(path.string() + ".tmp");
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write archive " + path.string());
    out.write(kMagic.data(), kMagic.size());
    write_pod<std::uint32_t>(out, kCheckpointSchemaVersion);
    write_pod<std::uint64_t>(out, text.size());
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    for (const auto& [name, t] : archive.tensors)
      out.write(reinterpret_cast<const char*>(t.values.data()), static_cast<std::streamsize>(t.values.size() * sizeof(float)));
    if (!out) throw IoError("failed writing archive " + path.string());
  }
  std::filesystem::rename(tmp, path);
}

TensorArchive read_tensor_archive(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open archive " + path.string());
  std::array<char, 8> magic{};
  in.read(magic.data(), magic.size());
  if (!in || magic != kMagic) throw CheckpointError(path.string() + " is not a tensor archive");
  const auto version = read_pod<std::uint32_t>(in);
  if (version != kCheckpointSchemaVersion)
    throw CheckpointError("unsupported archive schema version " + std::to_string(version));
  const auto header_len = read_pod<std::uint64_t>(in);
  std::string text(header_len, '\0');
  in.read(text.data(), static_cast<std::streamsize>(header_len));
  if (!in) throw CheckpointError("truncated archive header in " + path.string());

  TensorArchive archive;
  try {
    archive.header = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw CheckpointError("corrupt archive header in " + path.string() + ": " + e.what());
  }
  const auto base = in.tellg();
  for (const auto& entry : archive.header.at("tensors")) {
    StoredTensor t;
    t.shape = entry.at("shape").get<std::vector<std::int64_t>>();
    const auto count = entry.at("count").get<std::uint64_t>();
    const auto offset = entry.at("offset").get<std::uint64_t>();
    t.values.resize(count);
    in.seekg(base + static_cast<std::streamoff>(offset * sizeof(float)));
    in.read(reinterpret_cast<char*>(t.values.data()), static_cast<std::streamsize>(count * sizeof(float)));
    if (!in) throw CheckpointError("truncated tensor payload in " + path.string());
    archive.tensors.emplace(entry.at("name").get<std::string>(), std::move(t));
  }
  archive.header.erase("tensors");
  return archive;
}

}  // namespace wcam::model
