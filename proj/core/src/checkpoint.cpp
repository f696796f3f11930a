#include <cstdint>
#include <fstream>

#include "regretforge/errors.hpp"
#include "regretforge/tensor.hpp"

namespace regretforge::tensor {

namespace {

constexpr char kMagic[] = "RFCK1\n";
constexpr std::size_t kMagicLen = sizeof(kMagic) - 1;
constexpr std::uint64_t kMaxRank = 8;

void put_u64(std::ofstream& f, std::uint64_t v) { f.write(reinterpret_cast<const char*>(&v), sizeof v); }

std::uint64_t get_u64(std::ifstream& f, const std::filesystem::path& path) {
  std::uint64_t v = 0;
  if (!f.read(reinterpret_cast<char*>(&v), sizeof v)) {
    throw ConfigError("truncated checkpoint " + path.string());
  }
  return v;
}

}  // namespace

void save_checkpoint(const ParamStore& store, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary | std::ios::trunc);
  if (!f) throw ConfigError("cannot write checkpoint " + path.string());
  f.write(kMagic, kMagicLen);
  put_u64(f, store.size());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto& name = store.name(i);
    const auto& t = store.value(i);
    put_u64(f, name.size());
    f.write(name.data(), static_cast<std::streamsize>(name.size()));
    put_u64(f, t.rank());
    for (auto d : t.shape()) put_u64(f, d);
    f.write(reinterpret_cast<const char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(double)));
  }
  if (!f) throw ConfigError("failed writing checkpoint " + path.string());
}

ParamStore load_checkpoint(const std::filesystem::path& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open checkpoint " + path.string());
  char magic[kMagicLen];
  if (!f.read(magic, kMagicLen) || std::string_view(magic, kMagicLen) != std::string_view(kMagic, kMagicLen)) {
    throw ConfigError("bad checkpoint magic in " + path.string());
  }
  ParamStore store;
  const auto count = get_u64(f, path);
  for (std::uint64_t i = 0; i < count; ++i) {
    const auto len = get_u64(f, path);
    if (len > 4096) throw ConfigError("corrupt checkpoint name length in " + path.string());
    std::string name(len, '\0');
    if (!f.read(name.data(), static_cast<std::streamsize>(len))) throw ConfigError("truncated checkpoint");
    const auto rank = get_u64(f, path);
    if (rank > kMaxRank) throw ConfigError("corrupt checkpoint rank in " + path.string());
    Shape shape(rank);
    for (auto& d : shape) d = get_u64(f, path);
    Tensor t(shape);
    if (!f.read(reinterpret_cast<char*>(t.data().data()), static_cast<std::streamsize>(t.size() * sizeof(double)))) {
      throw ConfigError("truncated checkpoint " + path.string());
    }
    store.add(std::move(name), std::move(t));
  }
  return store;
}

void load_checkpoint_into(ParamStore& store, const std::filesystem::path& path) {
  const auto loaded = load_checkpoint(path);
  if (loaded.size() != store.size()) throw ConfigError("checkpoint parameter count mismatch: " + path.string());
  for (std::size_t i = 0; i < store.size(); ++i) {
    const auto j = loaded.index(store.name(i));
    if (loaded.value(j).shape() != store.value(i).shape()) {
      throw ConfigError("checkpoint shape mismatch for '" + store.name(i) + "'");
    }
    store.value(i) = loaded.value(j);
  }
}

}  // namespace regretforge::tensor
