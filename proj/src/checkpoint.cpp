#include "qnn/checkpoint.hpp"

#include <bit>
#include <cstdint>
#include <cstring>
#include <fstream>

namespace qnn {

namespace {

constexpr char kMagic[4] = {'Q', 'N', 'N', '1'};

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes little-endian");

void put_u32(std::ostream& os, std::uint32_t v) { os.write(reinterpret_cast<const char*>(&v), 4); }

std::uint32_t get_u32(std::istream& is, const std::filesystem::path& path, const char* what) {
  std::uint32_t v = 0;
  if (!is.read(reinterpret_cast<char*>(&v), 4)) {
    throw CheckpointError(path.string() + ": truncated while reading " + what);
  }
  return v;
}

std::uint32_t checked_u32(std::size_t v, const char* what) {
  if (v > UINT32_MAX) throw CheckpointError(std::string("checkpoint: ") + what + " too large");
  return static_cast<std::uint32_t>(v);
}

}  // namespace

template <std::floating_point T>
void save_checkpoint(const std::filesystem::path& path, const std::vector<Parameter<T>>& params) {
  std::ofstream os(path, std::ios::binary);
  if (!os) throw CheckpointError("cannot open " + path.string() + " for writing");
  os.write(kMagic, 4);
  for (const auto& p : params) {
    put_u32(os, checked_u32(p.name.size(), "name"));
    os.write(p.name.data(), static_cast<std::streamsize>(p.name.size()));
    put_u32(os, checked_u32(p.value.rank(), "rank"));
    for (std::size_t d : p.value.shape()) put_u32(os, checked_u32(d, "extent"));
    std::vector<float> buf(p.value.vec().begin(), p.value.vec().end());
    os.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size() * 4));
  }
  if (!os) throw CheckpointError("write failed for " + path.string());
}

std::vector<Parameter<float>> read_checkpoint(const std::filesystem::path& path) {
  std::ifstream is(path, std::ios::binary);
  if (!is) throw CheckpointError("cannot open " + path.string());
  char magic[4] = {};
  if (!is.read(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    throw CheckpointError(path.string() + ": bad magic (expected QNN1)");
  }
  std::vector<Parameter<float>> out;
  while (is.peek() != std::char_traits<char>::eof()) {
    Parameter<float> p;
    p.name.resize(get_u32(is, path, "name length"));
    if (!is.read(p.name.data(), static_cast<std::streamsize>(p.name.size()))) {
      throw CheckpointError(path.string() + ": truncated name");
    }
    const std::uint32_t rank = get_u32(is, path, "rank");
    Shape shape(rank);
    for (auto& d : shape) d = get_u32(is, path, "extent");
    p.value = Tensor<float>(shape);
    const auto bytes = static_cast<std::streamsize>(p.value.size() * 4);
    if (!is.read(reinterpret_cast<char*>(p.value.data()), bytes)) {
      throw CheckpointError(path.string() + ": truncated data for '" + p.name + "'");
    }
    out.push_back(std::move(p));
  }
  return out;
}

template <std::floating_point T>
void load_checkpoint(const std::filesystem::path& path, Model<T>& model) {
  auto stored = read_checkpoint(path);
  auto& params = model.parameters();
  if (stored.size() != params.size()) {
    throw CheckpointError(path.string() + ": holds " + std::to_string(stored.size()) +
                          " tensors, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (stored[i].name != params[i].name || stored[i].value.shape() != params[i].value.shape()) {
      throw CheckpointError(path.string() + ": tensor '" + stored[i].name + "' " +
                            shape_string(stored[i].value.shape()) + " does not match '" +
                            params[i].name + "' " + shape_string(params[i].value.shape()));
    }
    params[i].value = stored[i].value.template cast<T>();
  }
}

template void save_checkpoint(const std::filesystem::path&, const std::vector<Parameter<float>>&);
template void save_checkpoint(const std::filesystem::path&, const std::vector<Parameter<double>>&);
template void load_checkpoint(const std::filesystem::path&, Model<float>&);
template void load_checkpoint(const std::filesystem::path&, Model<double>&);

}  // namespace qnn
