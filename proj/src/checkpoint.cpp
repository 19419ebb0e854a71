#include "patchvote/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <stdexcept>

namespace patchvote {

namespace {

constexpr char kMagic[4] = {'P', 'V', 'W', '1'};
constexpr uint32_t kVersion = 1;

void put_u32(std::ostream& out, uint32_t v) {
  unsigned char b[4] = {
      (unsigned char)(v & 0xff), (unsigned char)((v >> 8) & 0xff),
      (unsigned char)((v >> 16) & 0xff), (unsigned char)((v >> 24) & 0xff)};
  out.write(reinterpret_cast<const char*>(b), 4);
}

void put_string(std::ostream& out, const std::string& s) {
  put_u32(out, uint32_t(s.size()));
  out.write(s.data(), std::streamsize(s.size()));
}

void put_f32(std::ostream& out, const float* data, size_t n) {
  static_assert(sizeof(float) == 4);
  // x86 is little-endian; floats are written verbatim.
  out.write(reinterpret_cast<const char*>(data), std::streamsize(n * 4));
}

struct Reader {
  std::ifstream in;
  std::string path;

  void read(void* dst, size_t n) {
    in.read(reinterpret_cast<char*>(dst), std::streamsize(n));
    if (size_t(in.gcount()) != n)
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': unexpected end of file");
  }
  uint32_t u32() {
    unsigned char b[4];
    read(b, 4);
    return uint32_t(b[0]) | uint32_t(b[1]) << 8 | uint32_t(b[2]) << 16 |
           uint32_t(b[3]) << 24;
  }
  std::string str() {
    uint32_t n = u32();
    if (n > (1u << 20))
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': implausible string length");
    std::string s(n, '\0');
    read(s.data(), n);
    return s;
  }
};

struct RawArray {
  std::vector<uint32_t> dims;
  std::vector<float> data;
};

void write_array(std::ostream& out, const std::string& name,
                 const std::vector<uint32_t>& dims, const float* data,
                 size_t count) {
  put_string(out, name);
  put_u32(out, uint32_t(dims.size()));
  size_t n = 1;
  for (uint32_t d : dims) {
    put_u32(out, d);
    n *= d;
  }
  if (n != count) throw std::logic_error("array dims/count mismatch");
  put_f32(out, data, count);
}

}  // namespace

void save_checkpoint(const SmallCnn<float>& net,
                     const std::vector<std::string>& labels,
                     const CheckpointMeta& meta, const std::string& path) {
  if (int(labels.size()) != net.num_classes())
    throw std::invalid_argument(
        "label count " + std::to_string(labels.size()) +
        " does not match class count " + std::to_string(net.num_classes()));
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");

  out.write(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, uint32_t(labels.size()));
  for (const std::string& label : labels) put_string(out, label);
  put_u32(out, uint32_t(net.input_size()));

  auto tensors = net.tensors();
  uint32_t extra = (meta.grid ? 1 : 0) + (meta.augment ? 1 : 0);
  put_u32(out, uint32_t(tensors.size()) + extra);
  std::span<const float> params = net.parameters();
  for (const auto& t : tensors)
    write_array(out, t.name, t.dims, params.data() + t.offset, t.count);
  if (meta.grid) {
    float g[2] = {float(meta.grid->rows), float(meta.grid->cols)};
    write_array(out, "meta.grid", {2}, g, 2);
  }
  if (meta.augment) {
    float a = float(int(*meta.augment));
    write_array(out, "meta.augment", {1}, &a, 1);
  }
  out.flush();
  if (!out) throw std::runtime_error("cannot write checkpoint '" + path + "'");
}

LoadedCheckpoint load_checkpoint(const std::string& path) {
  Reader r;
  r.path = path;
  r.in.open(path, std::ios::binary);
  if (!r.in) throw std::runtime_error("cannot open checkpoint '" + path + "'");

  char magic[4];
  r.read(magic, 4);
  if (std::memcmp(magic, kMagic, 4) != 0)
    throw std::runtime_error("corrupt checkpoint '" + path + "': bad magic");
  uint32_t version = r.u32();
  if (version != kVersion)
    throw std::runtime_error("corrupt checkpoint '" + path +
                             "': unsupported version " +
                             std::to_string(version));

  uint32_t num_classes = r.u32();
  if (num_classes < 2 || num_classes > (1u << 20))
    throw std::runtime_error("corrupt checkpoint '" + path +
                             "': implausible class count");
  std::vector<std::string> labels;
  labels.reserve(num_classes);
  for (uint32_t i = 0; i < num_classes; ++i) labels.push_back(r.str());
  uint32_t input_size = r.u32();
  if (input_size < 8 || input_size > (1u << 16))
    throw std::runtime_error("corrupt checkpoint '" + path +
                             "': implausible input size");

  uint32_t array_count = r.u32();
  std::map<std::string, RawArray> arrays;
  for (uint32_t i = 0; i < array_count; ++i) {
    std::string name = r.str();
    uint32_t rank = r.u32();
    if (rank > 8)
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': implausible rank");
    RawArray a;
    size_t n = 1;
    for (uint32_t d = 0; d < rank; ++d) {
      uint32_t dim = r.u32();
      a.dims.push_back(dim);
      n *= dim;
    }
    if (n > (1u << 28))
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': implausible array size");
    a.data.resize(n);
    r.read(a.data.data(), n * 4);
    if (!arrays.emplace(std::move(name), std::move(a)).second)
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': duplicate array");
  }

  LoadedCheckpoint result;

  // Meta arrays are provenance, not weights.
  if (auto it = arrays.find("meta.grid"); it != arrays.end()) {
    if (it->second.data.size() != 2)
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': bad meta.grid");
    result.meta.grid = GridSpec{int(it->second.data[0]),
                                int(it->second.data[1])};
    arrays.erase(it);
  }
  if (auto it = arrays.find("meta.augment"); it != arrays.end()) {
    if (it->second.data.size() != 1)
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': bad meta.augment");
    int kind = int(it->second.data[0]);
    if (kind < 0 || kind > int(AugmentKind::kTang))
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': bad meta.augment");
    result.meta.augment = AugmentKind(kind);
    arrays.erase(it);
  }

  auto weight = [&](const std::string& name) -> const RawArray& {
    auto it = arrays.find(name);
    if (it == arrays.end())
      throw std::runtime_error("corrupt checkpoint '" + path + "': missing " +
                               name);
    return it->second;
  };

  const RawArray& c1 = weight("conv1.weight");
  const RawArray& c2 = weight("conv2.weight");
  const RawArray& c3 = weight("conv3.weight");
  if (c1.dims.size() != 4 || c2.dims.size() != 4 || c3.dims.size() != 4)
    throw std::runtime_error("corrupt checkpoint '" + path +
                             "': conv weights must be rank 4");
  std::array<int, 3> widths = {int(c1.dims[0]), int(c2.dims[0]),
                               int(c3.dims[0])};
  if (widths[0] < 1 || widths[1] < 1 || widths[2] < 1)
    throw std::runtime_error("corrupt checkpoint '" + path +
                             "': bad conv widths");
  SmallCnn<float> net(int(num_classes), int(input_size), 0, widths);

  std::span<float> params = net.parameters();
  size_t consumed = 0;
  for (const auto& t : net.tensors()) {
    const RawArray& a = weight(t.name);
    if (a.dims != t.dims)
      throw std::runtime_error("corrupt checkpoint '" + path +
                               "': shape mismatch for " + t.name);
    std::memcpy(params.data() + t.offset, a.data.data(),
                a.data.size() * sizeof(float));
    ++consumed;
  }
  if (consumed != arrays.size())
    throw std::runtime_error("corrupt checkpoint '" + path +
                             "': unexpected extra arrays");

  result.net = std::move(net);
  result.labels = std::move(labels);
  return result;
}

}  // namespace patchvote
