#include "wscd/numerics/checkpoint.hpp"

#include <array>
#include <bit>
#include <fstream>
#include <istream>
#include <limits>
#include <ostream>

#include "wscd/error.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

namespace {

template <typename UInt>
void put_le(std::ostream& out, UInt value) {
  std::array<char, sizeof(UInt)> bytes;
  for (std::size_t i = 0; i < sizeof(UInt); ++i)
    bytes[i] = static_cast<char>((value >> (8 * i)) & 0xFF);
  out.write(bytes.data(), bytes.size());
}

template <typename UInt>
bool get_le(std::istream& in, UInt& value) {
  std::array<unsigned char, sizeof(UInt)> bytes;
  if (!in.read(reinterpret_cast<char*>(bytes.data()), bytes.size())) return false;
  value = 0;
  for (std::size_t i = 0; i < sizeof(UInt); ++i) value |= UInt(bytes[i]) << (8 * i);
  return true;
}

void write_entry(std::ostream& out, const std::string& name, const Tensor& t) {
  if (name.size() > std::numeric_limits<std::uint16_t>::max())
    throw FormatError("checkpoint: parameter name too long: " + name);
  if (t.rank() > std::numeric_limits<std::uint8_t>::max())
    throw FormatError("checkpoint: rank too large for " + name);
  put_le<std::uint16_t>(out, static_cast<std::uint16_t>(name.size()));
  out.write(name.data(), static_cast<std::streamsize>(name.size()));
  put_le<std::uint8_t>(out, static_cast<std::uint8_t>(t.rank()));
  for (std::size_t d : t.shape()) {
    if (d > std::numeric_limits<std::uint32_t>::max())
      throw FormatError("checkpoint: dimension too large for " + name);
    put_le<std::uint32_t>(out, static_cast<std::uint32_t>(d));
  }
  for (real v : t.data()) put_le<std::uint32_t>(out, std::bit_cast<std::uint32_t>(static_cast<float>(v)));
}

void write_header(std::ostream& out) {
  out.write(kCheckpointMagic, 4);
  put_le<std::uint8_t>(out, kCheckpointVersion);
}

}  // namespace

void write_checkpoint(std::ostream& out, const ParameterStore& params) {
  write_header(out);
  for (const auto& [name, p] : params) write_entry(out, name, p.value);
  if (!out) throw InputError("checkpoint: write failed");
}

void write_checkpoint(std::ostream& out, const Checkpoint& tensors) {
  write_header(out);
  for (const auto& [name, t] : tensors) write_entry(out, name, t);
  if (!out) throw InputError("checkpoint: write failed");
}

void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InputError("cannot open checkpoint for writing: " + path.string());
  write_checkpoint(out, params);
}

Checkpoint read_checkpoint(std::istream& in) {
  char magic[4];
  if (!in.read(magic, 4) || !std::equal(magic, magic + 4, kCheckpointMagic))
    throw FormatError("checkpoint: bad magic (expected WSCD)");
  std::uint8_t version = 0;
  if (!get_le(in, version)) throw FormatError("checkpoint: truncated header");
  if (version != kCheckpointVersion)
    throw FormatError("checkpoint: unsupported version " + std::to_string(version));

  Checkpoint result;
  std::string previous;
  while (in.peek() != std::char_traits<char>::eof()) {
    std::uint16_t name_len = 0;
    if (!get_le(in, name_len)) throw FormatError("checkpoint: truncated entry header");
    std::string name(name_len, '\0');
    if (!in.read(name.data(), name_len)) throw FormatError("checkpoint: truncated name");
    if (!result.empty() && name <= previous)
      throw FormatError("checkpoint: entries not in lexicographic order at " + name);
    std::uint8_t rank = 0;
    if (!get_le(in, rank)) throw FormatError("checkpoint: truncated rank for " + name);
    Shape shape(rank);
    for (auto& d : shape) {
      std::uint32_t dim = 0;
      if (!get_le(in, dim)) throw FormatError("checkpoint: truncated dims for " + name);
      d = dim;
    }
    std::vector<real> data(shape_size(shape));
    for (auto& v : data) {
      std::uint32_t bits = 0;
      if (!get_le(in, bits)) throw FormatError("checkpoint: truncated data for " + name);
      v = static_cast<real>(std::bit_cast<float>(bits));
    }
    previous = name;
    result.emplace(std::move(name), Tensor(std::move(shape), std::move(data)));
  }
  return result;
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open checkpoint: " + path.string());
  return read_checkpoint(in);
}

std::size_t assign_from_checkpoint(ParameterStore& params, const Checkpoint& ckpt,
                                   std::string_view prefix) {
  std::size_t copied = 0;
  for (const auto& [name, tensor] : ckpt) {
    if (!name.starts_with(prefix)) continue;
    Parameter* p = params.find(name);
    if (!p) throw DimensionError("checkpoint parameter has no counterpart: " + name);
    if (p->value.shape() != tensor.shape()) {
      throw DimensionError("checkpoint shape mismatch for " + name + ": " +
                           shape_string(tensor.shape()) + " vs model " +
                           shape_string(p->value.shape()));
    }
    p->value = tensor;
    ++copied;
  }
  for (const auto& [name, p] : params) {
    if (name.starts_with(prefix) && !ckpt.contains(name))
      throw DimensionError("checkpoint lacks parameter " + name);
  }
  return copied;
}

Checkpoint snapshot(const ParameterStore& params, std::string_view prefix) {
  Checkpoint out;
  for (const auto& [name, p] : params)
    if (name.starts_with(prefix)) out.emplace(name, p.value);
  return out;
}

void restore(ParameterStore& params, const Checkpoint& saved) {
  for (const auto& [name, tensor] : saved) {
    Parameter& p = params.get(name);
    if (p.value.shape() != tensor.shape())
      throw DimensionError("restore: shape of " + name + " changed since the snapshot");
    p.value = tensor;
  }
}

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
