#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>

#include "wscd/numerics/graph.hpp"

WSCD_MODEL_NAMESPACE_BEGIN
namespace numerics {

// Binary parameter checkpoint:
//   "WSCD" <version u8 = 1>
//   repeated until EOF, in lexicographic name order:
//     <name_len u16> <name utf-8> <rank u8> <dims u32 x rank> <float32 x prod(dims)>
// All integers and floats little-endian. Values are stored as 32-bit floats
// regardless of the in-memory precision.
inline constexpr char kCheckpointMagic[4] = {'W', 'S', 'C', 'D'};
inline constexpr std::uint8_t kCheckpointVersion = 1;

using Checkpoint = std::map<std::string, Tensor, std::less<>>;

void write_checkpoint(std::ostream& out, const ParameterStore& params);
void write_checkpoint(std::ostream& out, const Checkpoint& tensors);
void save_checkpoint(const std::filesystem::path& path, const ParameterStore& params);

// Throws FormatError on bad magic/version or truncation.
Checkpoint read_checkpoint(std::istream& in);
Checkpoint load_checkpoint(const std::filesystem::path& path);

// Copies every checkpoint tensor whose name starts with `prefix` into the
// matching parameter. Missing parameters or shape mismatches throw
// DimensionError. Returns the number of tensors copied.
std::size_t assign_from_checkpoint(ParameterStore& params, const Checkpoint& ckpt,
                                   std::string_view prefix);

// In-memory copy of parameter values (full precision) and its inverse, used
// for keep-best bookkeeping during training.
Checkpoint snapshot(const ParameterStore& params, std::string_view prefix = "");
void restore(ParameterStore& params, const Checkpoint& saved);

}  // namespace numerics
WSCD_MODEL_NAMESPACE_END
