#pragma once

#include <cstddef>
#include <cstdint>
#include <iosfwd>

// Kept apart from commands.hpp: the implementation is built against the
// 64-bit model while the other commands use the 32-bit one.
namespace wscd::tools {

struct SelfcheckOptions {
  std::size_t instances = 20;
  std::size_t calls = 1000;
  std::uint64_t seed = 7;
  double tolerance = 1e-3;
  bool inject_fault = false;
};

// Runs in double precision. Returns true when every check passes.
bool selfcheck(const SelfcheckOptions& options, std::ostream& msg);

}  // namespace wscd::tools
