#pragma once

#include <string_view>

namespace wscd {

inline constexpr std::string_view kVersion = "0.1.0";
// Bumped whenever an op's forward or backward numerics change.
inline constexpr std::string_view kNumericsVersion = "1.0";

}  // namespace wscd
