#pragma once

#include <ostream>

#include <json.hpp>

namespace wscd {

// Training logs are JSON lines: one compact object per epoch.
inline void write_jsonl(std::ostream* out, const nlohmann::ordered_json& record) {
  if (out) *out << record.dump() << '\n' << std::flush;
}

}  // namespace wscd
