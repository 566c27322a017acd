#pragma once

#include <filesystem>
#include <iosfwd>

#include "wscd/cli/run_config.hpp"

namespace wscd::tools {

using pipeline::RunConfig;

// Each command reads its inputs from `rc`, writes into `out` (a directory,
// or the checkpoint path for train-morph) and reports progress on `msg`.
void build_dataset(RunConfig& rc, const std::filesystem::path& out, std::ostream& msg);
void train_morph(RunConfig& rc, const std::filesystem::path& out, std::ostream& msg);
void train_detector(RunConfig& rc, const std::filesystem::path& out, std::ostream& msg);
void ablate(RunConfig& rc, const std::filesystem::path& out, std::ostream& msg);

}  // namespace wscd::tools
