#pragma once

// Versioned training checkpoints: magic, format version, the run
// configuration as JSON, and the complete trainer state.

#include <cstdint>
#include <memory>
#include <string>
#include <string_view>

#include "seads/config.hpp"
#include "seads/training.hpp"

namespace seads {

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  RunConfig config;
  std::unique_ptr<SeadsTrainer> trainer;
};

std::string checkpoint_bytes(const RunConfig& config, const SeadsTrainer& trainer);
Checkpoint checkpoint_from_bytes(std::string_view bytes);

/// Writes to `path` through a temporary file and a rename.
void save_checkpoint(const std::string& path, const RunConfig& config, const SeadsTrainer& trainer);
/// Throws FormatError for foreign, truncated or version-mismatched files.
Checkpoint load_checkpoint(const std::string& path);

}  // namespace seads
