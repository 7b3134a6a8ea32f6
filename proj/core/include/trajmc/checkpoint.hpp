#pragma once

#include <string>

#include "trajmc/samplers.hpp"

namespace trajmc {

/// Writes the full sampler state as JSON. The file is replaced atomically,
/// so an interrupted write leaves the previous checkpoint intact.
void save_checkpoint(const std::string& path, const RunState& state);

RunState load_checkpoint(const std::string& path);

}  // namespace trajmc
