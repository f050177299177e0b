#pragma once

#include <filesystem>

#include "jca/fusion.hpp"

namespace jca {

// Binary checkpoint: magic "AVC1", a little-endian u32 header length, a JSON
// header (variant, dims, combiner, parameter count), then each parameter as
// (u32 name length, name bytes, u32 rows, u32 cols, row-major float64
// little-endian payload). Doubles are stored exactly, so save -> load -> save
// is byte-identical.
void save_checkpoint(const std::filesystem::path& path, const FusionModel& model);
FusionModel load_checkpoint(const std::filesystem::path& path);

}  // namespace jca
