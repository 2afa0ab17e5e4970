#pragma once

#include <cstdint>
#include <memory>
#include <string>
#include <vector>

#include "ctvol/model.hpp"

namespace ctvol {

// Single-file checkpoint:
//   bytes 0..7   little-endian uint64, JSON manifest length L
//   bytes 8..8+L manifest: {"config", "params": [{name, offset, shape}...],
//                           "total", "step", "seed"}
//   rest         little-endian float64 parameter blob (`total` values)
// Manifest offsets tile the blob exactly, no gaps or overlaps.
std::vector<std::uint8_t> serialize_checkpoint(SegModel& model, std::uint64_t step,
                                               std::uint64_t seed);

struct LoadedCheckpoint {
    ModelConfig config;
    std::uint64_t step = 0;
    std::uint64_t seed = 0;
    std::unique_ptr<SegModel> model;
};

// Validates the manifest tiling and loads parameters into a model built
// from the embedded config.
LoadedCheckpoint checkpoint_from_bytes(const std::vector<std::uint8_t>& bytes);

void save_checkpoint(const std::string& path, SegModel& model, std::uint64_t step,
                     std::uint64_t seed);
LoadedCheckpoint load_checkpoint(const std::string& path);

}  // namespace ctvol
