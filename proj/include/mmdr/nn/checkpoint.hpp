#pragma once

#include <cstdint>
#include <string>

#include "mmdr/nn/network.hpp"

namespace mmdr::nn {

// Run provenance carried in the checkpoint header.
struct CheckpointMeta {
    std::string pipeline_mode = "mmdr";
    std::int32_t k = 4;
    std::uint64_t seed = 0;
    std::uint64_t samples = 0;  // environment samples consumed so far
    std::int64_t adam_steps = 0;
};

// Binary format: "MMDRCKPT" magic, version, meta, architecture, block table
// (name/shape/offset), then every parameter block as little-endian f64 in
// declaration order. A human-readable block table is mirrored to
// `path.manifest`.
void save_checkpoint(const std::string& path, const Network& net,
                     const CheckpointMeta& meta);

// Rebuilds the network from the stored architecture and parameters.
// Throws std::runtime_error on malformed or mismatching files.
Network load_checkpoint(const std::string& path, CheckpointMeta* meta);

}  // namespace mmdr::nn
