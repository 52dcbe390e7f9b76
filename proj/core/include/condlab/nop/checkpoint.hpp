#pragma once

#include "condlab/binio.hpp"
#include "condlab/nop/model.hpp"

#include <cstdint>
#include <filesystem>
#include <optional>

namespace condlab::nop {

inline constexpr std::uint32_t checkpoint_version = 1;

enum class CheckpointKind : std::uint32_t {
    model = 0,   // trained neural operator
    oracle = 1,  // evaluation passthrough: predictions are the stored targets
};

/// CNOP file: magic "CNOP", u32 version, u32 kind, serialized grid and model spec,
/// u64 parameter count, f64 parameters, CRC-32 trailer. Little-endian throughout.
struct Checkpoint {
    CheckpointKind kind = CheckpointKind::model;
    Grid2D grid;
    std::optional<NOModel> model;  // present for kind == model

    static Checkpoint of(NOModel model);
    static Checkpoint oracle(const Grid2D& grid);
};

void write_grid(ByteWriter& w, const Grid2D& g);
Grid2D read_grid(ByteReader& r);
void write_spec(ByteWriter& w, const ModelSpec& s);
ModelSpec read_spec(ByteReader& r);

std::vector<std::uint8_t> encode_checkpoint(const Checkpoint& c);
Checkpoint decode_checkpoint(std::span<const std::uint8_t> bytes, const std::string& what = "checkpoint");

void save_checkpoint(const std::filesystem::path& path, const Checkpoint& c);
Checkpoint load_checkpoint(const std::filesystem::path& path);

} // namespace condlab::nop
