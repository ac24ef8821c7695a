#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include "visco/dynamics.hpp"

namespace visco {

/// VEL2 snapshot layout, all little-endian:
///   "VEL2" | u32 version | u32 n | f64 L | f64 t | f64 mu | f64 eta | f64 delta |
///   u1, u2, F11, F12, F21, F22 as row-major f64 planes of n^2 values.
inline constexpr std::uint32_t kSnapshotVersion = 1;

struct Snapshot {
  State state;
  ModelParams params;
};

std::vector<std::uint8_t> encode_snapshot(const State& state, const ModelParams& params);
/// Throws Error(IoError) on a bad magic, unknown version or truncated payload.
Snapshot decode_snapshot(const std::vector<std::uint8_t>& bytes);

void write_snapshot(const std::filesystem::path& path, const State& state, const ModelParams& params);
Snapshot read_snapshot(const std::filesystem::path& path);

std::vector<std::uint8_t> read_file_bytes(const std::filesystem::path& path);

}  // namespace visco
