#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

#include "manquant/geometry.hpp"

namespace manquant {

// Lossless dataset container:
//   bytes 0-3   ASCII "MRC1"
//   bytes 4-7   n, little-endian u32
//   bytes 8-11  D, little-endian u32
//   then n*D IEEE-754 binary64 values, little-endian, row-major.
std::vector<std::uint8_t> encode_container(const Dataset& data);
Dataset decode_container(std::span<const std::uint8_t> bytes);

void write_container(const Dataset& data, const std::filesystem::path& path);
Dataset read_container(const std::filesystem::path& path);

// Comma-separated rows of decimal reals, one point per line. Blank lines
// and lines starting with '#' are skipped. All rows must have equal width.
Dataset read_csv(const std::filesystem::path& path);

// Picks the reader by content: "MRC1" magic, IDX3 magic, otherwise CSV.
Dataset read_dataset(const std::filesystem::path& path);

}  // namespace manquant
