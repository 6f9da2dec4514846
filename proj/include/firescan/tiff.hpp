#pragma once

#include "firescan/grid.hpp"

#include <cstdint>
#include <filesystem>
#include <span>
#include <vector>

namespace firescan::tiff {

/// Decoded first image of a TIFF file. Samples are stored pixel-interleaved,
/// row-major, widened to 16 bits regardless of the on-disk depth.
struct Raster {
  int width = 0;
  int height = 0;
  int samples_per_pixel = 1;
  int bits_per_sample = 16;
  std::vector<std::uint16_t> data;

  std::uint16_t at(int row, int col, int sample = 0) const {
    return data[(static_cast<std::size_t>(row) * width + col) * samples_per_pixel + sample];
  }
};

/// Reads baseline TIFF: strips or tiles, chunky or planar, 8/16-bit unsigned,
/// compression none/LZW/Deflate/PackBits, optional horizontal predictor.
/// Throws std::runtime_error naming the file on anything else.
Raster read(const std::filesystem::path& path);
Raster decode(std::span<const std::uint8_t> bytes);

DnGrid read_u16_band(const std::filesystem::path& path);
BoolGrid read_mask(const std::filesystem::path& path);

/// Writes uncompressed little-endian, strip-organized, chunky TIFF with one
/// sample per plane. All planes must share dimensions.
void write_u16(const std::filesystem::path& path, std::span<const DnGrid> planes);
void write_u16(const std::filesystem::path& path, const DnGrid& band);
/// Single-sample 8-bit mask, values 0/1.
void write_mask(const std::filesystem::path& path, const BoolGrid& mask);

std::vector<std::uint8_t> encode_u16(std::span<const DnGrid> planes);
std::vector<std::uint8_t> encode_u8(const Grid<std::uint8_t>& plane);

}  // namespace firescan::tiff
