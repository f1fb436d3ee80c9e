#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <span>
#include <string>

#include "tangram/geometry.hpp"

namespace tangram::raster {

inline constexpr int kSize = 120;              // pixels per side
inline constexpr int kBits = kSize * kSize;
inline constexpr int kWords = kBits / 64;      // 225
inline constexpr double kWorkspace = 14.0;     // workspace units per side

/// Affine workspace->pixel map. Pixel (col, row) has its center at
/// ((col + 0.5) * pitch + origin_x, (row + 0.5) * pitch + origin_y).
struct Frame {
  double origin_x = 0.0;
  double origin_y = 0.0;
  double pitch = kWorkspace / kSize;

  double col_center(int col) const { return origin_x + (col + 0.5) * pitch; }
  double row_center(int row) const { return origin_y + (row + 0.5) * pitch; }
  bool operator==(const Frame&) const = default;
};

struct Bitmap {
  std::array<std::uint64_t, kWords> w{};

  void set(int idx) { w[idx >> 6] |= 1ULL << (idx & 63); }
  bool test(int idx) const { return (w[idx >> 6] >> (idx & 63)) & 1; }
  void clear() { w.fill(0); }
  std::uint64_t count() const;
  std::uint64_t and_count(const Bitmap& o) const;
  void or_with(const Bitmap& o);
  bool operator==(const Bitmap&) const = default;
};

inline int pixel_index(int col, int row) { return row * kSize + col; }

struct Raster {
  Bitmap bits;
  Frame frame;
  bool operator==(const Raster&) const = default;
};

/// Pixel set of one piece in one raster frame.
struct PixelSet {
  Bitmap bits;
  std::uint32_t size = 0;
};

// Pixel on iff its center lies inside any polygon (boundary pixels follow
// the top-left rule). Deterministic for identical inputs.
Raster rasterize(std::span<const geom::ConvexPoly> polys, Frame frame = {});
void rasterize_add(Bitmap& bits, const geom::ConvexPoly& poly,
                   const Frame& frame);

PixelSet piece_pixels(const geom::ConvexPoly& poly, Frame frame = {});

// |placed & target| / |target|. Throws Errc::DegenerateTarget on an empty
// target set.
double coverage(const PixelSet& placed, const PixelSet& target);

// P5 PGM, maxval 255, on pixels 255. Row 0 of the file is the top of the
// workspace (max y).
std::string to_pgm(const Bitmap& bits);
void write_pgm(const std::filesystem::path& path, const Bitmap& bits);

}  // namespace tangram::raster
