#include "tangram/raster.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>

#include "tangram/error.hpp"
#include "tangram/kernels.hpp"

namespace tangram::raster {

std::uint64_t Bitmap::count() const {
  return kernels::active().popcount(w.data(), kWords);
}

std::uint64_t Bitmap::and_count(const Bitmap& o) const {
  return kernels::active().and_popcount(w.data(), o.w.data(), kWords);
}

void Bitmap::or_with(const Bitmap& o) {
  kernels::active().or_inplace(w.data(), o.w.data(), kWords);
}

namespace {

template <typename OnPixel>
void scan_polygon(const geom::ConvexPoly& poly, const Frame& frame,
                  OnPixel&& on_pixel) {
  if (poly.n < 3) return;
  double lo_x = poly.v[0].x, hi_x = poly.v[0].x;
  double lo_y = poly.v[0].y, hi_y = poly.v[0].y;
  for (int i = 1; i < poly.n; ++i) {
    lo_x = std::min(lo_x, poly.v[i].x);
    hi_x = std::max(hi_x, poly.v[i].x);
    lo_y = std::min(lo_y, poly.v[i].y);
    hi_y = std::max(hi_y, poly.v[i].y);
  }
  // Pixel centers at (c + 0.5) * pitch + origin; half a pixel of slack keeps
  // boundary-band pixels in range.
  const auto col_lo = static_cast<int>(
      std::floor((lo_x - frame.origin_x) / frame.pitch - 1.0));
  const auto col_hi = static_cast<int>(
      std::ceil((hi_x - frame.origin_x) / frame.pitch + 1.0));
  const auto row_lo = static_cast<int>(
      std::floor((lo_y - frame.origin_y) / frame.pitch - 1.0));
  const auto row_hi = static_cast<int>(
      std::ceil((hi_y - frame.origin_y) / frame.pitch + 1.0));
  const int c0 = std::max(0, col_lo), c1 = std::min(kSize - 1, col_hi);
  const int r0 = std::max(0, row_lo), r1 = std::min(kSize - 1, row_hi);
  for (int r = r0; r <= r1; ++r) {
    const double y = frame.row_center(r);
    for (int c = c0; c <= c1; ++c) {
      if (geom::contains_boundary_aware(poly, {frame.col_center(c), y})) {
        on_pixel(c, r);
      }
    }
  }
}

}  // namespace

void rasterize_add(Bitmap& bits, const geom::ConvexPoly& poly,
                   const Frame& frame) {
  scan_polygon(poly, frame,
               [&](int c, int r) { bits.set(pixel_index(c, r)); });
}

Raster rasterize(std::span<const geom::ConvexPoly> polys, Frame frame) {
  Raster out;
  out.frame = frame;
  for (const geom::ConvexPoly& p : polys) rasterize_add(out.bits, p, frame);
  return out;
}

PixelSet piece_pixels(const geom::ConvexPoly& poly, Frame frame) {
  PixelSet out;
  rasterize_add(out.bits, poly, frame);
  out.size = static_cast<std::uint32_t>(out.bits.count());
  return out;
}

double coverage(const PixelSet& placed, const PixelSet& target) {
  if (target.size == 0) {
    throw Error(Errc::DegenerateTarget, "degenerate target region");
  }
  return static_cast<double>(placed.bits.and_count(target.bits)) /
         static_cast<double>(target.size);
}

std::string to_pgm(const Bitmap& bits) {
  std::string out = "P5\n120 120\n255\n";
  out.reserve(out.size() + kBits);
  for (int r = kSize - 1; r >= 0; --r) {
    for (int c = 0; c < kSize; ++c) {
      out.push_back(bits.test(pixel_index(c, r)) ? static_cast<char>(255)
                                                 : static_cast<char>(0));
    }
  }
  return out;
}

void write_pgm(const std::filesystem::path& path, const Bitmap& bits) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(Errc::Io, "cannot write " + path.string());
  const std::string data = to_pgm(bits);
  f.write(data.data(), static_cast<std::streamsize>(data.size()));
}

}  // namespace tangram::raster
