#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

namespace tangram::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;

  Vec2 operator+(Vec2 o) const { return {x + o.x, y + o.y}; }
  Vec2 operator-(Vec2 o) const { return {x - o.x, y - o.y}; }
  Vec2 operator*(double s) const { return {x * s, y * s}; }
};

inline double cross(Vec2 a, Vec2 b) { return a.x * b.y - a.y * b.x; }
inline double dot(Vec2 a, Vec2 b) { return a.x * b.x + a.y * b.y; }
double length(Vec2 a);

// Convex polygon, CCW. Everything placed in the workspace is a transformed
// tangram piece (3 or 4 vertices); the extra headroom is for tests and for
// clipping intermediates.
struct ConvexPoly {
  static constexpr int kMaxVerts = 8;
  std::array<Vec2, kMaxVerts> v{};
  int n = 0;

  Vec2& operator[](int i) { return v[i]; }
  const Vec2& operator[](int i) const { return v[i]; }
  static ConvexPoly of(std::initializer_list<Vec2> pts);
};

ConvexPoly translated(const ConvexPoly& p, Vec2 d);

/// Planar placement: piece centroid moved to (x, y) after rotating by theta.
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta = 0.0;  // radians, normalized to [0, 2pi)

  static Pose make(double x, double y, double theta);
};

double normalize_angle(double theta);

enum class PieceId : std::uint8_t { LT1, LT2, MT, SQ, ST1, ST2, PG };
inline constexpr int kPieceCount = 7;

struct Piece {
  PieceId id;
  const char* name;
  ConvexPoly shape;           // canonical vertices, CCW
  Vec2 centroid;              // rotation pivot
  double area;
  int rotational_symmetry;    // distinct orientations under 45-degree bins
};

const std::array<Piece, kPieceCount>& canonical_pieces();
const Piece& piece(PieceId id);
PieceId piece_from_name(std::string_view name);  // throws Errc::UnknownPiece

// Placement order: largest piece first, ties in this fixed order.
inline constexpr std::array<PieceId, kPieceCount> kAssemblyOrder = {
    PieceId::LT1, PieceId::LT2, PieceId::MT, PieceId::SQ,
    PieceId::PG,  PieceId::ST1, PieceId::ST2};

// Two placed pieces count as overlapping when their intersection area
// reaches this; below one raster pixel's area (14/120)^2.
inline constexpr double kOverlapEps = 1e-3;

double polygon_area(const ConvexPoly& p);   // shoelace, CCW positive
Vec2 polygon_centroid(const ConvexPoly& p);
double polygon_perimeter(const ConvexPoly& p);

// Rotate the canonical shape about its centroid by pose.theta, then move the
// centroid to (pose.x, pose.y). Angles within 1e-9 of a multiple of 45
// degrees use exact table values so grid-aligned placements stay exact.
ConvexPoly transform(const Piece& piece, const Pose& pose);

double intersection_area(const ConvexPoly& a, const ConvexPoly& b);

struct SeparateResult {
  ConvexPoly poly;
  bool resolved = false;
  int iterations = 0;
};

// Push `moving` out of overlap with `fixed` by minimum-translation vectors,
// deepest overlap first, until every pairwise intersection area is below
// kOverlapEps or the iteration budget runs out. Total overlap never
// increases across iterations; when no translation can reduce it the search
// stops early and reports unresolved. Rotation is never changed.
SeparateResult separate(const ConvexPoly& moving,
                        std::span<const ConvexPoly> fixed, int max_iter,
                        std::vector<double>* overlap_trace = nullptr);

// Total boundary length of the union of interior-disjoint polygons; edge
// runs shared by two polygons are excluded from both sides.
double silhouette_perimeter(std::span<const ConvexPoly> polys);

bool within_box(const ConvexPoly& p, double lo, double hi);

// Pixel-center membership with the boundary rule: a point exactly on an
// edge (within a 1e-9 band) belongs to the polygon iff the edge is a
// top-left edge, so abutting pieces partition boundary pixels.
bool contains_boundary_aware(const ConvexPoly& p, Vec2 pt);

}  // namespace tangram::geom
