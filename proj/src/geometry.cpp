#include "tangram/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "tangram/error.hpp"

namespace tangram::geom {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kOnEdgeBand = 1e-9;   // distance band for "exactly on edge"
constexpr double kColinearTol = 1e-7;  // shared-edge detection distance

// cos/sin snapped to exact values at multiples of 45 degrees.
void rot_cs(double theta, double* c, double* s) {
  const double step = kPi / 4.0;
  const long long k = std::llround(theta / step);
  if (std::abs(theta - static_cast<double>(k) * step) < 1e-9) {
    static const double r = std::sqrt(0.5);
    static const double table[8][2] = {{1, 0},  {r, r},   {0, 1},  {-r, r},
                                       {-1, 0}, {-r, -r}, {0, -1}, {r, -r}};
    const int idx = static_cast<int>(((k % 8) + 8) % 8);
    *c = table[idx][0];
    *s = table[idx][1];
    return;
  }
  *c = std::cos(theta);
  *s = std::sin(theta);
}

bool top_left_edge(Vec2 e) {
  double ey = e.y;
  if (std::abs(ey) <= 1e-12 * (std::abs(e.x) + std::abs(e.y))) ey = 0.0;
  return ey < 0.0 || (ey == 0.0 && e.x < 0.0);
}

struct BBox {
  double lo_x, lo_y, hi_x, hi_y;
};

BBox bbox_of(const ConvexPoly& p) {
  BBox b{p.v[0].x, p.v[0].y, p.v[0].x, p.v[0].y};
  for (int i = 1; i < p.n; ++i) {
    b.lo_x = std::min(b.lo_x, p.v[i].x);
    b.lo_y = std::min(b.lo_y, p.v[i].y);
    b.hi_x = std::max(b.hi_x, p.v[i].x);
    b.hi_y = std::max(b.hi_y, p.v[i].y);
  }
  return b;
}

bool bbox_disjoint(const ConvexPoly& a, const ConvexPoly& b) {
  const BBox ba = bbox_of(a), bb = bbox_of(b);
  return ba.hi_x <= bb.lo_x || bb.hi_x <= ba.lo_x || ba.hi_y <= bb.lo_y ||
         bb.hi_y <= ba.lo_y;
}

double total_overlap(const ConvexPoly& moving,
                     std::span<const ConvexPoly> fixed) {
  double total = 0.0;
  for (const ConvexPoly& f : fixed) total += intersection_area(moving, f);
  return total;
}

// Minimum-translation vector pushing `a` out of `b` (SAT over both edge
// normal sets). Returns false when already separated.
bool sat_mtv(const ConvexPoly& a, const ConvexPoly& b, Vec2* mtv) {
  double best = std::numeric_limits<double>::infinity();
  Vec2 best_axis{};
  double best_sign = 1.0;
  const ConvexPoly* polys[2] = {&a, &b};
  for (const ConvexPoly* p : polys) {
    for (int i = 0; i < p->n; ++i) {
      const Vec2 e = (*p)[(i + 1) % p->n] - (*p)[i];
      const double len = std::hypot(e.x, e.y);
      if (len < 1e-12) continue;
      const Vec2 axis{-e.y / len, e.x / len};
      double min_a = std::numeric_limits<double>::infinity(), max_a = -min_a;
      for (int j = 0; j < a.n; ++j) {
        const double t = dot(axis, a[j]);
        min_a = std::min(min_a, t);
        max_a = std::max(max_a, t);
      }
      double min_b = std::numeric_limits<double>::infinity(), max_b = -min_b;
      for (int j = 0; j < b.n; ++j) {
        const double t = dot(axis, b[j]);
        min_b = std::min(min_b, t);
        max_b = std::max(max_b, t);
      }
      const double ov = std::min(max_a, max_b) - std::max(min_a, min_b);
      if (ov <= 0.0) return false;
      if (ov < best) {
        best = ov;
        best_axis = axis;
        // push a towards its own side of the axis
        best_sign = (min_a + max_a) >= (min_b + max_b) ? 1.0 : -1.0;
      }
    }
  }
  *mtv = best_axis * (best_sign * (best + 1e-9));
  return true;
}

}  // namespace

double length(Vec2 a) { return std::hypot(a.x, a.y); }

ConvexPoly ConvexPoly::of(std::initializer_list<Vec2> pts) {
  ConvexPoly p;
  for (Vec2 q : pts) p.v[p.n++] = q;
  return p;
}

ConvexPoly translated(const ConvexPoly& p, Vec2 d) {
  ConvexPoly out = p;
  for (int i = 0; i < out.n; ++i) out.v[i] = out.v[i] + d;
  return out;
}

double normalize_angle(double theta) {
  theta = std::fmod(theta, 2.0 * kPi);
  if (theta < 0.0) theta += 2.0 * kPi;
  if (theta >= 2.0 * kPi) theta = 0.0;
  return theta;
}

Pose Pose::make(double x, double y, double theta) {
  return Pose{x, y, normalize_angle(theta)};
}

double polygon_area(const ConvexPoly& p) {
  double a = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const Vec2& u = p.v[i];
    const Vec2& w = p.v[(i + 1) % p.n];
    a += cross(u, w);
  }
  return 0.5 * a;
}

Vec2 polygon_centroid(const ConvexPoly& p) {
  double a = 0.0, cx = 0.0, cy = 0.0;
  for (int i = 0; i < p.n; ++i) {
    const Vec2& u = p.v[i];
    const Vec2& w = p.v[(i + 1) % p.n];
    const double t = cross(u, w);
    a += t;
    cx += (u.x + w.x) * t;
    cy += (u.y + w.y) * t;
  }
  a *= 0.5;
  return {cx / (6.0 * a), cy / (6.0 * a)};
}

double polygon_perimeter(const ConvexPoly& p) {
  double total = 0.0;
  for (int i = 0; i < p.n; ++i) {
    total += length(p.v[(i + 1) % p.n] - p.v[i]);
  }
  return total;
}

const std::array<Piece, kPieceCount>& canonical_pieces() {
  static const std::array<Piece, kPieceCount> pieces = [] {
    std::array<Piece, kPieceCount> out{};
    auto def = [&](PieceId id, const char* name, ConvexPoly shape, double area,
                   int sym) {
      Piece p;
      p.id = id;
      p.name = name;
      p.shape = shape;
      p.centroid = polygon_centroid(shape);
      p.area = area;
      p.rotational_symmetry = sym;
      out[static_cast<int>(id)] = p;
    };
    def(PieceId::LT1, "LT1", ConvexPoly::of({{0, 4}, {2, 2}, {4, 4}}), 4.0, 8);
    def(PieceId::LT2, "LT2", ConvexPoly::of({{4, 4}, {2, 2}, {4, 0}}), 4.0, 8);
    def(PieceId::MT, "MT", ConvexPoly::of({{0, 0}, {2, 0}, {0, 2}}), 2.0, 8);
    def(PieceId::SQ, "SQ", ConvexPoly::of({{2, 0}, {3, 1}, {2, 2}, {1, 1}}),
        2.0, 2);
    def(PieceId::ST1, "ST1", ConvexPoly::of({{2, 0}, {4, 0}, {3, 1}}), 1.0, 8);
    def(PieceId::ST2, "ST2", ConvexPoly::of({{1, 1}, {2, 2}, {1, 3}}), 1.0, 8);
    def(PieceId::PG, "PG", ConvexPoly::of({{0, 2}, {1, 1}, {1, 3}, {0, 4}}),
        2.0, 4);
    return out;
  }();
  return pieces;
}

const Piece& piece(PieceId id) { return canonical_pieces()[static_cast<int>(id)]; }

PieceId piece_from_name(std::string_view name) {
  for (const Piece& p : canonical_pieces()) {
    if (name == p.name) return p.id;
  }
  throw Error(Errc::UnknownPiece, "unknown piece id: " + std::string(name));
}

ConvexPoly transform(const Piece& piece, const Pose& pose) {
  double c, s;
  rot_cs(pose.theta, &c, &s);
  ConvexPoly out;
  out.n = piece.shape.n;
  for (int i = 0; i < out.n; ++i) {
    const Vec2 d = piece.shape.v[i] - piece.centroid;
    out.v[i] = {pose.x + c * d.x - s * d.y, pose.y + s * d.x + c * d.y};
  }
  return out;
}

double intersection_area(const ConvexPoly& a, const ConvexPoly& b) {
  if (bbox_disjoint(a, b)) return 0.0;
  Vec2 buf[2][2 * ConvexPoly::kMaxVerts];
  int n = a.n;
  for (int i = 0; i < n; ++i) buf[0][i] = a.v[i];
  int cur = 0;
  for (int j = 0; j < b.n; ++j) {
    const Vec2 p = b.v[j];
    const Vec2 e = b.v[(j + 1) % b.n] - p;
    const Vec2* in = buf[cur];
    Vec2* out = buf[cur ^ 1];
    int m = 0;
    for (int i = 0; i < n; ++i) {
      const Vec2 s0 = in[i];
      const Vec2 s1 = in[(i + 1) % n];
      const double d0 = cross(e, s0 - p);
      const double d1 = cross(e, s1 - p);
      if (d0 >= 0.0) out[m++] = s0;
      if ((d0 > 0.0 && d1 < 0.0) || (d0 < 0.0 && d1 > 0.0)) {
        const double t = d0 / (d0 - d1);
        out[m++] = {s0.x + t * (s1.x - s0.x), s0.y + t * (s1.y - s0.y)};
      }
    }
    cur ^= 1;
    n = m;
    if (n == 0) return 0.0;
  }
  double area = 0.0;
  const Vec2* poly = buf[cur];
  for (int i = 0; i < n; ++i) {
    area += cross(poly[i], poly[(i + 1) % n]);
  }
  return std::max(0.0, 0.5 * area);
}

SeparateResult separate(const ConvexPoly& moving,
                        std::span<const ConvexPoly> fixed, int max_iter,
                        std::vector<double>* overlap_trace) {
  ConvexPoly poly = moving;
  int iter = 0;
  for (; iter < max_iter; ++iter) {
    double total = 0.0, deepest_area = 0.0;
    int deepest = -1;
    for (std::size_t i = 0; i < fixed.size(); ++i) {
      const double a = intersection_area(poly, fixed[i]);
      total += a;
      if (a > deepest_area) {
        deepest_area = a;
        deepest = static_cast<int>(i);
      }
    }
    if (overlap_trace) overlap_trace->push_back(total);
    if (deepest_area < kOverlapEps) return {poly, true, iter};

    Vec2 mtv;
    bool moved = false;
    if (sat_mtv(poly, fixed[deepest], &mtv)) {
      const ConvexPoly cand = translated(poly, mtv);
      if (total_overlap(cand, fixed) <= total + 1e-12) {
        poly = cand;
        moved = true;
      }
    }
    if (!moved) {
      // The shortest push grows the total; take whichever separating axis of
      // the deepest pair shrinks it the most instead.
      double best_total = total;
      ConvexPoly best_poly;
      const ConvexPoly& fdeep = fixed[deepest];
      const ConvexPoly* polys[2] = {&poly, &fdeep};
      for (const ConvexPoly* src : polys) {
        for (int i = 0; i < src->n; ++i) {
          const Vec2 e = (*src)[(i + 1) % src->n] - (*src)[i];
          const double len = std::hypot(e.x, e.y);
          if (len < 1e-12) continue;
          const Vec2 axis{-e.y / len, e.x / len};
          double min_m = std::numeric_limits<double>::infinity(),
                 max_m = -min_m;
          for (int j = 0; j < poly.n; ++j) {
            const double t = dot(axis, poly[j]);
            min_m = std::min(min_m, t);
            max_m = std::max(max_m, t);
          }
          double min_f = std::numeric_limits<double>::infinity(),
                 max_f = -min_f;
          for (int j = 0; j < fdeep.n; ++j) {
            const double t = dot(axis, fdeep[j]);
            min_f = std::min(min_f, t);
            max_f = std::max(max_f, t);
          }
          const double ov = std::min(max_m, max_f) - std::max(min_m, min_f);
          if (ov <= 0.0) continue;
          for (double sign : {1.0, -1.0}) {
            const ConvexPoly cand =
                translated(poly, axis * (sign * (ov + 1e-9)));
            const double t = total_overlap(cand, fixed);
            if (t < best_total) {
              best_total = t;
              best_poly = cand;
              moved = true;
            }
          }
        }
      }
      if (!moved) return {poly, false, iter};
      poly = best_poly;
    }
  }
  bool resolved = true;
  for (const ConvexPoly& f : fixed) {
    if (intersection_area(poly, f) >= kOverlapEps) {
      resolved = false;
      break;
    }
  }
  return {poly, resolved, iter};
}

double silhouette_perimeter(std::span<const ConvexPoly> polys) {
  double total = 0.0;
  std::vector<std::pair<double, double>> intervals;
  for (std::size_t i = 0; i < polys.size(); ++i) {
    const ConvexPoly& p = polys[i];
    for (int e = 0; e < p.n; ++e) {
      const Vec2 a = p.v[e];
      const Vec2 b = p.v[(e + 1) % p.n];
      const double len = length(b - a);
      if (len < 1e-12) continue;
      const Vec2 dir{(b.x - a.x) / len, (b.y - a.y) / len};
      intervals.clear();
      for (std::size_t j = 0; j < polys.size(); ++j) {
        if (j == i) continue;
        const ConvexPoly& q = polys[j];
        for (int f = 0; f < q.n; ++f) {
          const Vec2 c = q.v[f];
          const Vec2 d = q.v[(f + 1) % q.n];
          if (std::abs(cross(dir, c - a)) > kColinearTol) continue;
          if (std::abs(cross(dir, d - a)) > kColinearTol) continue;
          const double tc = dot(dir, c - a);
          const double td = dot(dir, d - a);
          const double lo = std::max(0.0, std::min(tc, td));
          const double hi = std::min(len, std::max(tc, td));
          if (hi - lo > 1e-9) intervals.emplace_back(lo, hi);
        }
      }
      double shared = 0.0;
      if (!intervals.empty()) {
        std::sort(intervals.begin(), intervals.end());
        double lo = intervals[0].first, hi = intervals[0].second;
        for (std::size_t k = 1; k < intervals.size(); ++k) {
          if (intervals[k].first > hi) {
            shared += hi - lo;
            lo = intervals[k].first;
            hi = intervals[k].second;
          } else {
            hi = std::max(hi, intervals[k].second);
          }
        }
        shared += hi - lo;
      }
      total += len - std::min(shared, len);
    }
  }
  return total;
}

bool within_box(const ConvexPoly& p, double lo, double hi) {
  for (int i = 0; i < p.n; ++i) {
    if (p.v[i].x < lo || p.v[i].x > hi || p.v[i].y < lo || p.v[i].y > hi) {
      return false;
    }
  }
  return true;
}

bool contains_boundary_aware(const ConvexPoly& p, Vec2 pt) {
  for (int i = 0; i < p.n; ++i) {
    const Vec2 a = p.v[i];
    const Vec2 e = p.v[(i + 1) % p.n] - a;
    const double cr = cross(e, pt - a);
    const double band = kOnEdgeBand * (std::abs(e.x) + std::abs(e.y));
    if (cr < -band) return false;
    if (cr <= band && !top_left_edge(e)) return false;
  }
  return true;
}

}  // namespace tangram::geom
