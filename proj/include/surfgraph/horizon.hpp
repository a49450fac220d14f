#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <tuple>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"

namespace surfgraph {

// B bands of equal height c = v_max / B over [0, v_max].
struct BandParams {
  std::uint32_t count = 4;
  double height = 0.0;
  double v_max = 0.0;

  static BandParams make(std::uint32_t count, double v_max) {
    if (count < 1) throw ConfigError("band count must be at least 1");
    if (!(v_max > 0.0) || !std::isfinite(v_max)) throw DegenerateDataError("v_max must be positive to build bands");
    return {count, v_max / count, v_max};
  }

  double level(std::uint32_t k) const { return k * height; }
};

struct BandValue {
  std::uint32_t band = 0;
  double residual = 0.0;
};

// Half-open bands [k*c, (k+1)*c); v_max itself lands at the top of band B-1.
inline BandValue band_value(double v, const BandParams& params) {
  if (v < 0.0 || std::isnan(v)) throw ValidationError("band_value: negative value");
  v = std::min(v, params.v_max);
  auto k = static_cast<std::uint32_t>(std::floor(v / params.height));
  k = std::min(k, params.count - 1);
  const double r = std::clamp(v - params.level(k), 0.0, params.height);
  return {k, r};
}

// Planar position plus the scalar being banded.
struct ValuedVertex {
  double x = 0.0;
  double y = 0.0;
  double v = 0.0;

  friend bool operator==(const ValuedVertex&, const ValuedVertex&) = default;
};

using ValuedTriangle = std::array<ValuedVertex, 3>;

struct ClipResult {
  std::vector<ValuedTriangle> below;
  std::vector<ValuedTriangle> above;
};

inline double signed_xy_area(const ValuedTriangle& t) {
  return 0.5 * ((t[1].x - t[0].x) * (t[2].y - t[0].y) - (t[2].x - t[0].x) * (t[1].y - t[0].y));
}

namespace detail {

// Point on edge (a, b) where the linear value equals level. Endpoints are put
// in a canonical order first so both triangles sharing an edge get identical bits.
inline ValuedVertex cut_edge(ValuedVertex a, ValuedVertex b, double level) {
  if (std::tie(b.x, b.y) < std::tie(a.x, a.y)) std::swap(a, b);
  const double t = (level - a.v) / (b.v - a.v);
  return {a.x + (b.x - a.x) * t, a.y + (b.y - a.y) * t, level};
}

inline void fan(const std::vector<ValuedVertex>& poly, std::vector<ValuedTriangle>& out) {
  for (std::size_t i = 1; i + 1 < poly.size(); ++i) {
    ValuedTriangle t{poly[0], poly[i], poly[i + 1]};
    if (signed_xy_area(t) != 0.0) out.push_back(t);
  }
}

}  // namespace detail

// Splits a triangle along the iso-line value == level. Vertices on the level
// go with the below side when nothing is strictly above; otherwise they are
// shared by both pieces. Winding of the input is preserved.
inline ClipResult clip_triangle_at_level(const ValuedTriangle& tri, double level) {
  const bool any_above = std::any_of(tri.begin(), tri.end(), [&](const auto& p) { return p.v > level; });
  const bool any_below = std::any_of(tri.begin(), tri.end(), [&](const auto& p) { return p.v < level; });
  if (!any_above) return {{tri}, {}};
  if (!any_below) return {{}, {tri}};

  std::vector<ValuedVertex> below, above;
  for (std::size_t i = 0; i < 3; ++i) {
    const auto& p = tri[i];
    const auto& q = tri[(i + 1) % 3];
    if (p.v <= level) below.push_back(p);
    if (p.v >= level) above.push_back(p);
    if ((p.v < level && q.v > level) || (p.v > level && q.v < level)) {
      const auto cut = detail::cut_edge(p, q, level);
      below.push_back(cut);
      above.push_back(cut);
    }
  }
  ClipResult out;
  detail::fan(below, out.below);
  detail::fan(above, out.above);
  return out;
}

struct HorizonMesh {
  SurfaceMesh surface;
  std::vector<std::uint32_t> vertex_band;
  std::vector<double> vertex_residual;
  BandParams params;
};

// Band k color: step k of B along one hue, band B-1 darkest.
inline Rgb band_color(std::uint32_t band, std::uint32_t count, const ColorRamp& ramp) {
  const double t = count <= 1 ? 1.0 : static_cast<double>(band) / (count - 1);
  return ramp.at(t);
}

// Clips every triangle at c, 2c, ..., (B-1)c and drops each band-pure piece
// to its residual height v - k*c. Output triangles follow input triangle order,
// then cut order; vertices are shared within a band.
inline HorizonMesh decompose(const SurfaceMesh& mesh, const BandParams& params, double z_scale,
                             const ColorRamp& ramp = ColorRamp::value_scale(0.0, 1.0)) {
  if (params.count < 1) throw ConfigError("band count must be at least 1");
  if (!(params.v_max > 0.0)) throw DegenerateDataError("v_max must be positive to build bands");
  if (!(z_scale > 0.0)) throw ConfigError("z_scale must be positive");
  const double tol = 1e-9 * params.v_max;
  for (double v : mesh.vertex_value) {
    if (v < -tol || v > params.v_max + tol) {
      throw ValidationError("vertex value " + std::to_string(v) + " outside [0, v_max]");
    }
  }

  HorizonMesh out;
  out.params = params;
  out.surface.z_scale = z_scale;
  std::map<std::tuple<std::uint64_t, std::uint64_t, std::uint32_t>, std::uint32_t> index_of;

  auto vertex = [&](const ValuedVertex& p, std::uint32_t band) {
    const auto key = std::make_tuple(std::bit_cast<std::uint64_t>(p.x), std::bit_cast<std::uint64_t>(p.y), band);
    auto [it, inserted] = index_of.try_emplace(key, static_cast<std::uint32_t>(out.surface.vertices.size()));
    if (inserted) {
      const double v = std::clamp(p.v, 0.0, params.v_max);
      const double r = std::clamp(v - params.level(band), 0.0, params.height);
      out.surface.vertices.push_back({p.x, p.y, r * z_scale});
      out.surface.vertex_value.push_back(v);
      out.surface.vertex_color.push_back(band_color(band, params.count, ramp));
      out.vertex_band.push_back(band);
      out.vertex_residual.push_back(r);
    }
    return it->second;
  };
  auto emit = [&](const ValuedTriangle& t, std::uint32_t band) {
    out.surface.triangles.push_back({vertex(t[0], band), vertex(t[1], band), vertex(t[2], band)});
  };

  std::vector<ValuedTriangle> pending, next;
  for (const auto& tri : mesh.triangles) {
    pending.clear();
    ValuedTriangle vt;
    for (std::size_t i = 0; i < 3; ++i) {
      const auto& p = mesh.vertices[tri[i]];
      vt[i] = {p.x, p.y, mesh.vertex_value[tri[i]]};
    }
    pending.push_back(vt);
    for (std::uint32_t k = 1; k < params.count && !pending.empty(); ++k) {
      next.clear();
      for (const auto& piece : pending) {
        auto cut = clip_triangle_at_level(piece, params.level(k));
        for (const auto& b : cut.below) emit(b, k - 1);
        next.insert(next.end(), cut.above.begin(), cut.above.end());
      }
      pending.swap(next);
    }
    for (const auto& piece : pending) emit(piece, params.count - 1);
  }
  return out;
}

}  // namespace surfgraph
