#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <limits>
#include <string>
#include <vector>

#include "error.hpp"
#include "raster.hpp"

namespace surfgraph {

struct Vec3 {
  double x = 0.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const Vec3&, const Vec3&) = default;
};

struct Rgb {
  double r = 0.0;
  double g = 0.0;
  double b = 0.0;

  friend bool operator==(const Rgb&, const Rgb&) = default;
};

// Rec. 709 relative luminance weights on the stored (linear) components.
inline double luminance(const Rgb& c) { return 0.2126 * c.r + 0.7152 * c.g + 0.0722 * c.b; }

inline Rgb mix(const Rgb& a, const Rgb& b, double t) {
  return {a.r + (b.r - a.r) * t, a.g + (b.g - a.g) * t, a.b + (b.b - a.b) * t};
}

inline Rgb rgb_from_hex(std::uint32_t hex) {
  return {((hex >> 16) & 0xff) / 255.0, ((hex >> 8) & 0xff) / 255.0, (hex & 0xff) / 255.0};
}

inline std::string to_hex(const Rgb& c) {
  auto byte = [](double v) { return static_cast<int>(std::lround(std::clamp(v, 0.0, 1.0) * 255.0)); };
  char buf[8];
  std::snprintf(buf, sizeof buf, "#%02x%02x%02x", byte(c.r), byte(c.g), byte(c.b));
  return buf;
}

// Identity colors for overlaid study years: blue, orange, green, purple.
inline const std::array<Rgb, 4>& year_palette() {
  static const std::array<Rgb, 4> palette{rgb_from_hex(0x1f77b4), rgb_from_hex(0xff7f0e), rgb_from_hex(0x2ca02c),
                                          rgb_from_hex(0x9467bd)};
  return palette;
}

using Triangle = std::array<std::uint32_t, 3>;

struct SurfaceMesh {
  std::vector<Vec3> vertices;
  std::vector<Triangle> triangles;  // counter-clockwise seen from +z
  std::vector<double> vertex_value;
  std::vector<Rgb> vertex_color;
  double z_scale = 1.0;
};

// Either one flat color per study year, or a single-hue ramp where darker
// means a higher value.
class ColorRamp {
 public:
  enum class Mode { year_identity, value_scale };

  static ColorRamp year_identity(const Rgb& color) { return ColorRamp(Mode::year_identity, color, 0.0, 1.0); }

  static ColorRamp value_scale(double v_min, double v_max, const Rgb& hue = rgb_from_hex(0x2166ac)) {
    if (!(v_max > v_min)) throw ConfigError("value ramp needs v_max > v_min");
    return ColorRamp(Mode::value_scale, hue, v_min, v_max);
  }

  Mode mode() const { return mode_; }
  const Rgb& hue() const { return hue_; }
  double v_min() const { return v_min_; }
  double v_max() const { return v_max_; }

  // Ramp endpoints: a pale tint of the hue and a shaded version of it.
  Rgb lightest() const { return mix(hue_, Rgb{1, 1, 1}, 0.85); }
  Rgb darkest() const { return mix(hue_, Rgb{0, 0, 0}, 0.45); }

  // Position t in [0, 1] along the ramp, 0 = lightest.
  Rgb at(double t) const {
    if (t >= 1.0) return darkest();
    return mix(lightest(), darkest(), std::max(t, 0.0));
  }

 private:
  ColorRamp(Mode mode, const Rgb& hue, double v_min, double v_max)
      : mode_(mode), hue_(hue), v_min_(v_min), v_max_(v_max) {}

  Mode mode_;
  Rgb hue_;
  double v_min_;
  double v_max_;
};

inline Rgb color_for_value(double v, const ColorRamp& ramp) {
  if (ramp.mode() == ColorRamp::Mode::year_identity) return ramp.hue();
  const double t = (std::clamp(v, ramp.v_min(), ramp.v_max()) - ramp.v_min()) / (ramp.v_max() - ramp.v_min());
  return ramp.at(t);
}

inline double signed_xy_area(const Vec3& a, const Vec3& b, const Vec3& c) {
  return 0.5 * ((b.x - a.x) * (c.y - a.y) - (c.x - a.x) * (b.y - a.y));
}

inline double projected_area(const SurfaceMesh& mesh) {
  double total = 0.0;
  for (const auto& t : mesh.triangles) {
    total += std::abs(signed_xy_area(mesh.vertices[t[0]], mesh.vertices[t[1]], mesh.vertices[t[2]]));
  }
  return total;
}

// One vertex per non-nodata grid point; two triangles per cell whose four
// corners are valid, split along the northwest-southeast diagonal.
inline SurfaceMesh triangulate(const HeightField& field, double z_scale, const ColorRamp& ramp) {
  if (!(z_scale > 0.0)) throw ConfigError("z_scale must be positive");
  const GridSpec& g = field.grid();
  constexpr auto kNone = std::numeric_limits<std::uint32_t>::max();
  std::vector<std::uint32_t> vertex_of(g.size(), kNone);

  SurfaceMesh mesh;
  mesh.z_scale = z_scale;
  for (std::size_t r = 0; r < g.n_rows; ++r) {
    for (std::size_t c = 0; c < g.n_cols; ++c) {
      if (field.is_nodata(r, c)) continue;
      const double v = field.value(r, c);
      vertex_of[g.index(r, c)] = static_cast<std::uint32_t>(mesh.vertices.size());
      mesh.vertices.push_back({g.x(c), g.y(r), v * z_scale});
      mesh.vertex_value.push_back(v);
      mesh.vertex_color.push_back(color_for_value(v, ramp));
    }
  }

  for (std::size_t r = 0; r + 1 < g.n_rows; ++r) {
    for (std::size_t c = 0; c + 1 < g.n_cols; ++c) {
      const auto nw = vertex_of[g.index(r, c)];
      const auto ne = vertex_of[g.index(r, c + 1)];
      const auto sw = vertex_of[g.index(r + 1, c)];
      const auto se = vertex_of[g.index(r + 1, c + 1)];
      if (nw == kNone || ne == kNone || sw == kNone || se == kNone) continue;
      mesh.triangles.push_back({nw, sw, se});
      mesh.triangles.push_back({nw, se, ne});
    }
  }
  if (mesh.triangles.empty()) throw DegenerateDataError("empty mesh: field '" + field.year_label() + "' has no renderable cells");
  return mesh;
}

inline SurfaceMesh triangulate(const HeightField& field, double z_scale) {
  return triangulate(field, z_scale, ColorRamp::year_identity(Rgb{0.6, 0.6, 0.6}));
}

struct Bounds {
  Vec3 min{std::numeric_limits<double>::infinity(), std::numeric_limits<double>::infinity(),
           std::numeric_limits<double>::infinity()};
  Vec3 max{-std::numeric_limits<double>::infinity(), -std::numeric_limits<double>::infinity(),
           -std::numeric_limits<double>::infinity()};

  void extend(const Vec3& p) {
    min = {std::min(min.x, p.x), std::min(min.y, p.y), std::min(min.z, p.z)};
    max = {std::max(max.x, p.x), std::max(max.y, p.y), std::max(max.z, p.z)};
  }
  bool contains(const Vec3& p, double eps = 0.0) const {
    return p.x >= min.x - eps && p.x <= max.x + eps && p.y >= min.y - eps && p.y <= max.y + eps &&
           p.z >= min.z - eps && p.z <= max.z + eps;
  }
  friend bool operator==(const Bounds&, const Bounds&) = default;
};

}  // namespace surfgraph
