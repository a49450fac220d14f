#pragma once

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "error.hpp"
#include "geometry.hpp"
#include "horizon.hpp"
#include "raster.hpp"

namespace surfgraph {

enum class Technique { shared_surface, small_multiple, horizon };

inline constexpr std::string_view to_string(Technique t) {
  switch (t) {
    case Technique::shared_surface: return "shared_surface";
    case Technique::small_multiple: return "small_multiple";
    case Technique::horizon: return "horizon";
  }
  return "?";
}

inline Technique technique_from_string(std::string_view s) {
  if (s == "shared_surface" || s == "shared") return Technique::shared_surface;
  if (s == "small_multiple" || s == "small-multiple") return Technique::small_multiple;
  if (s == "horizon") return Technique::horizon;
  throw ConfigError("unknown technique '" + std::string(s) + "'");
}

inline constexpr std::array<Technique, 3> kTechniques{Technique::shared_surface, Technique::small_multiple,
                                                      Technique::horizon};

struct LayoutParams {
  Technique technique = Technique::shared_surface;
  double S = 100.0;   // total vertical budget, scene units
  double h = 5.0;     // headroom needed to view a whole surface
  std::uint32_t N = 2;
  std::uint32_t B = 4;
  double gap = 2.0;   // vertical space between stacked slots

  // h defaults to 5% of S and the slot gap to 2% of S.
  static LayoutParams with_defaults(Technique technique, double S, std::uint32_t N, std::uint32_t B = 4) {
    return {technique, S, 0.05 * S, N, B, 0.02 * S};
  }

  void validate() const {
    if (!(S > 0.0)) throw ConfigError("layout: S must be positive");
    if (!(h >= 0.0)) throw ConfigError("layout: h must be nonnegative");
    if (!(gap >= 0.0)) throw ConfigError("layout: gap must be nonnegative");
    if (N < 2) throw ConfigError("layout: N must be at least 2");
    if (technique == Technique::horizon && B < 2) throw ConfigError("layout: horizon needs B >= 2");
  }
};

// Vertical space given to one study year:
//   shared_surface  S + h
//   small_multiple  S / N + h
//   horizon         S / (N * 2 * B) + h
// Generic over the scalar so exact rational types can be used.
template <typename Scalar>
Scalar slot_extent(Technique technique, const Scalar& S, const Scalar& h, std::uint32_t N, std::uint32_t B) {
  switch (technique) {
    case Technique::shared_surface: return S + h;
    case Technique::small_multiple: return S / Scalar(static_cast<long long>(N)) + h;
    case Technique::horizon: return S / Scalar(static_cast<long long>(N) * 2 * static_cast<long long>(B)) + h;
  }
  throw ConfigError("unknown technique");
}

inline double slot_extent(const LayoutParams& p) {
  p.validate();
  return slot_extent<double>(p.technique, p.S, p.h, p.N, p.B);
}

struct LegendEntry {
  std::string label;
  Rgb color;
  std::optional<double> lo;  // meters; value-scale and band entries only
  std::optional<double> hi;
};

struct Legend {
  std::string kind;  // "year_identity", "value_scale" or "bands"
  std::vector<LegendEntry> entries;
};

struct Slot {
  std::string year_label;
  Vec3 translation;
  double z_scale = 1.0;
  double extent = 0.0;  // slot_extent of the layout
  SurfaceMesh mesh;     // local coordinates; world = local + translation
  std::vector<std::uint32_t> vertex_band;  // horizon only
};

struct Scene {
  LayoutParams params;
  std::vector<Slot> slots;
  Legend legend;
  Bounds bounds;
  std::vector<double> separators;  // z of planes between stacked slots
};

struct SceneStyle {
  Rgb value_hue = rgb_from_hex(0x2166ac);
};

inline Scene assemble_scene(const Dataset& dataset, const LayoutParams& params, const SceneStyle& style = {}) {
  params.validate();
  if (dataset.size() != params.N) {
    throw ValidationError("dataset has " + std::to_string(dataset.size()) + " years but layout expects N=" +
                          std::to_string(params.N));
  }
  const double gmax = dataset.global_max();
  if (!(gmax > 0.0)) throw DegenerateDataError("dataset is flat at zero; nothing to scale");

  Scene scene;
  scene.params = params;
  const double extent = slot_extent(params);
  const auto n = static_cast<double>(params.N);
  const auto ramp = ColorRamp::value_scale(0.0, gmax, style.value_hue);

  switch (params.technique) {
    case Technique::shared_surface: {
      if (dataset.size() > year_palette().size()) {
        throw ConfigError("shared-space palette holds " + std::to_string(year_palette().size()) + " years");
      }
      scene.legend.kind = "year_identity";
      const double z_scale = params.S / gmax;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        const Rgb color = year_palette()[i];
        Slot slot{dataset[i].year_label(), {}, z_scale, extent,
                  triangulate(dataset[i], z_scale, ColorRamp::year_identity(color)), {}};
        scene.slots.push_back(std::move(slot));
        scene.legend.entries.push_back({dataset[i].year_label(), color, std::nullopt, std::nullopt});
      }
      break;
    }
    case Technique::small_multiple: {
      scene.legend.kind = "value_scale";
      const double z_scale = params.S / n / gmax;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        Slot slot{dataset[i].year_label(), {0.0, 0.0, i * (extent + params.gap)}, z_scale, extent,
                  triangulate(dataset[i], z_scale, ramp), {}};
        scene.slots.push_back(std::move(slot));
      }
      scene.legend.entries.push_back({"min", ramp.lightest(), 0.0, 0.0});
      scene.legend.entries.push_back({"max", ramp.darkest(), gmax, gmax});
      break;
    }
    case Technique::horizon: {
      scene.legend.kind = "bands";
      const auto bands = BandParams::make(params.B, gmax);
      const double z_scale = params.S / (n * 2.0 * params.B) / bands.height;
      for (std::size_t i = 0; i < dataset.size(); ++i) {
        auto horizon = decompose(triangulate(dataset[i], 1.0), bands, z_scale, ramp);
        Slot slot{dataset[i].year_label(), {0.0, 0.0, i * (extent + params.gap)}, z_scale, extent,
                  std::move(horizon.surface), std::move(horizon.vertex_band)};
        scene.slots.push_back(std::move(slot));
      }
      for (std::uint32_t k = 0; k < bands.count; ++k) {
        scene.legend.entries.push_back({"band " + std::to_string(k), band_color(k, bands.count, ramp),
                                        bands.level(k), bands.level(k + 1)});
      }
      break;
    }
  }

  for (std::size_t i = 0; i < scene.slots.size(); ++i) {
    const Slot& slot = scene.slots[i];
    const GridSpec& g = dataset.grid();
    const double base = slot.translation.z;
    scene.bounds.extend({g.x(0), g.y(g.n_rows - 1), base});
    scene.bounds.extend({g.x(g.n_cols - 1), g.y(0), base + extent});
    for (const auto& v : slot.mesh.vertices) {
      scene.bounds.extend({v.x + slot.translation.x, v.y + slot.translation.y, v.z + slot.translation.z});
    }
    if (params.technique != Technique::shared_surface && i + 1 < scene.slots.size()) {
      scene.separators.push_back(base + extent + params.gap / 2.0);
    }
  }
  return scene;
}

}  // namespace surfgraph
