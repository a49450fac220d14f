#pragma once

#include <filesystem>
#include <fstream>
#include <iterator>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "gltf.hpp"
#include "layout.hpp"

namespace surfgraph {

inline constexpr const char* kSceneFormat = "surfgraph-scene/1";

namespace detail {

inline nlohmann::json vec_json(const Vec3& v) { return {v.x, v.y, v.z}; }

inline void write_file(const std::filesystem::path& path, const void* data, std::size_t size) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  out.write(static_cast<const char*>(data), static_cast<std::streamsize>(size));
  if (!out) throw IoError("cannot write " + path.string());
}

inline std::vector<std::uint8_t> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

}  // namespace detail

inline nlohmann::json layout_json(const LayoutParams& p) {
  return {{"technique", to_string(p.technique)}, {"S", p.S}, {"h", p.h}, {"N", p.N},
          {"B", p.B}, {"gap", p.gap}, {"slot_extent", slot_extent(p)}};
}

inline nlohmann::json legend_json(const Legend& legend) {
  nlohmann::json entries = nlohmann::json::array();
  for (const auto& e : legend.entries) {
    nlohmann::json j = {{"label", e.label}, {"color", to_hex(e.color)}, {"rgb", {e.color.r, e.color.g, e.color.b}}};
    if (e.lo) j["lo"] = *e.lo;
    if (e.hi) j["hi"] = *e.hi;
    entries.push_back(std::move(j));
  }
  return {{"kind", legend.kind}, {"entries", entries}};
}

// Writes slot_<i>.glb per slot and scene.json. Output bytes depend only on the scene.
inline std::filesystem::path export_scene(const Scene& scene, const std::filesystem::path& out_dir) {
  if (scene.slots.empty()) throw ValidationError("scene has no slots to export");
  std::error_code ec;
  std::filesystem::create_directories(out_dir, ec);
  if (ec) throw IoError("cannot create " + out_dir.string() + ": " + ec.message());

  nlohmann::json slots = nlohmann::json::array();
  for (std::size_t i = 0; i < scene.slots.size(); ++i) {
    const Slot& slot = scene.slots[i];
    const auto glb = gltf::to_glb_mesh(slot.mesh);
    const auto bytes = gltf::encode_glb(glb);
    const std::string name = "slot_" + std::to_string(i) + ".glb";
    detail::write_file(out_dir / name, bytes.data(), bytes.size());
    slots.push_back({{"index", i},
                     {"year_label", slot.year_label},
                     {"translation", detail::vec_json(slot.translation)},
                     {"z_scale", slot.z_scale},
                     {"base_z", slot.translation.z},
                     {"extent", slot.extent},
                     {"mesh", name},
                     {"vertex_count", glb.positions.size()},
                     {"triangle_count", glb.indices.size() / 3},
                     {"mesh_bounds", {{"min", gltf::detail::float_array(glb.min())},
                                      {"max", gltf::detail::float_array(glb.max())}}}});
  }
  const nlohmann::json manifest = {
      {"format", kSceneFormat},
      {"technique", to_string(scene.params.technique)},
      {"up_axis", "z"},
      {"layout", layout_json(scene.params)},
      {"slots", slots},
      {"legend", legend_json(scene.legend)},
      {"bounds", {{"min", detail::vec_json(scene.bounds.min)}, {"max", detail::vec_json(scene.bounds.max)}}},
      {"separators", scene.separators},
  };
  const std::string text = manifest.dump(2) + "\n";
  const auto path = out_dir / "scene.json";
  detail::write_file(path, text.data(), text.size());
  return path;
}

struct LoadedScene {
  nlohmann::json manifest;
  std::vector<gltf::GlbMesh> meshes;  // one per manifest slot
};

inline LoadedScene load_scene(const std::filesystem::path& manifest_path) {
  LoadedScene out;
  const auto text = detail::read_file(manifest_path);
  out.manifest = nlohmann::json::parse(text.begin(), text.end());
  if (out.manifest.value("format", "") != kSceneFormat) throw ValidationError("unrecognized scene manifest format");
  for (const auto& slot : out.manifest.at("slots")) {
    out.meshes.push_back(gltf::decode_glb(detail::read_file(manifest_path.parent_path() / slot.at("mesh").get<std::string>())));
  }
  return out;
}

}  // namespace surfgraph
