#pragma once

#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <limits>
#include <string>
#include <vector>

#include <json.hpp>

#include "error.hpp"
#include "geometry.hpp"

namespace surfgraph::gltf {

inline constexpr std::uint32_t kMagic = 0x46546C67;      // "glTF"
inline constexpr std::uint32_t kChunkJson = 0x4E4F534A;  // "JSON"
inline constexpr std::uint32_t kChunkBin = 0x004E4942;   // "BIN\0"
inline constexpr int kFloat = 5126;
inline constexpr int kUnsignedInt = 5125;
inline constexpr int kArrayBuffer = 34962;
inline constexpr int kElementArrayBuffer = 34963;

// Mesh content as stored in a .glb: single-precision positions and colors.
struct GlbMesh {
  std::vector<std::array<float, 3>> positions;
  std::vector<std::array<float, 3>> colors;
  std::vector<std::uint32_t> indices;

  std::array<float, 3> min() const { return extreme(true); }
  std::array<float, 3> max() const { return extreme(false); }

 private:
  std::array<float, 3> extreme(bool lo) const {
    std::array<float, 3> out;
    out.fill(lo ? std::numeric_limits<float>::infinity() : -std::numeric_limits<float>::infinity());
    for (const auto& p : positions) {
      for (int i = 0; i < 3; ++i) out[i] = lo ? std::min(out[i], p[i]) : std::max(out[i], p[i]);
    }
    return out;
  }
};

inline GlbMesh to_glb_mesh(const SurfaceMesh& mesh) {
  if (mesh.vertices.size() > std::numeric_limits<std::uint32_t>::max() ||
      mesh.triangles.size() * 3 > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("mesh exceeds 2^32-1 indices");
  }
  GlbMesh out;
  out.positions.reserve(mesh.vertices.size());
  for (const auto& v : mesh.vertices) {
    out.positions.push_back({static_cast<float>(v.x), static_cast<float>(v.y), static_cast<float>(v.z)});
  }
  for (const auto& c : mesh.vertex_color) {
    out.colors.push_back({static_cast<float>(c.r), static_cast<float>(c.g), static_cast<float>(c.b)});
  }
  for (const auto& t : mesh.triangles) out.indices.insert(out.indices.end(), t.begin(), t.end());
  return out;
}

namespace detail {

inline void put_u32(std::vector<std::uint8_t>& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) out.push_back(static_cast<std::uint8_t>(v >> (8 * i)));
}

inline std::uint32_t get_u32(const std::uint8_t* p) {
  return std::uint32_t(p[0]) | std::uint32_t(p[1]) << 8 | std::uint32_t(p[2]) << 16 | std::uint32_t(p[3]) << 24;
}

inline nlohmann::json float_array(const std::array<float, 3>& a) {
  return {static_cast<double>(a[0]), static_cast<double>(a[1]), static_cast<double>(a[2])};
}

}  // namespace detail

// Binary glTF 2.0 with one triangle primitive (POSITION, COLOR_0, uint32
// indices). The root node rotates the z-up scene into glTF's y-up frame.
inline std::vector<std::uint8_t> encode_glb(const GlbMesh& mesh) {
  if (mesh.colors.size() != mesh.positions.size()) throw ValidationError("color count differs from vertex count");
  const auto n = static_cast<std::uint32_t>(mesh.positions.size());
  const auto n_idx = static_cast<std::uint32_t>(mesh.indices.size());

  std::vector<std::uint8_t> bin;
  bin.reserve(24u * n + 4u * n_idx);
  for (const auto* attr : {&mesh.positions, &mesh.colors}) {
    for (const auto& p : *attr) {
      for (float f : p) detail::put_u32(bin, std::bit_cast<std::uint32_t>(f));
    }
  }
  for (auto i : mesh.indices) detail::put_u32(bin, i);

  const std::uint32_t attr_bytes = 12u * n;
  using nlohmann::json;
  json doc = {
      {"asset", {{"version", "2.0"}, {"generator", "surfgraph"}}},
      {"scene", 0},
      {"scenes", json::array({{{"nodes", {0}}}})},
      {"nodes", json::array({{{"mesh", 0}, {"rotation", {-0.7071067811865476, 0.0, 0.0, 0.7071067811865476}}}})},
      {"meshes", json::array({{{"primitives", json::array({{{"attributes", {{"POSITION", 0}, {"COLOR_0", 1}}},
                                                            {"indices", 2},
                                                            {"mode", 4}}})}}})},
      {"accessors", json::array({{{"bufferView", 0}, {"componentType", kFloat}, {"count", n}, {"type", "VEC3"},
                                  {"min", detail::float_array(mesh.min())}, {"max", detail::float_array(mesh.max())}},
                                 {{"bufferView", 1}, {"componentType", kFloat}, {"count", n}, {"type", "VEC3"}},
                                 {{"bufferView", 2}, {"componentType", kUnsignedInt}, {"count", n_idx},
                                  {"type", "SCALAR"}}})},
      {"bufferViews", json::array({{{"buffer", 0}, {"byteOffset", 0}, {"byteLength", attr_bytes}, {"target", kArrayBuffer}},
                                   {{"buffer", 0}, {"byteOffset", attr_bytes}, {"byteLength", attr_bytes},
                                    {"target", kArrayBuffer}},
                                   {{"buffer", 0}, {"byteOffset", 2 * attr_bytes}, {"byteLength", 4u * n_idx},
                                    {"target", kElementArrayBuffer}}})},
      {"buffers", json::array({{{"byteLength", bin.size()}}})},
  };
  std::string text = doc.dump();
  while (text.size() % 4) text.push_back(' ');
  while (bin.size() % 4) bin.push_back(0);

  std::vector<std::uint8_t> out;
  const auto total = static_cast<std::uint32_t>(12 + 8 + text.size() + 8 + bin.size());
  out.reserve(total);
  detail::put_u32(out, kMagic);
  detail::put_u32(out, 2);
  detail::put_u32(out, total);
  detail::put_u32(out, static_cast<std::uint32_t>(text.size()));
  detail::put_u32(out, kChunkJson);
  out.insert(out.end(), text.begin(), text.end());
  detail::put_u32(out, static_cast<std::uint32_t>(bin.size()));
  detail::put_u32(out, kChunkBin);
  out.insert(out.end(), bin.begin(), bin.end());
  return out;
}

// Reads back the layout produced by encode_glb (tightly packed views).
inline GlbMesh decode_glb(const std::vector<std::uint8_t>& bytes) {
  auto fail = [](const std::string& what) { return ValidationError("glb: " + what); };
  if (bytes.size() < 20 || detail::get_u32(bytes.data()) != kMagic) throw fail("bad magic");
  if (detail::get_u32(bytes.data() + 4) != 2) throw fail("unsupported version");
  if (detail::get_u32(bytes.data() + 8) != bytes.size()) throw fail("length mismatch");

  const std::uint32_t json_len = detail::get_u32(bytes.data() + 12);
  if (detail::get_u32(bytes.data() + 16) != kChunkJson || 20 + json_len + 8 > bytes.size()) throw fail("bad JSON chunk");
  const auto doc = nlohmann::json::parse(bytes.begin() + 20, bytes.begin() + 20 + json_len);
  const std::size_t bin_at = 20 + json_len;
  const std::uint32_t bin_len = detail::get_u32(bytes.data() + bin_at);
  if (detail::get_u32(bytes.data() + bin_at + 4) != kChunkBin || bin_at + 8 + bin_len > bytes.size()) {
    throw fail("bad BIN chunk");
  }
  const std::uint8_t* bin = bytes.data() + bin_at + 8;

  auto view_of = [&](int accessor, int component, const char* type) {
    const auto& acc = doc.at("accessors").at(accessor);
    if (acc.at("componentType") != component || acc.at("type") != type) throw fail("unexpected accessor layout");
    const auto& view = doc.at("bufferViews").at(acc.at("bufferView").get<int>());
    const auto offset = view.value("byteOffset", 0u) + acc.value("byteOffset", 0u);
    const auto count = acc.at("count").get<std::uint32_t>();
    if (offset + view.at("byteLength").get<std::size_t>() > bin_len) throw fail("view out of range");
    return std::make_pair(bin + offset, count);
  };
  auto read_vec3 = [&](int accessor) {
    auto [p, count] = view_of(accessor, kFloat, "VEC3");
    std::vector<std::array<float, 3>> out(count);
    for (std::uint32_t i = 0; i < count; ++i) {
      for (int k = 0; k < 3; ++k) out[i][k] = std::bit_cast<float>(detail::get_u32(p + 12 * i + 4 * k));
    }
    return out;
  };

  const auto& prim = doc.at("meshes").at(0).at("primitives").at(0);
  GlbMesh mesh;
  mesh.positions = read_vec3(prim.at("attributes").at("POSITION").get<int>());
  mesh.colors = read_vec3(prim.at("attributes").at("COLOR_0").get<int>());
  auto [p, count] = view_of(prim.at("indices").get<int>(), kUnsignedInt, "SCALAR");
  mesh.indices.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) mesh.indices[i] = detail::get_u32(p + 4 * i);
  return mesh;
}

}  // namespace surfgraph::gltf
