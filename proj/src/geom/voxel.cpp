#include "cadseq/geom/voxel.hpp"

#include <json.hpp>

#include "cadseq/util/error.hpp"

namespace cadseq::geom {

std::size_t VoxelGrid::count() const {
  std::size_t n = 0;
  for (const std::uint8_t v : occ_) n += v;
  return n;
}

namespace {

void check_match(const VoxelGrid& a, const VoxelGrid& b) {
  if (a.res() != b.res())
    fail(ErrorKind::shape_mismatch, "voxel grid resolutions differ: " +
                                        std::to_string(a.res()) + " vs " +
                                        std::to_string(b.res()));
}

template <class Fn>
VoxelGrid combine(const VoxelGrid& a, const VoxelGrid& b, Fn&& fn) {
  check_match(a, b);
  VoxelGrid out(a.res());
  const auto& ra = a.raw();
  const auto& rb = b.raw();
  for (std::size_t i = 0; i < ra.size(); ++i) {
    const bool v = fn(ra[i] != 0, rb[i] != 0);
    if (v) {
      const int res = a.res();
      const int iz = static_cast<int>(i % res);
      const int iy = static_cast<int>((i / res) % res);
      const int ix = static_cast<int>(i / (static_cast<std::size_t>(res) * res));
      out.set(ix, iy, iz, true);
    }
  }
  return out;
}

}  // namespace

VoxelGrid grid_union(const VoxelGrid& a, const VoxelGrid& b) {
  return combine(a, b, [](bool x, bool y) { return x || y; });
}
VoxelGrid grid_cut(const VoxelGrid& a, const VoxelGrid& b) {
  return combine(a, b, [](bool x, bool y) { return x && !y; });
}
VoxelGrid grid_intersect(const VoxelGrid& a, const VoxelGrid& b) {
  return combine(a, b, [](bool x, bool y) { return x && y; });
}

VoxelGrid grid_apply(cad::BoolOp op, const VoxelGrid& a, const VoxelGrid& b) {
  switch (op) {
    case cad::kJoin: return grid_union(a, b);
    case cad::kCut: return grid_cut(a, b);
    case cad::kIntersect: return grid_intersect(a, b);
  }
  fail(ErrorKind::out_of_range, "boolean op " + std::to_string(static_cast<int>(op)));
}

std::string to_json(const VoxelGrid& grid) {
  nlohmann::json occupied = nlohmann::json::array();
  const auto& raw = grid.raw();
  for (std::size_t i = 0; i < raw.size(); ++i)
    if (raw[i]) occupied.push_back(i);
  return nlohmann::json{{"resolution", grid.res()}, {"occupied", std::move(occupied)}}.dump();
}

VoxelGrid voxel_grid_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  VoxelGrid grid(doc.at("resolution").get<int>());
  const std::size_t cells = grid.raw().size();
  for (const auto& idx : doc.at("occupied")) {
    const std::size_t i = idx.get<std::size_t>();
    if (i >= cells) fail(ErrorKind::parse_error, "occupied index out of range");
    const int res = grid.res();
    grid.set(static_cast<int>(i / (static_cast<std::size_t>(res) * res)),
             static_cast<int>((i / res) % res), static_cast<int>(i % res), true);
  }
  return grid;
}

}  // namespace cadseq::geom
