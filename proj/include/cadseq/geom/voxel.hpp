#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "cadseq/cad/types.hpp"

namespace cadseq::geom {

/// Dense occupancy grid over the global [-1,1]^3 cube, res cells per axis.
/// Flat index order: ((ix * res) + iy) * res + iz.
class VoxelGrid {
 public:
  VoxelGrid() = default;
  explicit VoxelGrid(int res) : res_(res), occ_(static_cast<std::size_t>(res) * res * res, 0) {}

  int res() const { return res_; }
  double pitch() const { return 2.0 / res_; }

  bool at(int ix, int iy, int iz) const { return occ_[index(ix, iy, iz)] != 0; }
  void set(int ix, int iy, int iz, bool v) { occ_[index(ix, iy, iz)] = v ? 1 : 0; }
  bool in_bounds(int ix, int iy, int iz) const {
    return ix >= 0 && iy >= 0 && iz >= 0 && ix < res_ && iy < res_ && iz < res_;
  }

  double center(int i) const { return -1.0 + (i + 0.5) * pitch(); }

  std::size_t count() const;
  bool empty() const { return count() == 0; }

  const std::vector<std::uint8_t>& raw() const { return occ_; }

  bool operator==(const VoxelGrid&) const = default;

  std::size_t index(int ix, int iy, int iz) const {
    return (static_cast<std::size_t>(ix) * res_ + iy) * res_ + iz;
  }

 private:
  int res_ = 0;
  std::vector<std::uint8_t> occ_;
};

VoxelGrid grid_union(const VoxelGrid& a, const VoxelGrid& b);
VoxelGrid grid_cut(const VoxelGrid& a, const VoxelGrid& b);
VoxelGrid grid_intersect(const VoxelGrid& a, const VoxelGrid& b);
VoxelGrid grid_apply(cad::BoolOp op, const VoxelGrid& a, const VoxelGrid& b);

/// {"resolution": R, "occupied": [flat indices]}
std::string to_json(const VoxelGrid& grid);
VoxelGrid voxel_grid_from_json(const std::string& text);

}  // namespace cadseq::geom
