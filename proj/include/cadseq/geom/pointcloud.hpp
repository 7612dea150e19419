#pragma once

#include <string>
#include <vector>

#include "cadseq/geom/voxel.hpp"
#include "cadseq/util/rng.hpp"

namespace cadseq::geom {

/// SoA point set in world coordinates.
struct PointCloud {
  std::vector<double> xs, ys, zs;

  std::size_t size() const { return xs.size(); }
  void push_back(double x, double y, double z) {
    xs.push_back(x);
    ys.push_back(y);
    zs.push_back(z);
  }
};

/// Draws n points uniformly over the exposed faces of occupied voxels
/// (faces all share the same area, so uniform-over-faces is area-weighted).
/// Deterministic in (grid, n, seed). Throws EmptySolid on an empty grid.
PointCloud sample_surface(const VoxelGrid& grid, int n, std::uint64_t seed);

/// Symmetric squared-distance Chamfer:
///   (1/|P|) sum_p min_q |p-q|^2 + (1/|Q|) sum_q min_p |q-p|^2.
double chamfer_distance(const PointCloud& p, const PointCloud& q);

/// CSV with header x,y,z.
void save_csv(const std::string& path, const PointCloud& cloud);

}  // namespace cadseq::geom
