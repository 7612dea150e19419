#include "cadseq/geom/pointcloud.hpp"

#include <array>
#include <fstream>

#include "cadseq/kernels/kernels.hpp"
#include "cadseq/util/error.hpp"

namespace cadseq::geom {

namespace {

// face direction: axis 0..2, sign 0 (negative) / 1 (positive)
struct Face {
  int ix, iy, iz, axis, sign;
};

constexpr std::array<std::array<int, 3>, 6> kNeighbors = {{
    {{-1, 0, 0}}, {{1, 0, 0}}, {{0, -1, 0}}, {{0, 1, 0}}, {{0, 0, -1}}, {{0, 0, 1}},
}};

}  // namespace

PointCloud sample_surface(const VoxelGrid& grid, int n, std::uint64_t seed) {
  if (grid.empty()) fail(ErrorKind::empty_solid, "cannot sample an empty grid");
  const int res = grid.res();

  std::vector<Face> faces;
  for (int ix = 0; ix < res; ++ix)
    for (int iy = 0; iy < res; ++iy)
      for (int iz = 0; iz < res; ++iz) {
        if (!grid.at(ix, iy, iz)) continue;
        for (int d = 0; d < 6; ++d) {
          const int nx = ix + kNeighbors[d][0];
          const int ny = iy + kNeighbors[d][1];
          const int nz = iz + kNeighbors[d][2];
          if (grid.in_bounds(nx, ny, nz) && grid.at(nx, ny, nz)) continue;
          faces.push_back({ix, iy, iz, d / 2, d % 2});
        }
      }

  const double h = grid.pitch();
  PointCloud cloud;
  cloud.xs.reserve(static_cast<std::size_t>(n));
  cloud.ys.reserve(static_cast<std::size_t>(n));
  cloud.zs.reserve(static_cast<std::size_t>(n));
  Rng rng(seed);
  for (int i = 0; i < n; ++i) {
    const Face& f = faces[static_cast<std::size_t>(
        rng.uniform_int(0, static_cast<int>(faces.size()) - 1))];
    const double a = rng.uniform01();
    const double b = rng.uniform01();
    double p[3] = {grid.center(f.ix), grid.center(f.iy), grid.center(f.iz)};
    p[f.axis] += (f.sign == 1 ? 0.5 : -0.5) * h;
    const int ua = (f.axis + 1) % 3;
    const int ub = (f.axis + 2) % 3;
    p[ua] += (a - 0.5) * h;
    p[ub] += (b - 0.5) * h;
    cloud.push_back(p[0], p[1], p[2]);
  }
  return cloud;
}

double chamfer_distance(const PointCloud& p, const PointCloud& q) {
  if (p.size() == 0 || q.size() == 0)
    fail(ErrorKind::empty_cloud, "chamfer distance needs non-empty clouds");

  double sum_pq = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i)
    sum_pq += kernels::min_sqdist3(p.xs[i], p.ys[i], p.zs[i], q.xs.data(),
                                   q.ys.data(), q.zs.data(), q.size());
  double sum_qp = 0.0;
  for (std::size_t i = 0; i < q.size(); ++i)
    sum_qp += kernels::min_sqdist3(q.xs[i], q.ys[i], q.zs[i], p.xs.data(),
                                   p.ys.data(), p.zs.data(), p.size());
  return sum_pq / static_cast<double>(p.size()) + sum_qp / static_cast<double>(q.size());
}

void save_csv(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io_error, "cannot write " + path);
  out << "x,y,z\n";
  out.precision(17);
  for (std::size_t i = 0; i < cloud.size(); ++i)
    out << cloud.xs[i] << ',' << cloud.ys[i] << ',' << cloud.zs[i] << '\n';
}

}  // namespace cadseq::geom
