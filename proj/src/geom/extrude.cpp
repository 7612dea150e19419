#include "cadseq/geom/extrude.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "cadseq/cad/quantize.hpp"
#include "cadseq/geom/polyline.hpp"
#include "cadseq/util/error.hpp"

namespace cadseq::geom {

using cad::CadCommand;
using cad::SketchExtrudePair;

namespace {

struct Vec3 {
  double x = 0, y = 0, z = 0;
};

double dot(const Vec3& a, const Vec3& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

struct Frame {
  Vec3 eu, ev, n;  // orthonormal plane basis (columns of Rz*Ry*Rx)
  Vec3 origin;
  double scale = 1.0;
  double t_lo = 0.0, t_hi = 0.0;
  cad::BoolOp op = cad::kJoin;
};

Frame frame_from_extrude(const CadCommand& e) {
  using namespace cad;
  const double alpha = dequantize_slot(kSlotAlpha, e.params[kSlotAlpha]);
  const double beta = dequantize_slot(kSlotBeta, e.params[kSlotBeta]);
  const double gamma = dequantize_slot(kSlotGamma, e.params[kSlotGamma]);
  const double ca = std::cos(alpha), sa = std::sin(alpha);
  const double cb = std::cos(beta), sb = std::sin(beta);
  const double cg = std::cos(gamma), sg = std::sin(gamma);

  Frame f;
  // columns of Rz(alpha) * Ry(beta) * Rx(gamma)
  f.eu = {ca * cb, sa * cb, -sb};
  f.ev = {ca * sb * sg - sa * cg, sa * sb * sg + ca * cg, cb * sg};
  f.n = {ca * sb * cg + sa * sg, sa * sb * cg - ca * sg, cb * cg};
  f.origin = {dequantize_slot(kSlotOx, e.params[kSlotOx]),
              dequantize_slot(kSlotOy, e.params[kSlotOy]),
              dequantize_slot(kSlotOz, e.params[kSlotOz])};
  f.scale = dequantize_slot(kSlotScale, e.params[kSlotScale]);

  const double d1 = dequantize_slot(kSlotDist1, e.params[kSlotDist1]);
  const double d2 = dequantize_slot(kSlotDist2, e.params[kSlotDist2]);
  switch (e.params[cad::kSlotType]) {
    case kOneSided:
      f.t_lo = 0.0;
      f.t_hi = d1;
      break;
    case kSymmetric:
      f.t_lo = -d1 / 2.0;
      f.t_hi = d1 / 2.0;
      break;
    default:  // two-sided
      f.t_lo = -d2;
      f.t_hi = d1;
      break;
  }
  f.op = static_cast<cad::BoolOp>(e.params[cad::kSlotBool]);
  return f;
}

// Even-odd raster mask of the profile in sketch (u,v) units, dilated by the
// voxel footprint so center sampling stays conservative.
struct ProfileMask {
  double u0 = 0, v0 = 0;
  double cell_u = 1, cell_v = 1;
  int nu = 0, nv = 0;
  std::vector<std::uint8_t> cells;
  bool any = false;

  bool sample(double u, double v) const {
    const int i = static_cast<int>(std::floor((u - u0) / cell_u));
    const int j = static_cast<int>(std::floor((v - v0) / cell_v));
    if (i < 0 || j < 0 || i >= nu || j >= nv) return false;
    return cells[static_cast<std::size_t>(j) * nu + i] != 0;
  }
};

constexpr int kMaxMaskDim = 2048;

void dilate_axis(std::vector<std::uint8_t>& cells, int nu, int nv, int radius,
                 bool horizontal) {
  if (radius <= 0) return;
  std::vector<std::uint8_t> out(cells.size(), 0);
  if (horizontal) {
    for (int j = 0; j < nv; ++j) {
      const std::uint8_t* row = cells.data() + static_cast<std::size_t>(j) * nu;
      std::uint8_t* orow = out.data() + static_cast<std::size_t>(j) * nu;
      int run = 0;  // count of set cells in the sliding window
      for (int i = -radius; i < nu; ++i) {
        const int add = i + radius;
        if (add < nu && row[add]) ++run;
        const int del = i - radius - 1;
        if (del >= 0 && row[del]) --run;
        if (i >= 0 && run > 0) orow[i] = 1;
      }
    }
  } else {
    for (int i = 0; i < nu; ++i) {
      int run = 0;
      for (int j = -radius; j < nv; ++j) {
        const int add = j + radius;
        if (add < nv && cells[static_cast<std::size_t>(add) * nu + i]) ++run;
        const int del = j - radius - 1;
        if (del >= 0 && cells[static_cast<std::size_t>(del) * nu + i]) --run;
        if (j >= 0 && run > 0) out[static_cast<std::size_t>(j) * nu + i] = 1;
      }
    }
  }
  cells.swap(out);
}

ProfileMask build_mask(const std::vector<LoopPolyline>& loops, double bbox_u0,
                       double bbox_u1, double bbox_v0, double bbox_v1,
                       double target_cell, double rad_u, double rad_v) {
  ProfileMask mask;
  mask.u0 = bbox_u0;
  mask.v0 = bbox_v0;
  const double span_u = bbox_u1 - bbox_u0;
  const double span_v = bbox_v1 - bbox_v0;
  mask.nu = std::clamp(static_cast<int>(std::ceil(span_u / target_cell)), 1, kMaxMaskDim);
  mask.nv = std::clamp(static_cast<int>(std::ceil(span_v / target_cell)), 1, kMaxMaskDim);
  mask.cell_u = span_u / mask.nu;
  mask.cell_v = span_v / mask.nv;
  mask.cells.assign(static_cast<std::size_t>(mask.nu) * mask.nv, 0);

  std::vector<double> crossings;
  for (int j = 0; j < mask.nv; ++j) {
    const double vc = mask.v0 + (j + 0.5) * mask.cell_v;
    crossings.clear();
    for (const LoopPolyline& loop : loops) {
      const std::size_t n = loop.points.size();
      for (std::size_t i = 0; i < n; ++i) {
        const Vec2& p = loop.points[i];
        const Vec2& q = loop.points[(i + 1) % n];
        if ((p.y <= vc) == (q.y <= vc)) continue;
        crossings.push_back(p.x + (vc - p.y) * (q.x - p.x) / (q.y - p.y));
      }
    }
    std::sort(crossings.begin(), crossings.end());
    std::uint8_t* row = mask.cells.data() + static_cast<std::size_t>(j) * mask.nu;
    for (std::size_t t = 0; t + 1 < crossings.size(); t += 2) {
      // cells whose center u lies in [x0, x1)
      const double x0 = crossings[t], x1 = crossings[t + 1];
      int i0 = static_cast<int>(std::ceil((x0 - mask.u0) / mask.cell_u - 0.5));
      int i1 = static_cast<int>(std::floor((x1 - mask.u0) / mask.cell_u - 0.5));
      const double c1 = mask.u0 + (i1 + 0.5) * mask.cell_u;
      if (i1 >= 0 && c1 >= x1) --i1;
      i0 = std::max(i0, 0);
      i1 = std::min(i1, mask.nu - 1);
      for (int i = i0; i <= i1; ++i) row[i] = 1;
    }
  }
  // The solid is the closed profile region: mark the cells the boundary
  // passes through as well. This keeps endpoint-preserving augmentations
  // from ever producing a false-empty body at finite mask resolution.
  const double step = std::min(mask.cell_u, mask.cell_v) / 4.0;
  for (const LoopPolyline& loop : loops) {
    const std::size_t n = loop.points.size();
    for (std::size_t i = 0; i < n; ++i) {
      const Vec2& p = loop.points[i];
      const Vec2& q = loop.points[(i + 1) % n];
      const double len = std::hypot(q.x - p.x, q.y - p.y);
      const int samples = std::max(1, static_cast<int>(std::ceil(len / step)));
      for (int t = 0; t <= samples; ++t) {
        const double u = p.x + (q.x - p.x) * t / samples;
        const double v = p.y + (q.y - p.y) * t / samples;
        const int ci = static_cast<int>(std::floor((u - mask.u0) / mask.cell_u));
        const int cj = static_cast<int>(std::floor((v - mask.v0) / mask.cell_v));
        if (ci >= 0 && cj >= 0 && ci < mask.nu && cj < mask.nv)
          mask.cells[static_cast<std::size_t>(cj) * mask.nu + ci] = 1;
      }
    }
  }

  mask.any = std::find(mask.cells.begin(), mask.cells.end(), std::uint8_t(1)) != mask.cells.end();

  dilate_axis(mask.cells, mask.nu, mask.nv,
              static_cast<int>(std::ceil(rad_u / mask.cell_u + 0.5)), true);
  dilate_axis(mask.cells, mask.nu, mask.nv,
              static_cast<int>(std::ceil(rad_v / mask.cell_v + 0.5)), false);
  return mask;
}

}  // namespace

VoxelGrid extrude_pair(const SketchExtrudePair& pair, const VoxelGrid& grid,
                       const GeomConfig& cfg) {
  const Frame f = frame_from_extrude(pair.extrude);
  const int res = grid.res();
  const double h = grid.pitch();

  std::vector<LoopPolyline> loops;
  loops.reserve(pair.loops.size());
  for (const auto& loop : pair.loops) loops.push_back(discretize_loop(loop, cfg.arc_segments));

  // profile bbox in sketch units
  double pu0 = std::numeric_limits<double>::infinity(), pu1 = -pu0;
  double pv0 = pu0, pv1 = -pu0;
  for (const LoopPolyline& loop : loops)
    for (const Vec2& p : loop.points) {
      pu0 = std::min(pu0, p.x);
      pu1 = std::max(pu1, p.x);
      pv0 = std::min(pv0, p.y);
      pv1 = std::max(pv1, p.y);
    }

  // (u,v) window that covers every point of the cube, from the 8 corners
  double wu0 = std::numeric_limits<double>::infinity(), wu1 = -wu0;
  double wv0 = wu0, wv1 = -wu0;
  for (int cx = -1; cx <= 1; cx += 2)
    for (int cy = -1; cy <= 1; cy += 2)
      for (int cz = -1; cz <= 1; cz += 2) {
        const Vec3 q{cx - f.origin.x, cy - f.origin.y, cz - f.origin.z};
        const double u = dot(q, f.eu) / f.scale;
        const double v = dot(q, f.ev) / f.scale;
        wu0 = std::min(wu0, u);
        wu1 = std::max(wu1, u);
        wv0 = std::min(wv0, v);
        wv1 = std::max(wv1, v);
      }

  // voxel footprint half-widths, in sketch units / along the normal
  const double rad_u = 0.5 * h * (std::abs(f.eu.x) + std::abs(f.eu.y) + std::abs(f.eu.z)) / f.scale;
  const double rad_v = 0.5 * h * (std::abs(f.ev.x) + std::abs(f.ev.y) + std::abs(f.ev.z)) / f.scale;
  const double rad_t = 0.5 * h * (std::abs(f.n.x) + std::abs(f.n.y) + std::abs(f.n.z));

  const double mu0 = std::max(pu0 - 2.0 * rad_u, wu0);
  const double mu1 = std::min(pu1 + 2.0 * rad_u, wu1);
  const double mv0 = std::max(pv0 - 2.0 * rad_v, wv0);
  const double mv1 = std::min(pv1 + 2.0 * rad_v, wv1);
  if (!(mu0 < mu1) || !(mv0 < mv1))
    fail(ErrorKind::out_of_extent, "profile footprint misses the model cube");

  const double target_cell = std::max((h / f.scale) / 4.0, 1e-9);
  const ProfileMask mask =
      build_mask(loops, mu0, mu1, mv0, mv1, target_cell, rad_u, rad_v);
  if (!mask.any) fail(ErrorKind::empty_solid, "profile interior is empty");

  // world bbox of the swept mask region
  double bx0 = std::numeric_limits<double>::infinity(), bx1 = -bx0;
  double by0 = bx0, by1 = -bx0;
  double bz0 = bx0, bz1 = -bx0;
  for (const double u : {mu0, mu1})
    for (const double v : {mv0, mv1})
      for (const double t : {f.t_lo - rad_t, f.t_hi + rad_t}) {
        const double su = u * f.scale, sv = v * f.scale;
        const double x = f.origin.x + su * f.eu.x + sv * f.ev.x + t * f.n.x;
        const double y = f.origin.y + su * f.eu.y + sv * f.ev.y + t * f.n.y;
        const double z = f.origin.z + su * f.eu.z + sv * f.ev.z + t * f.n.z;
        bx0 = std::min(bx0, x);
        bx1 = std::max(bx1, x);
        by0 = std::min(by0, y);
        by1 = std::max(by1, y);
        bz0 = std::min(bz0, z);
        bz1 = std::max(bz1, z);
      }

  auto lo_index = [&](double w) {
    return std::max(0, static_cast<int>(std::ceil((w + 1.0) / h - 0.5)) - 1);
  };
  auto hi_index = [&](double w) {
    return std::min(res - 1, static_cast<int>(std::floor((w + 1.0) / h - 0.5)) + 1);
  };
  const int ix0 = lo_index(bx0), ix1 = hi_index(bx1);
  const int iy0 = lo_index(by0), iy1 = hi_index(by1);
  const int iz0 = lo_index(bz0), iz1 = hi_index(bz1);

  const double t_mid = (f.t_lo + f.t_hi) / 2.0;
  const double t_half = (f.t_hi - f.t_lo) / 2.0 + rad_t;

  VoxelGrid body(res);
  std::size_t body_count = 0;
  for (int ix = ix0; ix <= ix1; ++ix) {
    const double cx = body.center(ix) - f.origin.x;
    for (int iy = iy0; iy <= iy1; ++iy) {
      const double cy = body.center(iy) - f.origin.y;
      for (int iz = iz0; iz <= iz1; ++iz) {
        const double cz = body.center(iz) - f.origin.z;
        const double t = cx * f.n.x + cy * f.n.y + cz * f.n.z;
        if (std::abs(t - t_mid) > t_half) continue;
        const double u = (cx * f.eu.x + cy * f.eu.y + cz * f.eu.z) / f.scale;
        const double v = (cx * f.ev.x + cy * f.ev.y + cz * f.ev.z) / f.scale;
        if (!mask.sample(u, v)) continue;
        body.set(ix, iy, iz, true);
        ++body_count;
      }
    }
  }
  if (body_count == 0) fail(ErrorKind::out_of_extent, "body entirely outside the model cube");

  return grid_apply(f.op, grid, body);
}

VoxelGrid realize(const cad::CadSequence& seq, int resolution, const GeomConfig& cfg) {
  try {
    VoxelGrid grid(resolution);
    for (const SketchExtrudePair& pair : split_pairs(seq))
      grid = extrude_pair(pair, grid, cfg);
    if (grid.empty()) fail(ErrorKind::empty_solid, "final model has no voxels");
    return grid;
  } catch (const CadError& e) {
    fail(ErrorKind::geometric_invalidity, e.what());
  }
}

RealizeResult try_realize(const cad::CadSequence& seq, const GeomConfig& cfg) {
  RealizeResult r;
  try {
    r.grid = realize(seq, cfg.resolution, cfg);
  } catch (const CadError& e) {
    r.failure = e.what();
  }
  return r;
}

}  // namespace cadseq::geom
