#pragma once

#include <optional>
#include <string>

#include "cadseq/cad/sequence.hpp"
#include "cadseq/geom/voxel.hpp"

namespace cadseq::geom {

struct GeomConfig {
  int resolution = 64;
  int arc_segments = 16;
  int n_points = 2000;
};

/// Rasterizes one sketch-extrude pair and merges it into `grid` with the
/// pair's boolean op. The profile is the even-odd fill of all loops, scaled
/// by s, placed at origin (ox,oy,oz) with plane orientation given by the
/// Z-Y-X Euler angles (alpha,beta,gamma), swept along the plane normal:
/// one-sided [0, d1], symmetric [-d1/2, d1/2], two-sided [-d2, d1].
///
/// Rasterization is conservative by about one voxel layer so that thin but
/// non-degenerate bodies never vanish. Throws EmptySolid / OutOfExtent.
VoxelGrid extrude_pair(const cad::SketchExtrudePair& pair, const VoxelGrid& grid,
                       const GeomConfig& cfg);

/// Folds extrude_pair over split_pairs(seq) on an empty grid of the given
/// resolution. Any discretization/extrusion failure is rethrown as
/// GeometricInvalidity; an empty final grid is one as well.
VoxelGrid realize(const cad::CadSequence& seq, int resolution, const GeomConfig& cfg);

struct RealizeResult {
  std::optional<VoxelGrid> grid;        // set on success
  std::optional<std::string> failure;   // set on geometric invalidity
  bool ok() const { return grid.has_value(); }
};

/// Non-throwing wrapper used by validity metrics.
RealizeResult try_realize(const cad::CadSequence& seq, const GeomConfig& cfg);

}  // namespace cadseq::geom
