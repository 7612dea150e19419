#pragma once

#include <vector>

#include "cadseq/cad/sequence.hpp"

namespace cadseq::geom {

struct Vec2 {
  double x = 0.0;
  double y = 0.0;
};

/// Closed 2D polygon in sketch units; the last point connects back to the
/// first (no duplicated endpoint).
struct LoopPolyline {
  std::vector<Vec2> points;

  double signed_area() const;
  int orientation() const;  // sign of the signed area
};

/// Discretizes one loop span (SOL + curves). Curves chain head-to-tail with
/// the first curve starting at the last curve's endpoint. Lines contribute
/// one segment, arcs arc_segments segments, a circle a regular
/// (4*arc_segments)-gon.
///
/// Throws OpenLoop on degenerate chords / too few curves and DegenerateArc
/// when a sweep angle dequantizes below one quantization step.
LoopPolyline discretize_loop(const std::vector<cad::CadCommand>& loop, int arc_segments);

}  // namespace cadseq::geom
