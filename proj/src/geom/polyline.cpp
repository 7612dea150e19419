#include "cadseq/geom/polyline.hpp"

#include <cmath>

#include "cadseq/cad/quantize.hpp"
#include "cadseq/util/error.hpp"

namespace cadseq::geom {

using cad::CadCommand;
using cad::CommandType;

double LoopPolyline::signed_area() const {
  double a2 = 0.0;
  const std::size_t n = points.size();
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2& p = points[i];
    const Vec2& q = points[(i + 1) % n];
    a2 += p.x * q.y - q.x * p.y;
  }
  return 0.5 * a2;
}

int LoopPolyline::orientation() const {
  const double a = signed_area();
  return a > 0.0 ? 1 : (a < 0.0 ? -1 : 0);
}

namespace {

double sketch_tol() {
  return cad::quant_step(cad::family_lo(cad::ParamFamily::sketch_coord),
                         cad::family_hi(cad::ParamFamily::sketch_coord)) /
         2.0;
}

void append_arc(LoopPolyline& poly, Vec2 s, Vec2 e, double theta, bool ccw_flag,
                int segments) {
  const double dx = e.x - s.x;
  const double dy = e.y - s.y;
  const double chord = std::hypot(dx, dy);
  if (chord <= sketch_tol()) fail(ErrorKind::open_loop, "zero-length arc chord");

  const double half = chord / 2.0;
  const double radius = half / std::sin(theta / 2.0);
  const double offset = half / std::tan(theta / 2.0);
  const Vec2 mid{(s.x + e.x) / 2.0, (s.y + e.y) / 2.0};
  const Vec2 left{-dy / chord, dx / chord};

  // ccw flag set: center sits right of the chord and the angle decreases,
  // so the arc from (0,0) to (1,0) with theta=pi passes through (0.5, 0.5).
  const double side = ccw_flag ? -1.0 : 1.0;
  const Vec2 c{mid.x + side * offset * left.x, mid.y + side * offset * left.y};
  const double phi0 = std::atan2(s.y - c.y, s.x - c.x);
  const double sweep = side * theta;

  for (int t = 1; t < segments; ++t) {
    const double phi = phi0 + sweep * t / segments;
    poly.points.push_back({c.x + radius * std::cos(phi), c.y + radius * std::sin(phi)});
  }
  poly.points.push_back(e);  // exact chain endpoint, no trig drift
}

}  // namespace

LoopPolyline discretize_loop(const std::vector<CadCommand>& loop, int arc_segments) {
  if (loop.size() < 2 || loop.front().ctype != CommandType::sol)
    fail(ErrorKind::open_loop, "loop must start with SOL and contain curves");

  if (loop[1].ctype == CommandType::circle) {
    if (loop.size() != 2) fail(ErrorKind::open_loop, "circle loop with extra curves");
    const CadCommand& c = loop[1];
    const double cx = cad::dequantize_slot(cad::kSlotX, c.params[cad::kSlotX]);
    const double cy = cad::dequantize_slot(cad::kSlotY, c.params[cad::kSlotY]);
    const double r = cad::dequantize_slot(cad::kSlotRadius, c.params[cad::kSlotRadius]);
    if (!(r > sketch_tol())) fail(ErrorKind::open_loop, "degenerate circle radius");
    LoopPolyline poly;
    const int n = 4 * arc_segments;
    poly.points.reserve(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i) {
      const double phi = 2.0 * M_PI * i / n;
      poly.points.push_back({cx + r * std::cos(phi), cy + r * std::sin(phi)});
    }
    return poly;
  }

  std::vector<Vec2> ends;
  std::vector<const CadCommand*> curves;
  for (std::size_t i = 1; i < loop.size(); ++i) {
    const CadCommand& cmd = loop[i];
    if (cmd.ctype != CommandType::line && cmd.ctype != CommandType::arc)
      fail(ErrorKind::open_loop, "unexpected command inside a loop");
    ends.push_back({cad::dequantize_slot(cad::kSlotX, cmd.params[cad::kSlotX]),
                    cad::dequantize_slot(cad::kSlotY, cmd.params[cad::kSlotY])});
    curves.push_back(&cmd);
  }
  const std::size_t n = curves.size();
  if (n < 2) fail(ErrorKind::open_loop, "loop needs at least two curves");

  LoopPolyline poly;
  for (std::size_t i = 0; i < n; ++i) {
    const Vec2 start = ends[(i + n - 1) % n];
    const Vec2 end = ends[i];
    const CadCommand& cmd = *curves[i];
    if (cmd.ctype == CommandType::line) {
      if (std::hypot(end.x - start.x, end.y - start.y) <= sketch_tol())
        fail(ErrorKind::open_loop, "zero-length line segment");
      poly.points.push_back(end);
    } else {
      const double step = cad::quant_step(cad::family_lo(cad::ParamFamily::sweep_angle),
                                          cad::family_hi(cad::ParamFamily::sweep_angle));
      const double theta =
          cad::dequantize_slot(cad::kSlotTheta, cmd.params[cad::kSlotTheta]);
      if (theta < step) fail(ErrorKind::degenerate_arc, "sweep angle below one step");
      append_arc(poly, start, end, theta, cmd.params[cad::kSlotCcw] == 1, arc_segments);
    }
  }
  return poly;
}

}  // namespace cadseq::geom
