#pragma once

#include <cmath>

#include "cadseq/cad/types.hpp"

namespace cadseq::cad {

/// Linear 256-bin quantizer over [lo, hi]. Values outside the range clamp;
/// values exactly on an interior bin boundary go to the lower bin.
int quantize(double value, double lo, double hi);

/// Center of bin `bin` of the [lo, hi] quantizer.
double dequantize(int bin, double lo, double hi);

/// Half of one quantization step.
double quant_step(double lo, double hi);

/// Continuous parameter families and their dequantization ranges.
/// Sketch-plane coordinates live in the per-sequence normalized square,
/// extrusion placement in the global model cube, angles in radians. Extrude
/// distances and the profile scale are nonnegative cube-relative lengths so
/// that quantized 0 means a zero-length extrusion (the degenerate case the
/// structural validity rule rejects).
enum class ParamFamily {
  sketch_coord,   // x, y, r: [-1, 1]
  sweep_angle,    // theta: (0, 2*pi], quantized over [0, 2*pi]
  plane_angle,    // alpha, beta, gamma: [-pi, pi]
  plane_origin,   // ox, oy, oz: [-1, 1]
  cube_length,    // s, d1, d2: [0, 1]
};

ParamFamily family_of_slot(int slot);  // continuous slots only
bool is_categorical_slot(int slot);    // c, b, w

double family_lo(ParamFamily f);
double family_hi(ParamFamily f);

int quantize_slot(int slot, double value);
double dequantize_slot(int slot, int bin);

}  // namespace cadseq::cad
