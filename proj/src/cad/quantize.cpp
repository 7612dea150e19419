#include "cadseq/cad/quantize.hpp"

#include "cadseq/util/error.hpp"

namespace cadseq::cad {

int quantize(double value, double lo, double hi) {
  if (!(lo < hi)) fail(ErrorKind::degenerate_range, "quantize needs lo < hi");
  if (value <= lo) return 0;
  if (value >= hi) return kQuantBins - 1;
  const double t = (value - lo) / (hi - lo) * kQuantBins;
  double bin = std::floor(t);
  if (bin == t) bin -= 1.0;  // boundary values resolve to the lower bin
  if (bin < 0.0) bin = 0.0;
  if (bin > kQuantBins - 1) bin = kQuantBins - 1;
  return static_cast<int>(bin);
}

double dequantize(int bin, double lo, double hi) {
  if (!(lo < hi)) fail(ErrorKind::degenerate_range, "dequantize needs lo < hi");
  return lo + (static_cast<double>(bin) + 0.5) * (hi - lo) / kQuantBins;
}

double quant_step(double lo, double hi) { return (hi - lo) / kQuantBins; }

ParamFamily family_of_slot(int slot) {
  switch (slot) {
    case kSlotX:
    case kSlotY:
    case kSlotRadius:
      return ParamFamily::sketch_coord;
    case kSlotTheta:
      return ParamFamily::sweep_angle;
    case kSlotAlpha:
    case kSlotBeta:
    case kSlotGamma:
      return ParamFamily::plane_angle;
    case kSlotOx:
    case kSlotOy:
    case kSlotOz:
      return ParamFamily::plane_origin;
    case kSlotScale:
    case kSlotDist1:
    case kSlotDist2:
      return ParamFamily::cube_length;
    default:
      fail(ErrorKind::index_out_of_range,
           "slot " + std::to_string(slot) + " has no continuous family");
  }
}

bool is_categorical_slot(int slot) {
  return slot == kSlotCcw || slot == kSlotBool || slot == kSlotType;
}

double family_lo(ParamFamily f) {
  switch (f) {
    case ParamFamily::sketch_coord: return -1.0;
    case ParamFamily::sweep_angle: return 0.0;
    case ParamFamily::plane_angle: return -M_PI;
    case ParamFamily::plane_origin: return -1.0;
    case ParamFamily::cube_length: return 0.0;
  }
  return 0.0;
}

double family_hi(ParamFamily f) {
  switch (f) {
    case ParamFamily::sketch_coord: return 1.0;
    case ParamFamily::sweep_angle: return 2.0 * M_PI;
    case ParamFamily::plane_angle: return M_PI;
    case ParamFamily::plane_origin: return 1.0;
    case ParamFamily::cube_length: return 1.0;
  }
  return 1.0;
}

int quantize_slot(int slot, double value) {
  const ParamFamily f = family_of_slot(slot);
  return quantize(value, family_lo(f), family_hi(f));
}

double dequantize_slot(int slot, int bin) {
  const ParamFamily f = family_of_slot(slot);
  return dequantize(bin, family_lo(f), family_hi(f));
}

}  // namespace cadseq::cad
