#include "cadseq/cad/types.hpp"

#include "cadseq/util/error.hpp"

namespace cadseq::cad {

const char* to_string(CommandType t) {
  switch (t) {
    case CommandType::sol: return "SOL";
    case CommandType::line: return "Line";
    case CommandType::arc: return "Arc";
    case CommandType::circle: return "Circle";
    case CommandType::extrude: return "Extrude";
    case CommandType::eos: return "EOS";
  }
  return "?";
}

CommandType command_type_from_index(int idx) {
  if (idx < 0 || idx >= kNumCommandTypes)
    fail(ErrorKind::out_of_range, "command type index " + std::to_string(idx));
  return static_cast<CommandType>(idx);
}

const std::array<SlotMask, kNumCommandTypes>& used_slots() {
  static const std::array<SlotMask, kNumCommandTypes> masks = [] {
    std::array<SlotMask, kNumCommandTypes> m{};
    auto set = [&](CommandType t, std::initializer_list<int> slots) {
      for (int s : slots) m[static_cast<int>(t)][s] = true;
    };
    set(CommandType::line, {kSlotX, kSlotY});
    set(CommandType::arc, {kSlotX, kSlotY, kSlotTheta, kSlotCcw});
    set(CommandType::circle, {kSlotX, kSlotY, kSlotRadius});
    set(CommandType::extrude, {kSlotAlpha, kSlotBeta, kSlotGamma, kSlotOx, kSlotOy,
                               kSlotOz, kSlotScale, kSlotDist1, kSlotDist2,
                               kSlotBool, kSlotType});
    return m;
  }();
  return masks;
}

namespace {

CadCommand make(CommandType t, std::initializer_list<std::pair<int, int>> vals) {
  CadCommand c;
  c.ctype = t;
  for (auto [slot, v] : vals) c.params[slot] = static_cast<std::int16_t>(v);
  return c;
}

}  // namespace

CadCommand CadCommand::sol() { return make(CommandType::sol, {}); }
CadCommand CadCommand::eos() { return make(CommandType::eos, {}); }
CadCommand CadCommand::line(int x, int y) {
  return make(CommandType::line, {{kSlotX, x}, {kSlotY, y}});
}
CadCommand CadCommand::arc(int x, int y, int theta, int ccw) {
  return make(CommandType::arc,
              {{kSlotX, x}, {kSlotY, y}, {kSlotTheta, theta}, {kSlotCcw, ccw}});
}
CadCommand CadCommand::circle(int x, int y, int r) {
  return make(CommandType::circle, {{kSlotX, x}, {kSlotY, y}, {kSlotRadius, r}});
}
CadCommand CadCommand::extrude(int alpha, int beta, int gamma, int ox, int oy,
                               int oz, int s, int d1, int d2, int b, int w) {
  return make(CommandType::extrude,
              {{kSlotAlpha, alpha},
               {kSlotBeta, beta},
               {kSlotGamma, gamma},
               {kSlotOx, ox},
               {kSlotOy, oy},
               {kSlotOz, oz},
               {kSlotScale, s},
               {kSlotDist1, d1},
               {kSlotDist2, d2},
               {kSlotBool, b},
               {kSlotType, w}});
}

std::string slot_pattern_error(const CadCommand& cmd) {
  const SlotMask& mask = used_slots()[static_cast<int>(cmd.ctype)];
  for (int s = 0; s < kNumParamSlots; ++s) {
    const int v = cmd.params[s];
    if (!mask[s]) {
      if (v != kUnused)
        return std::string(to_string(cmd.ctype)) + " slot " + std::to_string(s) +
               " must be -1, got " + std::to_string(v);
      continue;
    }
    int lo = 0, hi = kQuantBins - 1;
    if (s == kSlotCcw) hi = 1;
    if (s == kSlotBool || s == kSlotType) hi = 2;
    if (v < lo || v > hi)
      return std::string(to_string(cmd.ctype)) + " slot " + std::to_string(s) +
             " out of range: " + std::to_string(v);
  }
  return {};
}

}  // namespace cadseq::cad
