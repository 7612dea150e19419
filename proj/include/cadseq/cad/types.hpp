#pragma once

#include <array>
#include <cstdint>
#include <string>

namespace cadseq::cad {

/// The six command tags. The enum values are the stable indices used in the
/// type column of a token matrix.
enum class CommandType : std::int8_t {
  sol = 0,
  line = 1,
  arc = 2,
  circle = 3,
  extrude = 4,
  eos = 5,
};

inline constexpr int kNumCommandTypes = 6;
inline constexpr int kNumParamSlots = 16;
inline constexpr int kNumColumns = 1 + kNumParamSlots;
inline constexpr int kSeqLen = 60;       // fixed sequence length after padding
inline constexpr int kMaxLogicalLen = kSeqLen - 1;  // row 59 is always EOS
inline constexpr int kQuantBins = 256;   // parameter values quantize to [0,255]
inline constexpr int kParamClasses = kQuantBins + 1;  // class 0 encodes the -1 sentinel
inline constexpr std::int16_t kUnused = -1;

const char* to_string(CommandType t);
CommandType command_type_from_index(int idx);

/// Parameter slot order: [x, y, theta, c, r, alpha, beta, gamma,
///                        ox, oy, oz, s, d1, d2, b, w]
enum ParamSlot : int {
  kSlotX = 0,
  kSlotY = 1,
  kSlotTheta = 2,
  kSlotCcw = 3,
  kSlotRadius = 4,
  kSlotAlpha = 5,
  kSlotBeta = 6,
  kSlotGamma = 7,
  kSlotOx = 8,
  kSlotOy = 9,
  kSlotOz = 10,
  kSlotScale = 11,
  kSlotDist1 = 12,
  kSlotDist2 = 13,
  kSlotBool = 14,
  kSlotType = 15,
};

/// Extrude type values (slot w).
enum ExtrudeKind : int { kOneSided = 0, kSymmetric = 1, kTwoSided = 2 };

/// Boolean op values (slot b).
enum BoolOp : int { kJoin = 0, kCut = 1, kIntersect = 2 };

/// used_slots()[t][s] is true when command type t uses parameter slot s.
using SlotMask = std::array<bool, kNumParamSlots>;
const std::array<SlotMask, kNumCommandTypes>& used_slots();

/// One command: a tag plus the 16-slot quantized parameter vector. Unused
/// slots hold -1.
struct CadCommand {
  CommandType ctype{CommandType::eos};
  std::array<std::int16_t, kNumParamSlots> params{};

  CadCommand() { params.fill(kUnused); }

  static CadCommand sol();
  static CadCommand eos();
  static CadCommand line(int x, int y);
  static CadCommand arc(int x, int y, int theta, int ccw);
  static CadCommand circle(int x, int y, int r);
  static CadCommand extrude(int alpha, int beta, int gamma, int ox, int oy, int oz,
                            int s, int d1, int d2, int b, int w);

  bool operator==(const CadCommand&) const = default;
};

/// Validates the used/unused slot pattern and per-slot ranges of Table-style
/// commands; returns an empty string when well formed, else a description.
std::string slot_pattern_error(const CadCommand& cmd);

}  // namespace cadseq::cad
