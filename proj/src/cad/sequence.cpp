#include "cadseq/cad/sequence.hpp"

#include <cmath>

#include "cadseq/cad/quantize.hpp"
#include "cadseq/util/error.hpp"

namespace cadseq::cad {

namespace {

bool is_curve(CommandType t) {
  return t == CommandType::line || t == CommandType::arc || t == CommandType::circle;
}

std::vector<CadCommand> prefix_of(const CadSequence& seq) {
  const auto& cmds = seq.commands();
  return {cmds.begin(), cmds.begin() + seq.logical_len()};
}

}  // namespace

CadSequence::CadSequence() : cmds_(kSeqLen, CadCommand::eos()), logical_len_(0) {}

std::optional<std::string> grammar_error(const std::vector<CadCommand>& prefix,
                                         bool require_trailing_extrude) {
  bool loop_open = false;
  bool loop_has_circle = false;
  int loop_curves = 0;
  int complete_loops = 0;  // since the last extrude

  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const CommandType t = prefix[i].ctype;
    if (t == CommandType::eos) return "EOS inside the logical prefix";
    if (t == CommandType::sol) {
      if (loop_open && loop_curves == 0) return "empty loop at command " + std::to_string(i - 1);
      if (loop_open) ++complete_loops;
      loop_open = true;
      loop_has_circle = false;
      loop_curves = 0;
      continue;
    }
    if (is_curve(t)) {
      if (!loop_open) return "curve outside a loop at command " + std::to_string(i);
      if (loop_has_circle) return "curve after a circle in the same loop at command " + std::to_string(i);
      if (t == CommandType::circle && loop_curves > 0)
        return "circle mixed with other curves at command " + std::to_string(i);
      loop_has_circle = t == CommandType::circle;
      ++loop_curves;
      continue;
    }
    // extrude
    if (loop_open && loop_curves == 0) return "empty loop at command " + std::to_string(i - 1);
    if (loop_open) ++complete_loops;
    loop_open = false;
    if (complete_loops == 0) return "extrude without a preceding loop at command " + std::to_string(i);
    complete_loops = 0;
  }

  if (require_trailing_extrude) {
    if (loop_open && loop_curves == 0) return "empty trailing loop";
    if (loop_open || complete_loops > 0) return "trailing loop without extrude";
  } else if (loop_open && loop_curves == 0) {
    return "empty trailing loop";
  }
  return std::nullopt;
}

CadSequence CadSequence::from_commands(const std::vector<CadCommand>& prefix) {
  if (prefix.size() > static_cast<std::size_t>(kMaxLogicalLen))
    fail(ErrorKind::grammar_violation,
         "logical length " + std::to_string(prefix.size()) + " exceeds " +
             std::to_string(kMaxLogicalLen));
  for (std::size_t i = 0; i < prefix.size(); ++i) {
    const std::string err = slot_pattern_error(prefix[i]);
    if (!err.empty())
      fail(ErrorKind::malformed_row, "command " + std::to_string(i) + ": " + err);
  }
  if (auto err = grammar_error(prefix, false))
    fail(ErrorKind::grammar_violation, *err);

  CadSequence seq;
  for (std::size_t i = 0; i < prefix.size(); ++i) seq.cmds_[i] = prefix[i];
  seq.logical_len_ = static_cast<int>(prefix.size());
  return seq;
}

CadSequence parse_sequence(const TokenMatrix& matrix) {
  if (matrix.rows < 0 || matrix.rows > kSeqLen)
    fail(ErrorKind::grammar_violation,
         "matrix has " + std::to_string(matrix.rows) + " rows, limit is " +
             std::to_string(kSeqLen));
  if (matrix.data.size() != static_cast<std::size_t>(matrix.rows) * kNumColumns)
    fail(ErrorKind::shape_mismatch, "matrix storage does not match its row count");

  for (int r = 0; r < matrix.rows; ++r)
    for (int c = 0; c < kNumColumns; ++c) {
      const int v = matrix.at(r, c);
      if (v < -1 || v > kQuantBins - 1)
        fail(ErrorKind::out_of_range, "entry (" + std::to_string(r) + "," +
                                          std::to_string(c) + ") = " + std::to_string(v));
    }

  std::vector<CadCommand> prefix;
  int first_eos = -1;
  for (int r = 0; r < matrix.rows; ++r) {
    const int tidx = matrix.at(r, 0);
    if (tidx < 0 || tidx >= kNumCommandTypes)
      fail(ErrorKind::out_of_range, "row " + std::to_string(r) + " type index " +
                                        std::to_string(tidx));
    CadCommand cmd;
    cmd.ctype = static_cast<CommandType>(tidx);
    for (int s = 0; s < kNumParamSlots; ++s) cmd.params[s] = matrix.at(r, 1 + s);

    const std::string err = slot_pattern_error(cmd);
    if (!err.empty()) fail(ErrorKind::malformed_row, "row " + std::to_string(r) + ": " + err);

    if (cmd.ctype == CommandType::eos) {
      if (first_eos < 0) first_eos = r;
      continue;
    }
    if (first_eos >= 0)
      fail(ErrorKind::grammar_violation,
           "non-EOS row " + std::to_string(r) + " after EOS at row " + std::to_string(first_eos));
    prefix.push_back(cmd);
  }
  if (first_eos < 0 && matrix.rows == kSeqLen)
    fail(ErrorKind::grammar_violation, "missing EOS");

  return CadSequence::from_commands(prefix);
}

TokenMatrix emit_matrix(const CadSequence& seq) {
  TokenMatrix m(kSeqLen);
  for (int r = 0; r < kSeqLen; ++r) {
    const CadCommand& cmd = seq.at(r);
    m.at(r, 0) = static_cast<std::int16_t>(cmd.ctype);
    for (int s = 0; s < kNumParamSlots; ++s) m.at(r, 1 + s) = cmd.params[s];
  }
  return m;
}

int SketchExtrudePair::command_count() const {
  int n = 1;  // the extrude
  for (const auto& loop : loops) n += static_cast<int>(loop.size());
  return n;
}

std::vector<SketchExtrudePair> split_pairs(const CadSequence& seq) {
  const std::vector<CadCommand> prefix = prefix_of(seq);
  if (auto err = grammar_error(prefix, true)) fail(ErrorKind::grammar_violation, *err);

  std::vector<SketchExtrudePair> pairs;
  SketchExtrudePair cur;
  std::vector<CadCommand> loop;
  for (const CadCommand& cmd : prefix) {
    if (cmd.ctype == CommandType::sol) {
      if (!loop.empty()) cur.loops.push_back(std::move(loop));
      loop.clear();
      loop.push_back(cmd);
    } else if (is_curve(cmd.ctype)) {
      loop.push_back(cmd);
    } else {  // extrude
      if (!loop.empty()) cur.loops.push_back(std::move(loop));
      loop.clear();
      cur.extrude = cmd;
      pairs.push_back(std::move(cur));
      cur = SketchExtrudePair{};
    }
  }
  return pairs;
}

std::vector<CadCommand> flatten_pairs(const std::vector<SketchExtrudePair>& pairs) {
  std::vector<CadCommand> out;
  for (const auto& pair : pairs) {
    for (const auto& loop : pair.loops)
      out.insert(out.end(), loop.begin(), loop.end());
    out.push_back(pair.extrude);
  }
  return out;
}

namespace {

struct LoopGeometry {
  std::vector<std::pair<double, double>> vertices;  // dequantized curve endpoints
  bool line_only = true;
  bool is_circle = false;
  const CadCommand* circle = nullptr;
};

LoopGeometry loop_geometry(const std::vector<CadCommand>& loop) {
  LoopGeometry g;
  for (std::size_t i = 1; i < loop.size(); ++i) {  // skip the SOL
    const CadCommand& cmd = loop[i];
    if (cmd.ctype == CommandType::circle) {
      g.is_circle = true;
      g.circle = &cmd;
      return g;
    }
    if (cmd.ctype != CommandType::line) g.line_only = false;
    g.vertices.emplace_back(dequantize_slot(kSlotX, cmd.params[kSlotX]),
                            dequantize_slot(kSlotY, cmd.params[kSlotY]));
  }
  return g;
}

// First failed loop rule, or empty. The chain convention (each curve starts
// at the previous endpoint, the first at the last's) closes loops by
// construction, so the open-loop check degenerates to a degeneracy check:
// coincident consecutive vertices or a line-only polygon with ~zero area.
std::string loop_rule_error(const LoopGeometry& g) {
  const double tol = quant_step(family_lo(ParamFamily::sketch_coord),
                                family_hi(ParamFamily::sketch_coord)) /
                     2.0;
  if (g.is_circle) {
    const double r = dequantize_slot(kSlotRadius, g.circle->params[kSlotRadius]);
    if (!(r > tol)) return "degenerate_circle";
    return {};
  }
  const auto& v = g.vertices;
  const std::size_t n = v.size();
  if (n < 2) return "open_loop";
  for (std::size_t i = 0; i < n; ++i) {
    const auto& a = v[(i + n - 1) % n];
    const auto& b = v[i];
    if (std::hypot(b.first - a.first, b.second - a.second) <= tol) return "open_loop";
  }
  if (g.line_only) {
    double area2 = 0.0;  // shoelace, twice the signed area
    for (std::size_t i = 0; i < n; ++i) {
      const auto& a = v[i];
      const auto& b = v[(i + 1) % n];
      area2 += a.first * b.second - b.first * a.second;
    }
    if (std::abs(area2) <= 2.0 * tol * tol) return "open_loop";
  }
  return {};
}

}  // namespace

ValidityReport validate_structure(const CadSequence& seq) {
  if (seq.logical_len() == 0) return {false, "empty_sequence"};

  const std::vector<CadCommand> prefix = prefix_of(seq);
  if (auto err = grammar_error(prefix, true)) return {false, "grammar: " + *err};

  for (const CadCommand& cmd : prefix) {
    if (cmd.ctype != CommandType::extrude) continue;
    const int w = cmd.params[kSlotType];
    const int d1 = cmd.params[kSlotDist1];
    const int d2 = cmd.params[kSlotDist2];
    const bool ok = (w == kSymmetric) ? d1 > 0 : d1 + d2 > 0;
    if (!ok) return {false, "degenerate_extrusion"};
  }

  for (const SketchExtrudePair& pair : split_pairs(seq)) {
    for (const auto& loop : pair.loops) {
      const std::string err = loop_rule_error(loop_geometry(loop));
      if (!err.empty()) return {false, err};
    }
  }
  return {true, std::nullopt};
}

}  // namespace cadseq::cad
