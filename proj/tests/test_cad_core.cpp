#include <doctest.h>

#include <cstdio>
#include <filesystem>

#include "cadseq/cad/dataset.hpp"
#include "cadseq/cad/quantize.hpp"
#include "cadseq/cad/sequence.hpp"
#include "cadseq/util/error.hpp"
#include "cadseq/util/rng.hpp"
#include "test_helpers.hpp"

using namespace cadseq;
using namespace cadseq::cad;
using namespace testutil;

namespace {

template <class Fn>
bool throws_kind(ErrorKind kind, Fn&& fn) {
  try {
    fn();
  } catch (const CadError& e) {
    return e.kind() == kind;
  }
  return false;
}

}  // namespace

TEST_CASE("parse: minimal P1 square sequence") {
  const CadSequence seq = p1_square_sequence();
  const TokenMatrix m = emit_matrix(seq);
  REQUIRE(m.rows == kSeqLen);

  const CadSequence parsed = parse_sequence(m);
  CHECK(parsed.logical_len() == 6);
  CHECK(parsed == seq);
  CHECK(split_pairs(parsed).size() == 1);
}

TEST_CASE("parse: extrude with no sketch is a grammar violation") {
  TokenMatrix m(kSeqLen);
  for (int r = 0; r < kSeqLen; ++r) m.at(r, 0) = static_cast<int>(CommandType::eos);
  const CadCommand e = default_extrude();
  m.at(0, 0) = static_cast<int>(CommandType::extrude);
  for (int s = 0; s < kNumParamSlots; ++s) m.at(0, 1 + s) = e.params[s];
  CHECK(throws_kind(ErrorKind::grammar_violation, [&] { parse_sequence(m); }));
}

TEST_CASE("parse: line row with a theta value is malformed") {
  const CadSequence seq = p1_square_sequence();
  TokenMatrix m = emit_matrix(seq);
  m.at(1, 1 + kSlotTheta) = 40;  // row 1 is a Line; theta must stay -1
  CHECK(throws_kind(ErrorKind::malformed_row, [&] { parse_sequence(m); }));
}

TEST_CASE("parse: entry outside {-1..255} is out of range") {
  TokenMatrix m = emit_matrix(p1_square_sequence());
  m.at(1, 1 + kSlotX) = 300;
  CHECK(throws_kind(ErrorKind::out_of_range, [&] { parse_sequence(m); }));
  m.at(1, 1 + kSlotX) = -2;
  CHECK(throws_kind(ErrorKind::out_of_range, [&] { parse_sequence(m); }));
}

TEST_CASE("parse: missing EOS in a full-length matrix") {
  std::vector<CadCommand> cmds;
  // 59 commands of valid grammar plus one more line to fill row 59
  for (int rep = 0; rep < 9; ++rep) {
    auto loop = square_loop();
    cmds.insert(cmds.end(), loop.begin(), loop.end());
    cmds.push_back(default_extrude());
  }  // 54 commands
  auto loop = square_loop();
  cmds.insert(cmds.end(), loop.begin(), loop.end());
  cmds.push_back(default_extrude());  // 60 commands, no EOS
  REQUIRE(cmds.size() == 60);

  TokenMatrix m(kSeqLen);
  for (int r = 0; r < kSeqLen; ++r) {
    m.at(r, 0) = static_cast<int>(cmds[r].ctype);
    for (int s = 0; s < kNumParamSlots; ++s) m.at(r, 1 + s) = cmds[r].params[s];
  }
  CHECK(throws_kind(ErrorKind::grammar_violation, [&] { parse_sequence(m); }));
}

TEST_CASE("parse: non-EOS after EOS violates the padding rule") {
  TokenMatrix m = emit_matrix(p1_square_sequence());
  const CadCommand sol = CadCommand::sol();
  m.at(30, 0) = static_cast<int>(sol.ctype);
  CHECK(throws_kind(ErrorKind::grammar_violation, [&] { parse_sequence(m); }));
}

TEST_CASE("emit: empty sequence is 60 EOS rows and structurally invalid") {
  const CadSequence seq;
  const TokenMatrix m = emit_matrix(seq);
  for (int r = 0; r < kSeqLen; ++r) {
    CHECK(m.at(r, 0) == static_cast<int>(CommandType::eos));
    for (int c = 1; c < kNumColumns; ++c) CHECK(m.at(r, c) == kUnused);
  }
  const ValidityReport rep = validate_structure(seq);
  CHECK(!rep.valid);
  CHECK(*rep.rule == "empty_sequence");
}

TEST_CASE("emit/parse: short matrices EOS-pad on load") {
  TokenMatrix full = emit_matrix(p1_square_sequence());
  TokenMatrix stored(6);
  for (int r = 0; r < 6; ++r)
    for (int c = 0; c < kNumColumns; ++c) stored.at(r, c) = full.at(r, c);
  CHECK(pad_matrix(stored) == full);
  CHECK(parse_sequence(stored) == p1_square_sequence());
}

TEST_CASE("split_pairs: Fig-2-shaped sequence gives two pairs") {
  // SOL, Arc, Line, Line, Line, E, SOL, Circle, SOL, Circle, E
  std::vector<CadCommand> cmds = {
      CadCommand::sol(),
      CadCommand::arc(192, 64, 128, 1),
      CadCommand::line(192, 192),
      CadCommand::line(64, 192),
      CadCommand::line(64, 64),
      default_extrude(),
      CadCommand::sol(),
      CadCommand::circle(127, 127, 220),
      CadCommand::sol(),
      CadCommand::circle(127, 127, 170),
      default_extrude(),
  };
  const CadSequence seq = CadSequence::from_commands(cmds);
  const auto pairs = split_pairs(seq);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].loops.size() == 1);
  CHECK(pairs[0].loops[0].size() == 5);  // SOL + 4 curves
  CHECK(pairs[1].loops.size() == 2);
  CHECK(pairs[1].loops[0].size() == 2);  // SOL + circle
  CHECK(pairs[1].loops[1].size() == 2);

  CHECK(flatten_pairs(pairs) ==
        std::vector<CadCommand>(cmds.begin(), cmds.end()));
}

TEST_CASE("split_pairs: concatenated blocks and trailing-loop error") {
  std::vector<CadCommand> one = square_loop();
  one.push_back(default_extrude());
  std::vector<CadCommand> two = one;
  two.insert(two.end(), one.begin(), one.end());
  CHECK(split_pairs(CadSequence::from_commands(one)).size() == 1);
  CHECK(split_pairs(CadSequence::from_commands(two)).size() == 2);

  std::vector<CadCommand> trailing = one;
  auto loop = square_loop();
  trailing.insert(trailing.end(), loop.begin(), loop.end());  // loop, no extrude
  const CadSequence seq = CadSequence::from_commands(trailing);
  CHECK(throws_kind(ErrorKind::grammar_violation, [&] { split_pairs(seq); }));
  const ValidityReport rep = validate_structure(seq);
  CHECK(!rep.valid);
}

TEST_CASE("quantize: endpoints, midpoint tie, degenerate range") {
  CHECK(quantize(-1.0, -1.0, 1.0) == 0);
  CHECK(quantize(1.0, -1.0, 1.0) == 255);
  CHECK(quantize(-2.5, -1.0, 1.0) == 0);   // clamps
  CHECK(quantize(7.0, -1.0, 1.0) == 255);  // clamps
  CHECK(quantize(0.0, -1.0, 1.0) == 127);  // midpoint tie -> lower bin
  CHECK(throws_kind(ErrorKind::degenerate_range, [] { quantize(0.0, 1.0, 1.0); }));
  CHECK(throws_kind(ErrorKind::degenerate_range, [] { dequantize(3, 2.0, -2.0); }));
}

TEST_CASE("quantize: round-trip error bounded by half a bin") {
  Rng rng(99);
  const double lo = -1.0, hi = 1.0;
  const double bound = (hi - lo) / 512.0 + 1e-12;
  for (int i = 0; i < 20000; ++i) {
    const double v = rng.uniform(lo, hi);
    const double rt = dequantize(quantize(v, lo, hi), lo, hi);
    CHECK(std::abs(rt - v) <= bound);
  }
}

TEST_CASE("slot patterns: exhaustive per-type mask enforcement") {
  const std::vector<CadCommand> canonical = {
      CadCommand::sol(),
      CadCommand::line(10, 20),
      CadCommand::arc(10, 20, 30, 1),
      CadCommand::circle(10, 20, 200),
      default_extrude(),
      CadCommand::eos(),
  };
  const auto& masks = used_slots();
  for (const CadCommand& cmd : canonical) {
    CHECK(slot_pattern_error(cmd).empty());
    const SlotMask& mask = masks[static_cast<int>(cmd.ctype)];
    for (int s = 0; s < kNumParamSlots; ++s) {
      CadCommand broken = cmd;
      if (mask[s]) {
        broken.params[s] = kUnused;  // clearing a used slot breaks the pattern
        CHECK(!slot_pattern_error(broken).empty());
      } else {
        broken.params[s] = 0;  // filling an unused slot breaks the pattern
        CHECK(!slot_pattern_error(broken).empty());
      }
    }
  }
  // categorical ranges
  CadCommand arc = CadCommand::arc(10, 20, 30, 2);
  CHECK(!slot_pattern_error(arc).empty());  // c beyond {0,1}
  CadCommand ext = default_extrude(127, 0, 3, 0);
  CHECK(!slot_pattern_error(ext).empty());  // b beyond {0,1,2}
  CadCommand ext2 = default_extrude(127, 0, 0, 3);
  CHECK(!slot_pattern_error(ext2).empty());  // w beyond {0,1,2}
}

TEST_CASE("validate_structure: extrusion degeneracy rules") {
  {
    std::vector<CadCommand> cmds = square_loop();
    cmds.push_back(default_extrude(/*d1=*/100, /*d2=*/0, kJoin, kOneSided));
    CHECK(validate_structure(CadSequence::from_commands(cmds)).valid);
  }
  {
    std::vector<CadCommand> cmds = square_loop();
    cmds.push_back(default_extrude(/*d1=*/0, /*d2=*/0, kJoin, kOneSided));
    const auto rep = validate_structure(CadSequence::from_commands(cmds));
    CHECK(!rep.valid);
    CHECK(*rep.rule == "degenerate_extrusion");
  }
  {
    // symmetric requires d1 > 0 even when d2 > 0
    std::vector<CadCommand> cmds = square_loop();
    cmds.push_back(default_extrude(/*d1=*/0, /*d2=*/50, kJoin, kSymmetric));
    CHECK(!validate_structure(CadSequence::from_commands(cmds)).valid);
  }
  {
    // two-sided passes on d2 alone
    std::vector<CadCommand> cmds = square_loop();
    cmds.push_back(default_extrude(/*d1=*/0, /*d2=*/50, kJoin, kTwoSided));
    CHECK(validate_structure(CadSequence::from_commands(cmds)).valid);
  }
}

TEST_CASE("validate_structure: degenerate loop geometry fails as open_loop") {
  // collapse a triangle by moving one vertex onto the line through the others
  std::vector<CadCommand> cmds = {
      CadCommand::sol(),
      CadCommand::line(100, 100),
      CadCommand::line(150, 100),
      CadCommand::line(200, 100),  // collinear with the first two
      default_extrude(),
  };
  const auto rep = validate_structure(CadSequence::from_commands(cmds));
  CHECK(!rep.valid);
  CHECK(*rep.rule == "open_loop");

  // the intact triangle passes
  std::vector<CadCommand> ok = {
      CadCommand::sol(),
      CadCommand::line(100, 100),
      CadCommand::line(150, 100),
      CadCommand::line(150, 180),
      default_extrude(),
  };
  CHECK(validate_structure(CadSequence::from_commands(ok)).valid);

  // coincident consecutive endpoints also fail
  std::vector<CadCommand> dup = {
      CadCommand::sol(),
      CadCommand::line(100, 100),
      CadCommand::line(100, 100),
      CadCommand::line(150, 180),
      default_extrude(),
  };
  CHECK(!validate_structure(CadSequence::from_commands(dup)).valid);
}

TEST_CASE("validate_structure: degenerate circle radius") {
  std::vector<CadCommand> cmds = {
      CadCommand::sol(),
      CadCommand::circle(127, 127, 100),  // dequantizes negative
      default_extrude(),
  };
  const auto rep = validate_structure(CadSequence::from_commands(cmds));
  CHECK(!rep.valid);
  CHECK(*rep.rule == "degenerate_circle");
  CHECK(validate_structure(p3_ring_sequence()).valid);
}

TEST_CASE("validity report serializes to the published JSON shape") {
  CHECK(to_json(ValidityReport{true, std::nullopt}) == R"({"rule":null,"valid":true})");
  CHECK(to_json(ValidityReport{false, "open_loop"}) == R"({"rule":"open_loop","valid":false})");
}

TEST_CASE("dataset: save/load round trip") {
  namespace fs = std::filesystem;
  const fs::path dir = fs::temp_directory_path() / "cadseq_test_ds";
  fs::create_directories(dir);
  const std::string path = (dir / "mini.json").string();

  std::vector<DatasetRecord> records;
  records.push_back({"a", emit_matrix(p1_square_sequence())});
  records.push_back({"b", emit_matrix(p3_ring_sequence())});
  save_dataset(path, records);

  const auto loaded = load_dataset(path);
  REQUIRE(loaded.size() == 2);
  CHECK(loaded[0].id == "a");
  CHECK(loaded[0].matrix == records[0].matrix);
  CHECK(loaded[1].matrix == records[1].matrix);
  fs::remove_all(dir);
}
