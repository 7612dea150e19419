#include <doctest.h>

#include <algorithm>
#include <set>

#include "cadseq/augment/rre.hpp"
#include "cadseq/cad/quantize.hpp"
#include "cadseq/data/synth.hpp"
#include "cadseq/geom/extrude.hpp"
#include "test_helpers.hpp"

using namespace cadseq;
using namespace cadseq::cad;
using namespace cadseq::augment;
using namespace testutil;

namespace {

std::vector<CadSequence> synth_batch(int count, std::uint64_t seed, int max_pairs = 3) {
  data::SynthConfig cfg;
  cfg.count = count;
  cfg.seed = seed;
  cfg.max_pairs = max_pairs;
  std::vector<CadSequence> out;
  for (const auto& rec : data::synth_dataset(cfg)) out.push_back(parse_sequence(rec.matrix));
  return out;
}

// canonical form of a pair for multiset comparison
TokenMatrix pair_key(const SketchExtrudePair& p) {
  std::vector<CadCommand> cmds = flatten_pairs({p});
  return emit_matrix(CadSequence::from_commands(cmds));
}

std::multiset<std::vector<std::int16_t>> pair_multiset(const CadSequence& a,
                                                       const CadSequence& b) {
  std::multiset<std::vector<std::int16_t>> ms;
  for (const auto& p : split_pairs(a)) ms.insert(pair_key(p).data);
  for (const auto& p : split_pairs(b)) ms.insert(pair_key(p).data);
  return ms;
}

}  // namespace

TEST_CASE("replace_lines: p=1 turns every line into an endpoint-preserving arc") {
  const CadSequence seq = p1_square_sequence();
  RreConfig cfg;
  cfg.p_line = 1.0;
  Rng rng(3);
  const CadSequence out = replace_lines(seq, cfg, rng);

  CHECK(out.logical_len() == seq.logical_len());
  int arcs = 0;
  for (int k = 0; k < seq.logical_len(); ++k) {
    const CadCommand& before = seq.at(k);
    const CadCommand& after = out.at(k);
    if (before.ctype == CommandType::line) {
      CHECK(after.ctype == CommandType::arc);
      CHECK(after.params[kSlotX] == before.params[kSlotX]);
      CHECK(after.params[kSlotY] == before.params[kSlotY]);
      CHECK(after.params[kSlotTheta] >= 1);
      CHECK(after.params[kSlotTheta] <= 255);
      CHECK((after.params[kSlotCcw] == 0 || after.params[kSlotCcw] == 1));
      ++arcs;
    } else {
      CHECK(after == before);
    }
  }
  CHECK(arcs == 4);
  CHECK(validate_structure(out).valid);
}

TEST_CASE("replace_lines: sequence without lines is returned bitwise unchanged") {
  const CadSequence seq = p3_ring_sequence();
  RreConfig cfg;
  cfg.p_line = 1.0;
  Rng rng(5);
  CHECK(replace_lines(seq, cfg, rng) == seq);
}

TEST_CASE("randomize_extrusions: identity at p=0, valid ranges at p=1") {
  const CadSequence seq = p1_square_sequence();
  RreConfig cfg;
  cfg.p_ext = 0.0;
  Rng rng(7);
  CHECK(randomize_extrusions(seq, cfg, rng) == seq);

  cfg.p_ext = 1.0;
  for (std::uint64_t s = 0; s < 50; ++s) {
    Rng r2(s);
    const CadSequence out = randomize_extrusions(seq, cfg, r2);
    CHECK(out.logical_len() == seq.logical_len());
    for (int kk = 0; kk < out.logical_len(); ++kk) {
      const CadCommand& c = out.at(kk);
      if (c.ctype != CommandType::extrude) {
        CHECK(c == seq.at(kk));
        continue;
      }
      const int w = c.params[kSlotType];
      CHECK(w >= 0);
      CHECK(w <= 2);
      const int d1 = c.params[kSlotDist1];
      const int d2 = c.params[kSlotDist2];
      CHECK((w == kSymmetric ? d1 > 0 : d1 + d2 > 0));
      // alpha..s and b untouched
      CHECK(c.params[kSlotAlpha] == seq.at(kk).params[kSlotAlpha]);
      CHECK(c.params[kSlotScale] == seq.at(kk).params[kSlotScale]);
      CHECK(c.params[kSlotBool] == seq.at(kk).params[kSlotBool]);
    }
    CHECK(validate_structure(out).valid);
  }
}

TEST_CASE("swap_pairs: one pair exchanged, multiset conserved") {
  // a has two pairs, b one
  std::vector<CadCommand> a_cmds = square_loop();
  a_cmds.push_back(default_extrude());
  auto ring = p3_ring_sequence();
  for (int k = 0; k < ring.logical_len(); ++k) a_cmds.push_back(ring.at(k));
  const CadSequence a = CadSequence::from_commands(a_cmds);

  std::vector<CadCommand> b_cmds = square_loop(80, 176);
  b_cmds.push_back(default_extrude(90, 0, kJoin, kOneSided));
  const CadSequence b = CadSequence::from_commands(b_cmds);

  RreConfig cfg;
  cfg.p_swap = 1.0;
  Rng rng(11);
  const auto before = pair_multiset(a, b);
  const auto [a2, b2] = swap_pairs(a, b, cfg, rng);
  CHECK(pair_multiset(a2, b2) == before);
  CHECK(split_pairs(a2).size() == 2);
  CHECK(split_pairs(b2).size() == 1);
  CHECK((a2 != a || b2 != b));  // a swap happened (pairs are all distinct)
  CHECK(validate_structure(a2).valid);
  CHECK(validate_structure(b2).valid);
}

TEST_CASE("swap_pairs: single-pair inputs exchange bodies fully") {
  const CadSequence a = p1_square_sequence();
  const CadSequence b = p3_ring_sequence();
  RreConfig cfg;
  cfg.p_swap = 1.0;
  Rng rng(13);
  const auto [a2, b2] = swap_pairs(a, b, cfg, rng);
  CHECK(a2 == b);
  CHECK(b2 == a);
}

TEST_CASE("swap_pairs: length guard abandons oversized results") {
  // a: one small pair; b: one pair of 55 commands. Swapping into a sequence
  // that already holds 10 commands would exceed 59, so nothing changes.
  std::vector<CadCommand> big;
  for (int rep = 0; rep < 9; ++rep) {
    auto loop = square_loop();
    big.insert(big.end(), loop.begin(), loop.end());
  }  // 45 commands of loops
  auto loop = square_loop();
  big.insert(big.end(), loop.begin(), loop.end());  // 50
  big.push_back(default_extrude());                 // one 51-command pair
  const CadSequence b = CadSequence::from_commands(big);

  std::vector<CadCommand> a_cmds;
  for (int rep = 0; rep < 3; ++rep) {
    auto l = square_loop();
    a_cmds.insert(a_cmds.end(), l.begin(), l.end());
    a_cmds.push_back(default_extrude());
  }  // three 6-command pairs; 18 - 6 + 51 = 63 > 59 for any swap choice
  const CadSequence a = CadSequence::from_commands(a_cmds);

  RreConfig cfg;
  cfg.p_swap = 1.0;
  Rng rng(17);
  const auto [a2, b2] = swap_pairs(a, b, cfg, rng);
  CHECK(a2 == a);
  CHECK(b2 == b);
}

TEST_CASE("augment_batch: zero probabilities are the identity") {
  const auto batch = synth_batch(16, 21);
  RreConfig cfg;
  cfg.p_line = cfg.p_ext = cfg.p_swap = 0.0;
  CHECK(augment_batch(batch, cfg) == batch);
}

TEST_CASE("augment_batch: batch of one degenerates to per-element ops only") {
  const std::vector<CadSequence> batch = {p1_square_sequence()};
  RreConfig cfg;
  cfg.p_line = 0.0;
  cfg.p_ext = 0.0;
  cfg.p_swap = 1.0;
  CHECK(augment_batch(batch, cfg) == batch);
}

TEST_CASE("augment_batch: determinism and validity on a synthetic corpus") {
  const auto batch = synth_batch(60, 33);
  RreConfig cfg;
  cfg.seed = 99;
  const auto out1 = augment_batch(batch, cfg);
  const auto out2 = augment_batch(batch, cfg);
  CHECK(out1 == out2);
  REQUIRE(out1.size() == batch.size());
  for (const CadSequence& seq : out1) CHECK(validate_structure(seq).valid);

  // endpoint preservation across the whole pipeline: the (x,y) multiset of
  // every individual sequence is preserved by replace/randomize (swap moves
  // pairs between sequences, so compare before the swap phase instead)
  Rng root(cfg.seed);
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng = root.fork(i);
    const CadSequence mid = randomize_extrusions(replace_lines(batch[i], cfg, rng), cfg, rng);
    CHECK(mid.logical_len() == batch[i].logical_len());
    for (int kk = 0; kk < mid.logical_len(); ++kk) {
      const CadCommand& before = batch[i].at(kk);
      const CadCommand& after = mid.at(kk);
      if (before.ctype == CommandType::line || before.ctype == CommandType::arc) {
        CHECK(after.params[kSlotX] == before.params[kSlotX]);
        CHECK(after.params[kSlotY] == before.params[kSlotY]);
      }
    }
  }
}

TEST_CASE("augment_batch: line-only corpus gains arc coverage") {
  data::SynthConfig scfg;
  scfg.count = 200;
  scfg.seed = 55;
  scfg.p_line = 1.0;
  scfg.p_circle = 0.0;
  scfg.p_arc = 0.0;  // input built line-only
  std::vector<CadSequence> batch;
  for (const auto& rec : data::synth_dataset(scfg)) batch.push_back(parse_sequence(rec.matrix));

  auto contains_arc = [](const CadSequence& s) {
    for (int k = 0; k < s.logical_len(); ++k)
      if (s.at(k).ctype == CommandType::arc) return true;
    return false;
  };
  int before = 0;
  for (const auto& s : batch) before += contains_arc(s);
  REQUIRE(before == 0);

  RreConfig cfg;  // default probabilities
  cfg.seed = 7;
  const auto out = augment_batch(batch, cfg);
  int after = 0;
  for (const auto& s : out) after += contains_arc(s);
  CHECK(after > before);
  for (const auto& s : out) CHECK(validate_structure(s).valid);
}

TEST_CASE("rre + realize: augmented synthetic sequences stay geometrically valid") {
  const auto batch = synth_batch(40, 71, 2);
  RreConfig cfg;
  cfg.seed = 5;
  const geom::GeomConfig gcfg;
  for (const CadSequence& seq : augment_batch(batch, cfg)) {
    const auto result = geom::try_realize(seq, gcfg);
    CHECK(result.ok());
  }
}
