#include "cadseq/augment/rre.hpp"

#include "cadseq/cad/types.hpp"

namespace cadseq::augment {

using namespace cadseq::cad;

CadSequence replace_lines(const CadSequence& seq, const RreConfig& cfg, Rng& rng) {
  std::vector<CadCommand> prefix(seq.commands().begin(),
                                 seq.commands().begin() + seq.logical_len());
  for (CadCommand& cmd : prefix) {
    if (cmd.ctype != CommandType::line) continue;
    if (!rng.bernoulli(cfg.p_line)) continue;
    cmd = CadCommand::arc(cmd.params[kSlotX], cmd.params[kSlotY],
                          rng.uniform_int(1, 255), rng.uniform_int(0, 1));
  }
  return CadSequence::from_commands(prefix);
}

CadSequence randomize_extrusions(const CadSequence& seq, const RreConfig& cfg, Rng& rng) {
  std::vector<CadCommand> prefix(seq.commands().begin(),
                                 seq.commands().begin() + seq.logical_len());
  for (CadCommand& cmd : prefix) {
    if (cmd.ctype != CommandType::extrude) continue;
    if (!rng.bernoulli(cfg.p_ext)) continue;
    const int w = rng.uniform_int(0, 2);
    int d1 = 0, d2 = 0;
    for (;;) {
      d1 = rng.uniform_int(0, 255);
      d2 = rng.uniform_int(0, 255);
      const bool degenerate = (w == kSymmetric) ? d1 == 0 : d1 + d2 == 0;
      if (!degenerate) break;
    }
    cmd.params[kSlotType] = static_cast<std::int16_t>(w);
    cmd.params[kSlotDist1] = static_cast<std::int16_t>(d1);
    cmd.params[kSlotDist2] = static_cast<std::int16_t>(d2);
  }
  return CadSequence::from_commands(prefix);
}

std::pair<CadSequence, CadSequence> swap_pairs(const CadSequence& a, const CadSequence& b,
                                               const RreConfig& cfg, Rng& rng) {
  if (!rng.bernoulli(cfg.p_swap)) return {a, b};

  std::vector<SketchExtrudePair> pa = split_pairs(a);
  std::vector<SketchExtrudePair> pb = split_pairs(b);
  if (pa.empty() || pb.empty()) return {a, b};

  const int i = rng.uniform_int(0, static_cast<int>(pa.size()) - 1);
  const int j = rng.uniform_int(0, static_cast<int>(pb.size()) - 1);

  const int len_a = a.logical_len() - pa[i].command_count() + pb[j].command_count();
  const int len_b = b.logical_len() - pb[j].command_count() + pa[i].command_count();
  if (len_a > kMaxLogicalLen || len_b > kMaxLogicalLen) return {a, b};

  std::swap(pa[static_cast<std::size_t>(i)], pb[static_cast<std::size_t>(j)]);
  return {CadSequence::from_commands(flatten_pairs(pa)),
          CadSequence::from_commands(flatten_pairs(pb))};
}

std::vector<CadSequence> augment_batch(const std::vector<CadSequence>& batch,
                                       const RreConfig& cfg) {
  Rng root(cfg.seed);
  std::vector<CadSequence> out;
  out.reserve(batch.size());
  for (std::size_t i = 0; i < batch.size(); ++i) {
    Rng rng = root.fork(i);
    out.push_back(randomize_extrusions(replace_lines(batch[i], cfg, rng), cfg, rng));
  }
  if (batch.size() > 1) {
    Rng swap_rng = root.fork(0x5eedULL + batch.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      std::size_t j = static_cast<std::size_t>(
          swap_rng.uniform_int(0, static_cast<int>(out.size()) - 2));
      if (j >= i) ++j;  // uniform over partners distinct from i
      auto [si, sj] = swap_pairs(out[i], out[j], cfg, swap_rng);
      out[i] = std::move(si);
      out[j] = std::move(sj);
    }
  }
  return out;
}

}  // namespace cadseq::augment
