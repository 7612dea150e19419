#pragma once

#include <cstdint>
#include <utility>
#include <vector>

#include "cadseq/cad/sequence.hpp"
#include "cadseq/util/rng.hpp"

namespace cadseq::augment {

struct RreConfig {
  double p_line = 0.2;   // per-line replacement probability
  double p_ext = 0.3;    // per-extrude randomization probability
  double p_swap = 0.5;   // per-sequence pair-swap probability
  std::uint64_t seed = 0;
};

/// Replaces each line, independently with probability p_line, by an arc with
/// the same endpoint, sweep angle uniform in bins [1,255] and a random
/// direction flag. Loop closure is untouched because endpoints are.
cad::CadSequence replace_lines(const cad::CadSequence& seq, const RreConfig& cfg, Rng& rng);

/// Re-draws (w, d1, d2) of each extrude with probability p_ext; degenerate
/// draws (d1=0 for symmetric, d1+d2=0 otherwise) are re-rolled so the output
/// stays structurally valid.
cad::CadSequence randomize_extrusions(const cad::CadSequence& seq, const RreConfig& cfg, Rng& rng);

/// With probability p_swap exchanges one uniformly chosen sketch-extrude
/// pair of a with one of b. Abandoned (inputs returned) when either result
/// would exceed the maximum logical length.
std::pair<cad::CadSequence, cad::CadSequence> swap_pairs(const cad::CadSequence& a,
                                                         const cad::CadSequence& b,
                                                         const RreConfig& cfg, Rng& rng);

/// replace_lines + randomize_extrusions per element (independent per-element
/// streams derived from cfg.seed), then a sequential swap pass with partners
/// drawn uniformly from the batch.
std::vector<cad::CadSequence> augment_batch(const std::vector<cad::CadSequence>& batch,
                                            const RreConfig& cfg);

}  // namespace cadseq::augment
