#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "cadseq/cad/dataset.hpp"
#include "cadseq/util/rng.hpp"

namespace cadseq::data {

/// Synthetic-corpus generator: a desk-scale stand-in for a real CAD corpus.
/// Sequence-level content proportions default to the line/circle/arc and
/// extrude-type imbalance of the reference corpus. Placement bounds are
/// chosen so every generated model (and every endpoint-preserving
/// augmentation of it) rasterizes to a non-empty grid.
struct SynthConfig {
  int count = 1000;
  int max_pairs = 3;
  int max_len = cad::kSeqLen;  // cap on logical_len + 1
  double p_line = 0.7838;
  double p_circle = 0.4281;
  double p_arc = 0.1976;
  double w_one_sided = 0.906;   // per-extrude type shares
  double w_symmetric = 0.077;   // (two-sided gets the rest)
  bool allow_cuts = false;      // join-only by default
  std::uint64_t seed = 0;
};

cad::CadSequence synth_sequence(Rng& rng, const SynthConfig& cfg);
std::vector<cad::DatasetRecord> synth_dataset(const SynthConfig& cfg);

/// Ingest summary: validation, content proportions, deterministic 90/5/5
/// split by id hash.
struct DatasetSummary {
  int count = 0;
  int with_line = 0, with_circle = 0, with_arc = 0;
  int w_one_sided = 0, w_symmetric = 0, w_two_sided = 0;  // sequences containing
  std::array<std::vector<std::string>, 3> split_ids;       // train/val/test
};

enum class Split { train = 0, val = 1, test = 2 };

Split split_of(const std::string& id);

/// Validates every record (ParseError mentions the offending id) and
/// computes the summary.
DatasetSummary ingest(const std::vector<cad::DatasetRecord>& records);

}  // namespace cadseq::data
