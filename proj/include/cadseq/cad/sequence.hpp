#pragma once

#include <optional>
#include <string>
#include <vector>

#include "cadseq/cad/types.hpp"

namespace cadseq::cad {

/// N x 17 integer matrix: column 0 is the command-type index, columns 1..16
/// the parameter slots. Entries are in {-1, ..., 255}.
struct TokenMatrix {
  int rows = 0;
  std::vector<std::int16_t> data;  // rows * kNumColumns, row-major

  TokenMatrix() = default;
  explicit TokenMatrix(int n_rows)
      : rows(n_rows), data(static_cast<std::size_t>(n_rows) * kNumColumns, kUnused) {}

  std::int16_t& at(int r, int c) { return data[static_cast<std::size_t>(r) * kNumColumns + c]; }
  std::int16_t at(int r, int c) const { return data[static_cast<std::size_t>(r) * kNumColumns + c]; }

  bool operator==(const TokenMatrix&) const = default;
};

/// Ordered command list of length exactly kSeqLen; positions >= logical_len
/// are all EOS.
class CadSequence {
 public:
  CadSequence();  // all-EOS sequence (logical_len 0)

  /// Builds from the non-padding command prefix; validates grammar and slot
  /// patterns, pads with EOS. Throws CadError on violations.
  static CadSequence from_commands(const std::vector<CadCommand>& prefix);

  const std::vector<CadCommand>& commands() const { return cmds_; }
  const CadCommand& at(int k) const { return cmds_[static_cast<std::size_t>(k)]; }
  int logical_len() const { return logical_len_; }

  bool operator==(const CadSequence&) const = default;

 private:
  std::vector<CadCommand> cmds_;
  int logical_len_ = 0;
};

/// One or more loops (each the SOL command plus its curves) followed by a
/// single extrude command.
struct SketchExtrudePair {
  std::vector<std::vector<CadCommand>> loops;
  CadCommand extrude;

  int command_count() const;
  bool operator==(const SketchExtrudePair&) const = default;
};

struct ValidityReport {
  bool valid = true;
  std::optional<std::string> rule;  // first violated rule, when invalid
};

/// Decodes and validates a token matrix. Accepts up to kSeqLen rows (shorter
/// matrices are implicitly EOS-padded). Throws MalformedRow /
/// GrammarViolation / OutOfRange.
CadSequence parse_sequence(const TokenMatrix& matrix);

/// Inverse of parse_sequence; always emits the canonical kSeqLen x 17 form.
TokenMatrix emit_matrix(const CadSequence& seq);

/// Splits the non-EOS prefix into sketch-extrude pairs. Throws
/// GrammarViolation when a trailing loop has no extrude.
std::vector<SketchExtrudePair> split_pairs(const CadSequence& seq);

/// Reassembles a command prefix from pairs (inverse of split_pairs).
std::vector<CadCommand> flatten_pairs(const std::vector<SketchExtrudePair>& pairs);

/// Structural validity: nonzero length, grammar, a complete trailing pair,
/// non-degenerate extrusions and non-degenerate loops. Report-returning,
/// never throws.
ValidityReport validate_structure(const CadSequence& seq);

/// Grammar scan shared by parse_sequence and validate_structure: returns the
/// first violation description or nullopt. `require_trailing_extrude` adds the
/// complete-pair rule used by validation.
std::optional<std::string> grammar_error(const std::vector<CadCommand>& prefix,
                                         bool require_trailing_extrude);

}  // namespace cadseq::cad
