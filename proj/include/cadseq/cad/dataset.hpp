#pragma once

#include <string>
#include <vector>

#include "cadseq/cad/sequence.hpp"

namespace cadseq::cad {

struct DatasetRecord {
  std::string id;
  TokenMatrix matrix;  // as stored; rows <= kSeqLen

  bool operator==(const DatasetRecord&) const = default;
};

/// Dataset file: JSON list of {"id": string, "vec": [[int;17]; <=60]}.
/// Rows beyond the stored length are implicitly EOS-padded on load (the
/// matrices returned here always have kSeqLen rows).
std::vector<DatasetRecord> load_dataset(const std::string& path);

/// Writes records with padding rows stripped (everything from the first
/// all-EOS tail onward).
void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records);

std::string to_json(const ValidityReport& report);

/// Pads or re-checks a raw stored matrix into the canonical kSeqLen-row form.
TokenMatrix pad_matrix(const TokenMatrix& stored);

}  // namespace cadseq::cad
