#include "cadseq/cad/dataset.hpp"

#include <fstream>

#include <json.hpp>

#include "cadseq/util/error.hpp"

namespace cadseq::cad {

using nlohmann::json;

TokenMatrix pad_matrix(const TokenMatrix& stored) {
  if (stored.rows > kSeqLen)
    fail(ErrorKind::parse_error, "stored matrix has " + std::to_string(stored.rows) + " rows");
  TokenMatrix m(kSeqLen);
  for (int r = 0; r < stored.rows; ++r)
    for (int c = 0; c < kNumColumns; ++c) m.at(r, c) = stored.at(r, c);
  for (int r = stored.rows; r < kSeqLen; ++r)
    m.at(r, 0) = static_cast<std::int16_t>(CommandType::eos);
  return m;
}

std::vector<DatasetRecord> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) fail(ErrorKind::io_error, "cannot open dataset file " + path);
  json doc;
  try {
    in >> doc;
  } catch (const json::exception& e) {
    fail(ErrorKind::parse_error, "invalid JSON in " + path + ": " + e.what());
  }
  if (!doc.is_array()) fail(ErrorKind::parse_error, path + ": top level must be a list");

  std::vector<DatasetRecord> records;
  records.reserve(doc.size());
  for (const auto& item : doc) {
    DatasetRecord rec;
    try {
      rec.id = item.at("id").get<std::string>();
      const auto& vec = item.at("vec");
      if (!vec.is_array()) throw json::other_error::create(501, "vec must be a list", nullptr);
      TokenMatrix stored(static_cast<int>(vec.size()));
      for (int r = 0; r < stored.rows; ++r) {
        const auto& row = vec.at(static_cast<std::size_t>(r));
        if (!row.is_array() || row.size() != kNumColumns)
          fail(ErrorKind::parse_error,
               "record " + rec.id + ": row " + std::to_string(r) + " must have " +
                   std::to_string(kNumColumns) + " entries");
        for (int c = 0; c < kNumColumns; ++c)
          stored.at(r, c) = static_cast<std::int16_t>(row.at(static_cast<std::size_t>(c)).get<int>());
      }
      rec.matrix = pad_matrix(stored);
    } catch (const json::exception& e) {
      fail(ErrorKind::parse_error, "record '" + rec.id + "': " + e.what());
    }
    records.push_back(std::move(rec));
  }
  return records;
}

namespace {

int stored_rows(const TokenMatrix& m) {
  int rows = m.rows;
  while (rows > 0) {
    const int r = rows - 1;
    bool is_pad = m.at(r, 0) == static_cast<int>(CommandType::eos);
    for (int c = 1; is_pad && c < kNumColumns; ++c) is_pad = m.at(r, c) == kUnused;
    if (!is_pad) break;
    --rows;
  }
  return rows;
}

}  // namespace

void save_dataset(const std::string& path, const std::vector<DatasetRecord>& records) {
  json doc = json::array();
  for (const auto& rec : records) {
    json rows = json::array();
    const int n = stored_rows(rec.matrix);
    for (int r = 0; r < n; ++r) {
      json row = json::array();
      for (int c = 0; c < kNumColumns; ++c) row.push_back(static_cast<int>(rec.matrix.at(r, c)));
      rows.push_back(std::move(row));
    }
    doc.push_back(json{{"id", rec.id}, {"vec", std::move(rows)}});
  }
  std::ofstream out(path);
  if (!out) fail(ErrorKind::io_error, "cannot write dataset file " + path);
  out << doc.dump() << '\n';
}

std::string to_json(const ValidityReport& report) {
  json j{{"valid", report.valid}, {"rule", nullptr}};
  if (report.rule) j["rule"] = *report.rule;
  return j.dump();
}

}  // namespace cadseq::cad
