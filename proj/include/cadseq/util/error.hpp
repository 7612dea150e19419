#pragma once

#include <stdexcept>
#include <string>

namespace cadseq {

enum class ErrorKind {
  malformed_row,
  grammar_violation,
  out_of_range,
  degenerate_range,
  open_loop,
  degenerate_arc,
  empty_solid,
  out_of_extent,
  empty_cloud,
  geometric_invalidity,
  shape_mismatch,
  index_out_of_range,
  zero_vector,
  non_finite,
  incompatible_checkpoint,
  single_cluster,
  degenerate_clustering,
  no_matched_commands,
  pattern_not_found,
  parse_error,
  config_error,
  io_error,
};

const char* to_string(ErrorKind k);

/// Exception carrying a typed error kind; most library errors are thrown as this.
class CadError : public std::runtime_error {
 public:
  CadError(ErrorKind kind, const std::string& msg);
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg);

}  // namespace cadseq
