#include "cadseq/util/error.hpp"

namespace cadseq {

const char* to_string(ErrorKind k) {
  switch (k) {
    case ErrorKind::malformed_row: return "MalformedRow";
    case ErrorKind::grammar_violation: return "GrammarViolation";
    case ErrorKind::out_of_range: return "OutOfRange";
    case ErrorKind::degenerate_range: return "DegenerateRange";
    case ErrorKind::open_loop: return "OpenLoop";
    case ErrorKind::degenerate_arc: return "DegenerateArc";
    case ErrorKind::empty_solid: return "EmptySolid";
    case ErrorKind::out_of_extent: return "OutOfExtent";
    case ErrorKind::empty_cloud: return "EmptyCloud";
    case ErrorKind::geometric_invalidity: return "GeometricInvalidity";
    case ErrorKind::shape_mismatch: return "ShapeMismatch";
    case ErrorKind::index_out_of_range: return "IndexOutOfRange";
    case ErrorKind::zero_vector: return "ZeroVector";
    case ErrorKind::non_finite: return "NonFinite";
    case ErrorKind::incompatible_checkpoint: return "IncompatibleCheckpoint";
    case ErrorKind::single_cluster: return "SingleCluster";
    case ErrorKind::degenerate_clustering: return "DuplicatePointsDegenerate";
    case ErrorKind::no_matched_commands: return "NoMatchedCommands";
    case ErrorKind::pattern_not_found: return "PatternNotFound";
    case ErrorKind::parse_error: return "ParseError";
    case ErrorKind::config_error: return "ConfigError";
    case ErrorKind::io_error: return "IoError";
  }
  return "UnknownError";
}

CadError::CadError(ErrorKind kind, const std::string& msg)
    : std::runtime_error(std::string(to_string(kind)) + ": " + msg), kind_(kind) {}

void fail(ErrorKind kind, const std::string& msg) { throw CadError(kind, msg); }

}  // namespace cadseq
