#include "tablatex/error.hpp"

namespace tablatex {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::MalformedSource: return "MalformedSource";
    case ErrorKind::UnbalancedBraces: return "UnbalancedBraces";
    case ErrorKind::UnknownStructure: return "UnknownStructure";
    case ErrorKind::NoPreamble: return "NoPreamble";
    case ErrorKind::InvalidSpan: return "InvalidSpan";
    case ErrorKind::CellCountMismatch: return "CellCountMismatch";
    case ErrorKind::TaskMismatch: return "TaskMismatch";
    case ErrorKind::EmptyCorpus: return "EmptyCorpus";
    case ErrorKind::EmptyDataset: return "EmptyDataset";
    case ErrorKind::EmptyImage: return "EmptyImage";
    case ErrorKind::DecodeError: return "DecodeError";
    case ErrorKind::UnsupportedGlyph: return "UnsupportedGlyph";
    case ErrorKind::ShapeError: return "ShapeError";
    case ErrorKind::NonFiniteLoss: return "NonFiniteLoss";
    case ErrorKind::CheckpointError: return "CheckpointError";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace tablatex
