#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace tablatex {

enum class ErrorKind {
  MalformedSource,
  UnbalancedBraces,
  UnknownStructure,
  NoPreamble,
  InvalidSpan,
  CellCountMismatch,
  TaskMismatch,
  EmptyCorpus,
  EmptyDataset,
  EmptyImage,
  DecodeError,
  UnsupportedGlyph,
  ShapeError,
  NonFiniteLoss,
  CheckpointError,
  ConfigError,
};

const char* to_string(ErrorKind kind);

// All library failures derive from this; `kind()` lets callers branch
// without string matching.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class CellCountMismatch : public Error {
 public:
  CellCountMismatch(std::size_t expected, std::size_t found)
      : Error(ErrorKind::CellCountMismatch,
              "structure has " + std::to_string(expected) + " CELL placeholders, content has " +
                  std::to_string(found) + " cells"),
        expected_(expected),
        found_(found) {}
  std::size_t expected() const noexcept { return expected_; }
  std::size_t found() const noexcept { return found_; }

 private:
  std::size_t expected_;
  std::size_t found_;
};

}  // namespace tablatex
