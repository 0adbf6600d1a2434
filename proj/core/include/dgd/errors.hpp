#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace dgd {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Invalid configuration value or combination of values.
class ConfigError : public Error {
 public:
  using Error::Error;
};

class ShapeError : public Error {
 public:
  using Error::Error;
};

/// Misuse of the differentiation graph (non-scalar loss, gradient of a frozen value, ...).
class GraphError : public Error {
 public:
  using Error::Error;
};

/// A NaN or Inf appeared where only finite values are allowed.
class NumericError : public Error {
 public:
  using Error::Error;
};

class PreconditionError : public Error {
 public:
  using Error::Error;
};

class DataError : public Error {
 public:
  using Error::Error;
};

/// Malformed or truncated file. Carries the byte offset where decoding failed.
class FormatError : public Error {
 public:
  FormatError(const std::string& what, std::uint64_t offset)
      : Error(what + " (at byte offset " + std::to_string(offset) + ")"), offset_(offset) {}

  std::uint64_t offset() const noexcept { return offset_; }

 private:
  std::uint64_t offset_;
};

class IoError : public Error {
 public:
  using Error::Error;
};

/// Training produced a non-finite loss or parameter.
class TrainingError : public Error {
 public:
  TrainingError(const std::string& stage, std::size_t round, const std::string& detail)
      : Error(stage + " diverged at round " + std::to_string(round) + ": " + detail),
        stage_(stage),
        round_(round) {}

  const std::string& stage() const noexcept { return stage_; }
  std::size_t round() const noexcept { return round_; }

 private:
  std::string stage_;
  std::size_t round_;
};

/// A pipeline stage failed; names the stage and the artifacts involved.
class StageError : public Error {
 public:
  StageError(const std::string& stage, const std::string& detail)
      : Error("stage '" + stage + "' failed: " + detail), stage_(stage) {}

  const std::string& stage() const noexcept { return stage_; }

 private:
  std::string stage_;
};

class ReportError : public Error {
 public:
  using Error::Error;
};

}  // namespace dgd
