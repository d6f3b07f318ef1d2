#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace logcascade {

enum class ErrorKind {
  PrecisionExhausted,
  SingularityHit,
  OverflowGuard,
  PreconditionViolation,
  LevelNotInH,
  DegenerateInput,
  UnsupportedShape,
  SubsequenceOutOfRange,
  LevelOrderViolation,
  ConfigInvalid,
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// An orbit point came within the guard radius of the singularity.
class SingularityHit : public Error {
 public:
  explicit SingularityHit(std::int64_t index)
      : Error(ErrorKind::SingularityHit,
              "orbit point " + std::to_string(index) +
                  " is within the guard radius of the singularity"),
        index_(index) {}

  std::int64_t index() const noexcept { return index_; }

 private:
  std::int64_t index_;
};

// Config validation failure; `field` is a JSON-pointer-like path.
class ConfigError : public Error {
 public:
  ConfigError(std::string field, const std::string& what)
      : Error(ErrorKind::ConfigInvalid, field + ": " + what),
        field_(std::move(field)),
        message_(what) {}

  const std::string& field() const noexcept { return field_; }
  const std::string& message() const noexcept { return message_; }

 private:
  std::string field_;
  std::string message_;
};

}  // namespace logcascade
