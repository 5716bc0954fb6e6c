#pragma once

#include <stdexcept>
#include <string>

namespace canpr {

enum class ErrorKind {
  InvalidInput,     // caller violated a precondition
  DegenerateInput,  // input is valid but carries nothing to work with
  Numerical,        // an iterative method failed to converge
  Io,               // file could not be read or written
  UnsupportedFormat,
};

const char* to_string(ErrorKind kind);

/// Library-wide exception. `stage` is empty until the pipeline tags it.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message, std::string stage = {});

  ErrorKind kind() const noexcept { return kind_; }
  const std::string& stage() const noexcept { return stage_; }
  const std::string& message() const noexcept { return message_; }

  /// Same error, attributed to a pipeline stage.
  Error in_stage(const std::string& stage) const;

 private:
  ErrorKind kind_;
  std::string message_;
  std::string stage_;
};

[[noreturn]] void throw_invalid(const std::string& message);
[[noreturn]] void throw_degenerate(const std::string& message);
[[noreturn]] void throw_numerical(const std::string& message);

}  // namespace canpr
