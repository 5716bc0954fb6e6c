#include "canpr/error.hpp"

namespace canpr {

const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::InvalidInput: return "invalid input";
    case ErrorKind::DegenerateInput: return "degenerate input";
    case ErrorKind::Numerical: return "numerical failure";
    case ErrorKind::Io: return "i/o error";
    case ErrorKind::UnsupportedFormat: return "unsupported format";
  }
  return "error";
}

namespace {

std::string compose(ErrorKind kind, const std::string& message, const std::string& stage) {
  std::string out;
  if (!stage.empty()) out += "[" + stage + "] ";
  out += to_string(kind);
  out += ": ";
  out += message;
  return out;
}

}  // namespace

Error::Error(ErrorKind kind, const std::string& message, std::string stage)
    : std::runtime_error(compose(kind, message, stage)),
      kind_(kind),
      message_(message),
      stage_(std::move(stage)) {}

Error Error::in_stage(const std::string& stage) const {
  return Error(kind_, message_, stage);
}

void throw_invalid(const std::string& message) {
  throw Error(ErrorKind::InvalidInput, message);
}

void throw_degenerate(const std::string& message) {
  throw Error(ErrorKind::DegenerateInput, message);
}

void throw_numerical(const std::string& message) {
  throw Error(ErrorKind::Numerical, message);
}

}  // namespace canpr
