#pragma once

#include <stdexcept>
#include <string>

namespace polyrecon {

enum class ErrorKind {
  DegenerateInput,
  SingularEvaluation,
  ParseError,
  EmptyCloud,
  IoError,
  NoPlanesFound,
  DegenerateConfiguration,
  UnboundedSpace,
  EmptySelection,
  NonConvergence,
  ConfigError,
};

inline const char* to_string(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::DegenerateInput: return "DegenerateInput";
    case ErrorKind::SingularEvaluation: return "SingularEvaluation";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::EmptyCloud: return "EmptyCloud";
    case ErrorKind::IoError: return "IoError";
    case ErrorKind::NoPlanesFound: return "NoPlanesFound";
    case ErrorKind::DegenerateConfiguration: return "DegenerateConfiguration";
    case ErrorKind::UnboundedSpace: return "UnboundedSpace";
    case ErrorKind::EmptySelection: return "EmptySelection";
    case ErrorKind::NonConvergence: return "NonConvergence";
    case ErrorKind::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

/// Process exit code for an error class: 2 input, 3 config, 4 reconstruction
/// failure, 1 anything else.
inline int exit_code(ErrorKind kind) {
  switch (kind) {
    case ErrorKind::ParseError:
    case ErrorKind::EmptyCloud:
    case ErrorKind::IoError:
      return 2;
    case ErrorKind::ConfigError:
      return 3;
    case ErrorKind::NoPlanesFound:
    case ErrorKind::DegenerateConfiguration:
    case ErrorKind::UnboundedSpace:
    case ErrorKind::EmptySelection:
    case ErrorKind::NonConvergence:
      return 4;
    case ErrorKind::DegenerateInput:
    case ErrorKind::SingularEvaluation:
      return 1;
  }
  return 1;
}

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what),
        kind_(kind),
        detail_(what) {}

  ErrorKind kind() const noexcept { return kind_; }
  // Message without the kind prefix.
  const std::string& detail() const noexcept { return detail_; }

 private:
  ErrorKind kind_;
  std::string detail_;
};

}  // namespace polyrecon
