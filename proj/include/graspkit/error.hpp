#pragma once

#include <stdexcept>
#include <string>

namespace graspkit {

// Coarse failure classes. The C API and the CLI exit codes are derived from
// these, so keep the set small.
enum class ErrorKind {
  kInvalidArgument,  // caller broke a precondition
  kParse,            // malformed or inconsistent input document
  kNoGrasp,          // empty candidate list
  kEmptyScene,       // nothing detected
  kExecution,        // no valid depth inside a grasp rectangle
  kNumerical,        // overflow, rank deficiency, degenerate surface
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace graspkit
