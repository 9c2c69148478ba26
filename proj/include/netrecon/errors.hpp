#ifndef NETRECON_ERRORS_HPP
#define NETRECON_ERRORS_HPP

#include <stdexcept>
#include <string>

namespace netrecon {

enum class ErrorCode {
  IndexOutOfRange,
  SelfLoop,
  MaskViolation,
  NonPositiveParameter,
  SimplexViolation,
  NonFiniteElbo,
  UnsupportedK,
  InvalidProbability,
  TargetUnreachable,
  ShapeMismatch,
  LengthMismatch,
  EmptySample,
  MalformedHeader,
  NegativeWeight,
  IoError,
  InvalidConfig,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

[[noreturn]] inline void fail(ErrorCode code, const std::string& what) {
  throw Error(code, what);
}

}  // namespace netrecon

#endif
