#pragma once

#include <stdexcept>
#include <string>

namespace qhall {

/// Base of every exception thrown by the library.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  /// Stable machine-readable name, e.g. "InvalidField".
  [[nodiscard]] virtual const char* kind() const noexcept { return "Error"; }
};

#define QHALL_DEFINE_ERROR(Name)                                              \
  class Name : public Error {                                                 \
   public:                                                                    \
    using Error::Error;                                                       \
    [[nodiscard]] const char* kind() const noexcept override { return #Name; } \
  }

QHALL_DEFINE_ERROR(InvalidField);
QHALL_DEFINE_ERROR(NonConvergence);
QHALL_DEFINE_ERROR(IndexOutOfRange);
QHALL_DEFINE_ERROR(SingularTensor);
QHALL_DEFINE_ERROR(InvalidArgument);
QHALL_DEFINE_ERROR(ValidationError);
QHALL_DEFINE_ERROR(IoError);

#undef QHALL_DEFINE_ERROR

/// Reported with the 1-based line of the offending input.
class ParseError : public Error {
 public:
  ParseError(int line, const std::string& what)
      : Error("line " + std::to_string(line) + ": " + what), line_(line) {}
  [[nodiscard]] const char* kind() const noexcept override { return "ParseError"; }
  [[nodiscard]] int line() const noexcept { return line_; }

 private:
  int line_;
};

}  // namespace qhall
