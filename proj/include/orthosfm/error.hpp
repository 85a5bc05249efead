#pragma once

#include <stdexcept>
#include <string>

namespace orthosfm {

enum class ErrorKind {
  kInvalidInput,
  kLabelAbsent,
  kInconsistentLengths,
  kDegenerate,       // elimination / basis breakdown (collinear points, identical frames)
  kSingularSystem,   // linear system rank deficient
  kParse,
};

const char* to_string(ErrorKind kind) noexcept;

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace orthosfm
