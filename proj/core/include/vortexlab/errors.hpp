#pragma once

#include <stdexcept>
#include <string>

namespace vl {

enum class ErrorKind {
  Precondition,
  NoSolutionExpected,
  Convergence,
  PathStalled,
  Assumption,
  Config,
  Io,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) { throw Error(kind, what); }

inline void require(bool cond, const std::string& what) {
  if (!cond) fail(ErrorKind::Precondition, what);
}

}  // namespace vl
