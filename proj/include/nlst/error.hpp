#pragma once

#include <stdexcept>
#include <string>

namespace nlst {

enum class ErrorKind {
  Structural,   // malformed table or scenario
  Shape,        // operation does not apply to this scenario
  Domain,       // argument outside its valid range
  Degenerate,   // conditioning on a zero-probability event
  Size,         // enumeration or table cap exceeded
  Regime,       // construction valid only in a parameter regime
  Solver,       // numerical failure inside an optimizer
  Infeasible,   // optimization problem has no feasible point
  NotQuantum,   // observed behaviour has no quantum realisation at this level
  Verification  // a certificate failed its check
};

const char* to_string(ErrorKind k);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& what) {
  throw Error(kind, what);
}

}  // namespace nlst
