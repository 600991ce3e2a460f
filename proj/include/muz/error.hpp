#pragma once

#include <stdexcept>
#include <string>

namespace muz {

enum class ErrorKind {
  Syntax,
  UnboundVariable,
  Definition,
  Kind,
  Type,
  Domain,
  NegativeScore,
  BottomEscape,
  Causality,
  Schedule,
  Config,
  Degenerate,
  NonFinite,
  NonConstantPrior,
  InconsistentEnv,
  BudgetExceeded,
  EmptySupport,
  Io,
};

const char* kind_name(ErrorKind k);

struct SrcLoc {
  int line = 0;
  int col = 0;
};

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& msg, SrcLoc loc = {});

  ErrorKind kind() const { return kind_; }
  SrcLoc loc() const { return loc_; }
  const std::string& detail() const { return detail_; }

 private:
  ErrorKind kind_;
  SrcLoc loc_;
  std::string detail_;
};

[[noreturn]] void fail(ErrorKind kind, const std::string& msg, SrcLoc loc = {});

}  // namespace muz
