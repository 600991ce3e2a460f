#include "muz/error.hpp"

namespace muz {

const char* kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Syntax: return "SyntaxError";
    case ErrorKind::UnboundVariable: return "UnboundVariable";
    case ErrorKind::Definition: return "DefinitionError";
    case ErrorKind::Kind: return "KindError";
    case ErrorKind::Type: return "TypeError";
    case ErrorKind::Domain: return "DomainError";
    case ErrorKind::NegativeScore: return "NegativeScore";
    case ErrorKind::BottomEscape: return "BottomEscape";
    case ErrorKind::Causality: return "CausalityError";
    case ErrorKind::Schedule: return "ScheduleError";
    case ErrorKind::Config: return "ConfigError";
    case ErrorKind::Degenerate: return "Degenerate";
    case ErrorKind::NonFinite: return "NonFinite";
    case ErrorKind::NonConstantPrior: return "NonConstantPrior";
    case ErrorKind::InconsistentEnv: return "InconsistentEnv";
    case ErrorKind::BudgetExceeded: return "BudgetExceeded";
    case ErrorKind::EmptySupport: return "EmptySupport";
    case ErrorKind::Io: return "IoError";
  }
  return "Error";
}

static std::string render(ErrorKind kind, const std::string& msg, SrcLoc loc) {
  std::string s = kind_name(kind);
  if (loc.line > 0) s += " at " + std::to_string(loc.line) + ":" + std::to_string(loc.col);
  s += ": " + msg;
  return s;
}

Error::Error(ErrorKind kind, const std::string& msg, SrcLoc loc)
    : std::runtime_error(render(kind, msg, loc)), kind_(kind), loc_(loc), detail_(msg) {}

void fail(ErrorKind kind, const std::string& msg, SrcLoc loc) { throw Error(kind, msg, loc); }

}  // namespace muz
