#pragma once

#include <string>
#include <vector>

#include "rli/ast.hpp"

namespace rli {

/// Static diagnostic with a stable code. Codes are part of the tool's
/// contract and never renumbered:
///   E001 syntax error
///   E002 unsafe rule: conclusion variable not bound by a positive hypothesis
///   E003 fact rule with non-constant argument
///   E004 inconsistent predicate arity within a rule set
///   E005 predicate derived in more than one rule set (global scope / per class)
///   E006 self.field predicate in a global rule set
///   E007 unknown name (class, rule set, or predicate)
///   E008 reserved name ('set', 'sequence', '$'-prefixed identifiers)
///   E009 construct in an illegal position (set display / aggregate / defun call)
///   E010 fact file error (syntax or mixed arity)
///   E011 unsupported pattern shape
///   E012 unsafe negation: variable not bound by an earlier positive hypothesis
///   E013 assignment to a derived predicate variable
///   E014 infer: bad query/keyword (unknown rule set, non-local predicate,
///        target/query mismatch)
///   E015 duplicate or cyclic declaration (class, method, rule set, local)
struct Diagnostic {
  std::string code;
  std::string message;
  SrcLoc loc;

  std::string format() const {
    std::string out = code + ": " + message;
    if (loc.valid())
      out += " (line " + std::to_string(loc.line) + ", col " +
             std::to_string(loc.col) + ")";
    return out;
  }
};

using Diagnostics = std::vector<Diagnostic>;

inline void addDiag(Diagnostics& diags, std::string code, std::string msg,
                    SrcLoc loc = {}) {
  diags.push_back({std::move(code), std::move(msg), loc});
}

}  // namespace rli
