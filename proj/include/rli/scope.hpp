#pragma once

#include "rli/ast.hpp"
#include "rli/diag.hpp"

namespace rli {

/// Rewrites all bare names into their resolved forms: method parameters
/// (and `self`) become Param nodes, substituted at call time; every other
/// name — including iteration and pattern variables — becomes a Global
/// node, lowered onto the globals object by desugaring. Rule predicates
/// resolve to rule-set locals, self fields, or globals. Emits diagnostics
/// for iteration-variable reuse, unknown classes, and misuse of `self`.
void resolveProgram(Program& p, Diagnostics& diags);

/// Static checks over a resolved program: rule safety, fact rules, arity
/// consistency, unique derivation of variable predicates, negation safety,
/// expression-position restrictions, and basic infer argument checks.
void checkWellFormed(const Program& p, Diagnostics& diags);

}  // namespace rli
