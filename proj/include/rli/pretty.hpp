#pragma once

#include <string>

#include "rli/ast.hpp"

namespace rli {

/// Renders a program in concrete syntax. Output of a parsed program
/// reparses to a structurally equal program. Lowered forms that have no
/// surface spelling print as `@addr.field`; such output is for inspection
/// only.
std::string prettyProgram(const Program& p);

std::string prettyStmt(const StmtP& s, int indent = 0);
std::string prettyExpr(const ExprP& e);
std::string prettyRule(const Rule& r);

}  // namespace rli
