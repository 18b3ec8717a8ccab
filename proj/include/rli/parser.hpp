#pragma once

#include <map>
#include <optional>
#include <string>

#include "rli/ast.hpp"
#include "rli/diag.hpp"

namespace rli {

/// Result of parsing a program: the AST (names resolved) plus any
/// diagnostics. `ok()` is false if any diagnostic was produced.
struct ParseResult {
  Program program;
  Diagnostics diags;
  bool ok() const { return diags.empty(); }
};

/// Parses and resolves a program: top-level rule sets, classes, and main
/// statements. Bare names are resolved to parameters, self fields, or
/// globals; well-formedness checks run after resolution.
ParseResult parseProgram(const std::string& src);

/// Parses source into a raw AST without resolution or well-formedness
/// checks. Used by the pretty-printer round-trip tests.
ParseResult parseProgramRaw(const std::string& src);

}  // namespace rli
