#pragma once

#include <string>
#include <vector>

#include "rli/diag.hpp"

namespace rli {

enum class Tok {
  End,
  Ident,      // identifiers and keywords (text carries the spelling)
  Int,        // integer literal, '-' prefix folded in by the lexer
  Str,        // single-quoted string literal (text carries decoded value)
  Assign,     // :=
  Eq,         // =
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Dot,
  Colon,
  Semi,
  Bar,        // |
  Plus,       // +
  Lt,         // <
  Underscore  // _
};

struct Token {
  Tok kind = Tok::End;
  std::string text;
  int64_t intVal = 0;
  SrcLoc loc;
};

/// Tokenizes source text. '#' starts a comment running to end of line.
/// Identifiers beginning with '$' are reserved for the desugarer and are
/// rejected with E008.
std::vector<Token> lex(const std::string& src, Diagnostics& diags);

}  // namespace rli
