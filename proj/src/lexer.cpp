#include "rli/lexer.hpp"

#include <cctype>

namespace rli {

std::vector<Token> lex(const std::string& src, Diagnostics& diags) {
  std::vector<Token> out;
  int line = 1, col = 1;
  size_t i = 0;
  const size_t n = src.size();

  auto push = [&](Tok k, std::string text, SrcLoc loc, int64_t iv = 0) {
    out.push_back({k, std::move(text), iv, loc});
  };

  while (i < n) {
    char c = src[i];
    SrcLoc loc{line, col};
    if (c == '\n') {
      ++i;
      ++line;
      col = 1;
      continue;
    }
    if (c == ' ' || c == '\t' || c == '\r') {
      ++i;
      ++col;
      continue;
    }
    if (c == '#') {
      while (i < n && src[i] != '\n') ++i;
      continue;
    }
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
      size_t j = i;
      while (j < n && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                       src[j] == '_' || src[j] == '$'))
        ++j;
      std::string word = src.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      if (word == "_") {
        push(Tok::Underscore, word, loc);
      } else if (word[0] == '$') {
        addDiag(diags, "E008", "identifier '" + word + "' uses the reserved '$' prefix",
                loc);
        push(Tok::Ident, word, loc);
      } else {
        push(Tok::Ident, word, loc);
      }
      continue;
    }
    if (std::isdigit(static_cast<unsigned char>(c)) ||
        (c == '-' && i + 1 < n && std::isdigit(static_cast<unsigned char>(src[i + 1])))) {
      size_t j = i + 1;
      while (j < n && std::isdigit(static_cast<unsigned char>(src[j]))) ++j;
      std::string word = src.substr(i, j - i);
      col += static_cast<int>(j - i);
      i = j;
      push(Tok::Int, word, loc, std::stoll(word));
      continue;
    }
    if (c == '\'') {
      std::string val;
      size_t j = i + 1;
      bool closed = false;
      while (j < n) {
        char d = src[j];
        if (d == '\\' && j + 1 < n) {
          char e = src[j + 1];
          val.push_back(e == 'n' ? '\n' : e);
          j += 2;
          continue;
        }
        if (d == '\'') {
          closed = true;
          ++j;
          break;
        }
        if (d == '\n') break;
        val.push_back(d);
        ++j;
      }
      if (!closed) addDiag(diags, "E001", "unterminated string literal", loc);
      col += static_cast<int>(j - i);
      i = j;
      push(Tok::Str, val, loc);
      continue;
    }
    auto two = [&](char a, char b) {
      return c == a && i + 1 < n && src[i + 1] == b;
    };
    if (two(':', '=')) {
      push(Tok::Assign, ":=", loc);
      i += 2;
      col += 2;
      continue;
    }
    Tok k;
    switch (c) {
      case '=': k = Tok::Eq; break;
      case '(': k = Tok::LParen; break;
      case ')': k = Tok::RParen; break;
      case '{': k = Tok::LBrace; break;
      case '}': k = Tok::RBrace; break;
      case ',': k = Tok::Comma; break;
      case '.': k = Tok::Dot; break;
      case ':': k = Tok::Colon; break;
      case ';': k = Tok::Semi; break;
      case '|': k = Tok::Bar; break;
      case '+': k = Tok::Plus; break;
      case '<': k = Tok::Lt; break;
      default:
        addDiag(diags, "E001",
                std::string("unexpected character '") + c + "'", loc);
        ++i;
        ++col;
        continue;
    }
    push(k, std::string(1, c), loc);
    ++i;
    ++col;
  }
  out.push_back({Tok::End, "", 0, {line, col}});
  return out;
}

}  // namespace rli
