#include "rli/facts.hpp"

#include <algorithm>

#include "rli/lexer.hpp"

namespace rli {

FactMap parseFacts(const std::string& src, Diagnostics& diags) {
  FactMap facts;
  Diagnostics lexDiags;
  std::vector<Token> toks = lex(src, lexDiags);
  for (const Diagnostic& d : lexDiags)
    addDiag(diags, "E010", d.message, d.loc);
  if (!lexDiags.empty()) return facts;

  size_t i = 0;
  auto bad = [&](const std::string& msg, SrcLoc loc) {
    addDiag(diags, "E010", msg, loc);
    while (toks[i].kind != Tok::End && toks[i].kind != Tok::Dot) ++i;
    if (toks[i].kind == Tok::Dot) ++i;
  };
  while (toks[i].kind != Tok::End) {
    if (toks[i].kind != Tok::Ident) {
      bad("expected predicate name", toks[i].loc);
      continue;
    }
    std::string name = toks[i].text;
    SrcLoc loc = toks[i].loc;
    ++i;
    if (toks[i].kind != Tok::LParen) {
      bad("expected '(' after predicate name", toks[i].loc);
      continue;
    }
    ++i;
    Row row;
    bool rowOk = true;
    while (toks[i].kind != Tok::RParen && toks[i].kind != Tok::End) {
      if (toks[i].kind == Tok::Int) {
        row.push_back(Value::integer(toks[i].intVal));
        ++i;
      } else if (toks[i].kind == Tok::Str) {
        row.push_back(Value::str(toks[i].text));
        ++i;
      } else {
        rowOk = false;
        break;
      }
      if (toks[i].kind == Tok::Comma) ++i;
    }
    if (!rowOk || toks[i].kind != Tok::RParen) {
      bad("fact arguments must be integer or string literals", toks[i].loc);
      continue;
    }
    ++i;
    if (toks[i].kind != Tok::Dot) {
      bad("expected '.' after fact", toks[i].loc);
      continue;
    }
    ++i;
    auto [it, fresh] = facts.emplace(name, std::vector<Row>{});
    if (!fresh && !it->second.empty() && it->second.front().size() != row.size()) {
      addDiag(diags, "E010", "arity mismatch for '" + name + "'", loc);
      continue;
    }
    it->second.push_back(std::move(row));
  }
  return facts;
}

std::string formatFacts(const FactMap& facts) {
  std::string out;
  for (const auto& [name, rows] : facts) {
    std::vector<Row> sorted = rows;
    std::sort(sorted.begin(), sorted.end(), [](const Row& a, const Row& b) {
      return std::lexicographical_compare(a.begin(), a.end(), b.begin(),
                                          b.end(), ValueLess{});
    });
    for (const Row& r : sorted) {
      out += name + "(";
      for (size_t i = 0; i < r.size(); ++i) {
        if (i) out += ", ";
        out += toText(r[i]);
      }
      out += ").\n";
    }
  }
  return out;
}

}  // namespace rli
