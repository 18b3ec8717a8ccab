#include <doctest.h>

#include <string>

#include "rli/facts.hpp"
#include "rli/parser.hpp"
#include "rli/pretty.hpp"

using namespace rli;

namespace {

bool hasCode(const Diagnostics& ds, const std::string& code) {
  for (const Diagnostic& d : ds)
    if (d.code == code) return true;
  return false;
}

std::string allCodes(const Diagnostics& ds) {
  std::string out;
  for (const Diagnostic& d : ds) out += d.format() + "\n";
  return out;
}

}  // namespace

TEST_CASE("transitive closure rule set parses with locals classified") {
  auto res = parseProgram(
      "rules trans_rs(path, edge) {"
      "  path(x, y) if edge(x, y);"
      "  path(x, y) if edge(x, z), path(z, y);"
      "}");
  INFO(allCodes(res.diags));
  REQUIRE(res.ok());
  REQUIRE(res.program.rulesets.size() == 1);
  const RuleSetDecl& rs = res.program.rulesets[0];
  CHECK(rs.name == "trans_rs");
  REQUIRE(rs.rules.size() == 2);
  CHECK(rs.rules[0].head.pred.kind == PredRef::Kind::Param);
  CHECK(rs.rules[0].head.pred.name == "path");
  CHECK(rs.rules[1].hyps.size() == 2);
  CHECK(rs.rules[1].hyps[0].atom.pred.name == "edge");
}

TEST_CASE("empty program yields a skip main") {
  auto res = parseProgram("");
  REQUIRE(res.ok());
  CHECK(res.program.rulesets.empty());
  CHECK(res.program.classes.empty());
  CHECK(res.program.main->kind == Stmt::Kind::Skip);
}

TEST_CASE("unsafe rule is rejected") {
  auto res = parseProgram("rules r(p, q) { p(x, y) if q(x); }");
  CHECK(hasCode(res.diags, "E002"));
}

TEST_CASE("fact rules must be all-constant") {
  auto ok = parseProgram("rules r(p) { p(1, 'a'); }");
  INFO(allCodes(ok.diags));
  CHECK(ok.ok());
  auto bad = parseProgram("rules r(p) { p(x); }");
  CHECK(hasCode(bad.diags, "E003"));
}

TEST_CASE("predicate arity must be consistent within a rule set") {
  auto res = parseProgram("rules r(p, q) { p(x) if q(x); p(x, y) if q(x), q(y); }");
  CHECK(hasCode(res.diags, "E004"));
}

TEST_CASE("a global derived in two rule sets is rejected") {
  auto res = parseProgram(
      "rules a() { w(x) if m(x); }"
      "rules b() { w(x) if k(x); }");
  CHECK(hasCode(res.diags, "E005"));
}

TEST_CASE("self fields are rejected in global rule sets") {
  auto res = parseProgram("rules r(p) { p(x) if self.q(x); }");
  CHECK(hasCode(res.diags, "E006"));
}

TEST_CASE("negation must be bound by earlier positive hypotheses") {
  auto ok = parseProgram("rules r(w, m) { w(x) if m(x, y), not w(y); }");
  INFO(allCodes(ok.diags));
  CHECK(ok.ok());
  auto bad = parseProgram("rules r(w, m) { w(x) if not w(y), m(x, y); }");
  CHECK(hasCode(bad.diags, "E012"));
}

TEST_CASE("dollar names are reserved") {
  auto res = parseProgram("$x := 1;");
  CHECK(hasCode(res.diags, "E008"));
}

TEST_CASE("set and sequence are reserved class names") {
  auto res = parseProgramRaw("class set { }");
  CHECK(hasCode(res.diags, "E008"));
}

TEST_CASE("statements resolve names to globals, including loop variables") {
  auto res = parseProgram(
      "edge := {(1, 2)};"
      "for (x, y) in edge { total := x + y; }");
  INFO(allCodes(res.diags));
  REQUIRE(res.ok());
  // main = Seq(assign, for)
  const StmtP& main = res.program.main;
  REQUIRE(main->kind == Stmt::Kind::Seq);
  CHECK(main->a->target->kind == Expr::Kind::Global);
  const StmtP& loop = main->b;
  REQUIRE(loop->kind == Stmt::Kind::For);
  const Pattern& pat = loop->iters[0].pat;
  REQUIRE(pat.isTuple);
  // loop variables are ordinary (global) variables, assigned per iteration
  CHECK(pat.elems[0].e->kind == Expr::Kind::Global);
  CHECK(loop->a->target->kind == Expr::Kind::Global);
  CHECK(loop->a->rhs->a->kind == Expr::Kind::Global);
}

TEST_CASE("nested constructs cannot reuse an iteration variable") {
  CHECK(hasCode(parseProgram("for x in s { for x in t { skip; } }").diags,
                "E009"));
  CHECK(hasCode(parseProgram("for x in s { z := (some x in t | True); }").diags,
                "E009"));
  // sequential loops may reuse a name freely
  CHECK(parseProgram("for x in s { skip; } for x in t { skip; }").ok());
}

TEST_CASE("duplicate variables in one iterator group express joins") {
  auto res = parseProgram(
      "z := (some (x, y) in t, (y, w) in e | True);");
  INFO(allCodes(res.diags));
  CHECK(res.ok());
}

TEST_CASE("assigning to an active iteration variable is rejected") {
  CHECK(hasCode(parseProgram("for x in s { x := 1; }").diags, "E009"));
  CHECK(hasCode(parseProgram("class C { def m(n) { n := 1; } }").diags,
                "E009"));
  // after the loop the variable is assignable again
  CHECK(parseProgram("for x in s { skip; } x := 1;").ok());
}

TEST_CASE("self outside a method is rejected") {
  auto res = parseProgram("y := self.f;");
  CHECK(hasCode(res.diags, "E007"));
}

TEST_CASE("methods bind parameters and self") {
  auto res = parseProgram(
      "class C {"
      "  def setup(n) { self.size := n; count := n; }"
      "  defun twice(n) = n + n;"
      "}");
  INFO(allCodes(res.diags));
  REQUIRE(res.ok());
  const MethodDecl& m = res.program.classes[0].methods[0];
  const StmtP& first = m.body->a;
  CHECK(first->target->kind == Expr::Kind::Field);
  CHECK(first->target->obj->kind == Expr::Kind::Param);
  CHECK(first->rhs->kind == Expr::Kind::Param);
  CHECK(m.body->b->target->kind == Expr::Kind::Global);
}

TEST_CASE("unknown classes are reported") {
  CHECK(hasCode(parseProgram("x := new Widget;").diags, "E007"));
  CHECK(hasCode(parseProgram("class C extends D { }").diags, "E007"));
  CHECK(hasCode(parseProgram("x := isinstance(1, Widget);").diags, "E007"));
  CHECK(parseProgram("x := new set; y := isinstance(x, set);").ok());
}

TEST_CASE("duplicate declarations are reported") {
  CHECK(hasCode(parseProgram("class C { } class C { }").diags, "E015"));
  CHECK(hasCode(parseProgram("class C extends C { }").diags, "E015"));
  CHECK(hasCode(
      parseProgram("class C { def m() { skip; } def m() { skip; } }").diags,
      "E015"));
}

TEST_CASE("aggregates and set displays are assignment sources only") {
  CHECK(parseProgram("x := count(s);").ok());
  CHECK(hasCode(parseProgram("x := count(s) + 1;").diags, "E009"));
  // A display followed by an operator never parses as a full source.
  CHECK(!parseProgram("x := {1, 2} + s;").ok());
  CHECK(hasCode(parseProgram("x := f.m({1, 2});").diags, "E009"));
  CHECK(parseProgram("x := {1, 2};").ok());
}

TEST_CASE("mutating and pure calls keep their positions") {
  auto bad1 = parseProgram("x := s.add(1);");
  CHECK(hasCode(bad1.diags, "E009"));
  auto bad2 = parseProgram("s.contains(1);");
  CHECK(hasCode(bad2.diags, "E009"));
  CHECK(parseProgram("s.add(1); x := s.contains(1);").ok());
}

TEST_CASE("infer arguments are checked against the rule set") {
  std::string rs =
      "rules trans_rs(path, edge) {"
      "  path(x, y) if edge(x, y);"
      "  path(x, y) if edge(x, z), path(z, y);"
      "}";
  CHECK(parseProgram(rs + "p := infer(path, edge=rh, rules=trans_rs);").ok());
  CHECK(hasCode(
      parseProgram(rs + "p := infer(edge, rules=trans_rs);").diags, "E014"));
  CHECK(hasCode(
      parseProgram(rs + "p := infer(path, zig=rh, rules=trans_rs);").diags,
      "E014"));
  CHECK(hasCode(parseProgram("p := infer(path, rules=nope);").diags, "E014"));
  CHECK(hasCode(
      parseProgram(rs + "p, q := infer(path, rules=trans_rs);").diags,
      "E014"));
}

TEST_CASE("infer query patterns parse") {
  std::string rs =
      "rules trans_rs(path, edge) {"
      "  path(x, y) if edge(x, y);"
      "}";
  auto res = parseProgram(rs + "p := infer(path(1, _), edge=rh, rules=trans_rs);");
  INFO(allCodes(res.diags));
  REQUIRE(res.ok());
  const StmtP& s = res.program.main;
  REQUIRE(s->kind == Stmt::Kind::Infer);
  REQUIRE(s->queries.size() == 1);
  CHECK(s->queries[0].hasPattern);
  CHECK(s->queries[0].pat[0].kind == PatElem::Kind::Expr);
  CHECK(s->queries[0].pat[1].kind == PatElem::Kind::Wildcard);
}

TEST_CASE("nested tuple patterns are rejected") {
  auto res = parseProgram("for ((a, b), c) in s { skip; }");
  CHECK(hasCode(res.diags, "E011"));
}

TEST_CASE("fact files parse into relations") {
  Diagnostics ds;
  FactMap m = parseFacts("edge(1, 2). edge(2, 3).\n# comment\nname('u1').", ds);
  REQUIRE(ds.empty());
  CHECK(m["edge"].size() == 2);
  CHECK(m["name"].size() == 1);
  CHECK(m["name"][0][0] == Value::str("u1"));

  Diagnostics ds2;
  parseFacts("edge(1, 2). edge(1).", ds2);
  CHECK(hasCode(ds2, "E010"));

  Diagnostics ds3;
  CHECK(parseFacts("", ds3).empty());
  CHECK(ds3.empty());
}

TEST_CASE("fact files keep negative integers and strings") {
  Diagnostics ds;
  FactMap m = parseFacts("w(-4). w(5).", ds);
  REQUIRE(ds.empty());
  CHECK(m["w"].size() == 2);
  std::string printed = formatFacts(m);
  CHECK(printed == "w(-4).\nw(5).\n");
}

TEST_CASE("pretty printed programs reparse to the same tree") {
  const char* sources[] = {
      "rules trans_rs(path, edge) {"
      "  path(x, y) if edge(x, y);"
      "  path(x, y) if edge(x, z), path(z, y);"
      "}"
      "e := {(1, 8), (2, 9), (1, 2)};"
      "p := infer(path, edge=e, rules=trans_rs);",

      "class HierRBAC {"
      "  rules transRH_rs() {"
      "    self.transRH(r1, r2) if self.RH(r1, r2);"
      "    self.transRH(r1, r3) if self.RH(r1, r2), self.transRH(r2, r3);"
      "    self.transRH(r, r) if self.ROLES(r);"
      "  }"
      "  def addRole(role) { self.ROLES.add(role); }"
      "  defun ok(n) = n is 1 or n is 2;"
      "}"
      "h := new HierRBAC;"
      "h.addRole('r1');",

      "x := 1 + 2 + 3;"
      "y := (some (a, b) in s, (c) in t | a is c and b < 4);"
      "if not (x in s) { x := -1; } else { x := {v : (v, _) in s | v < 9}; }"
      "whileSome w in work | w < 5 { work.del(w); }"
      "n := count{u : u in s | True};"
      "m := sum(s);"
      "a, b := b, a;",
  };
  for (const char* src : sources) {
    CAPTURE(src);
    auto first = parseProgram(src);
    INFO(allCodes(first.diags));
    REQUIRE(first.ok());
    std::string printed = prettyProgram(first.program);
    CAPTURE(printed);
    auto second = parseProgram(printed);
    INFO(allCodes(second.diags));
    REQUIRE(second.ok());
    CHECK(equalProgram(first.program, second.program));
    CHECK(prettyProgram(second.program) == printed);
  }
}

TEST_CASE("diagnostics carry positions") {
  auto res = parseProgram("x := ;");
  REQUIRE(!res.ok());
  CHECK(res.diags[0].code == "E001");
  CHECK(res.diags[0].loc.line == 1);
}
