#include <algorithm>
#include <random>
#include <string>
#include <vector>

#include "doctest.h"
#include "rli/analysis.hpp"
#include "rli/desugar.hpp"
#include "rli/parser.hpp"
#include "rli/runtime.hpp"
#include "rli/scope.hpp"

using namespace rli;

namespace {

Program coreProgram(const std::string& src) {
  ParseResult res = parseProgram(src);
  REQUIRE_MESSAGE(res.ok(), "program must be diagnostic-free: " << src);
  FreshNamer fresh;
  return desugarProgram(res.program, fresh);
}

size_t countKind(const UpdateSiteReport& r, UpdateKind k) {
  size_t n = 0;
  for (const UpdateSite& s : r.sites)
    if (s.kind == k) ++n;
  return n;
}

const UpdateSite* findSite(const UpdateSiteReport& r,
                           const std::string& target) {
  for (const UpdateSite& s : r.sites)
    if (s.target == target) return &s;
  return nullptr;
}

const char* kTrans =
    "rules tc() {"
    "  path(x, y) if edge(x, y);"
    "  path(x, y) if edge(x, z), path(z, y);"
    "}";

}  // namespace

TEST_CASE("updating a derived global is an error in no-alias mode only") {
  Program core = coreProgram(std::string(kTrans) + "path := {};");
  UpdateSiteReport noAlias = checkUpdates(core, AliasMode::NoAlias);
  REQUIRE(noAlias.diags.size() == 1);
  CHECK(noAlias.diags[0].code == "E013");
  CHECK(noAlias.diags[0].message.find("path") != std::string::npos);
  REQUIRE(findSite(noAlias, "path") != nullptr);
  CHECK(findSite(noAlias, "path")->kind == UpdateKind::DerivedUpdateError);

  UpdateSiteReport aliased = checkUpdates(core, AliasMode::AliasChecked);
  CHECK(aliased.diags.empty());  // deferred to the runtime guard
  REQUIRE(findSite(aliased, "path") != nullptr);
  CHECK(findSite(aliased, "path")->kind == UpdateKind::DerivedUpdateError);
}

TEST_CASE("base and unrelated sites are marked, never diagnosed") {
  Program core = coreProgram(std::string(kTrans) +
                             "edge := {(1, 2)};"
                             "edge.add((2, 3));"
                             "edge.del((1, 2));"
                             "junk := 7;");
  UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
  CHECK(r.diags.empty());
  // Display desugaring turns the set display into one creation plus one
  // add, so edge has: new, display add, add, del = 4 base sites.
  CHECK(countKind(r, UpdateKind::BaseUpdate) == 4);
  CHECK(countKind(r, UpdateKind::DerivedUpdateError) == 0);
  REQUIRE(findSite(r, "junk") != nullptr);
  CHECK(findSite(r, "junk")->kind == UpdateKind::Unrelated);
}

TEST_CASE("self-field updates resolve against the enclosing class chain") {
  const char* src =
      "class A {"
      "  rules ar() { self.d(x) if self.b(x); }"
      "}"
      "class B extends A {"
      "  def Bad() { self.d := 5; }"
      "  def Good(v) { self.b.add(v); }"
      "  def Plain() { self.note := 1; }"
      "}"
      "class C {"
      "  def AlsoFine() { self.d := 5; }"  // no rule set involves C's d
      "}"
      "skip;";
  Program core = coreProgram(src);
  UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
  REQUIRE(r.diags.size() == 1);
  CHECK(r.diags[0].code == "E013");
  CHECK(r.diags[0].message.find("self.d") != std::string::npos);

  const UpdateSite* bad = findSite(r, "self.d");
  REQUIRE(bad != nullptr);
  CHECK(bad->kind == UpdateKind::DerivedUpdateError);
  CHECK(bad->context == "B.Bad");
  const UpdateSite* good = findSite(r, "self.b");
  REQUIRE(good != nullptr);
  CHECK(good->kind == UpdateKind::BaseUpdate);
  const UpdateSite* plain = findSite(r, "self.note");
  REQUIRE(plain != nullptr);
  CHECK(plain->kind == UpdateKind::Unrelated);
  // C.AlsoFine's self.d is a different class: unrelated, no diagnostic.
  size_t selfDSites = 0;
  for (const UpdateSite& s : r.sites)
    if (s.target == "self.d") ++selfDSites;
  CHECK(selfDSites == 2);
}

TEST_CASE("updates through arbitrary objects stay unrelated statically") {
  const char* src =
      "class F {"
      "  rules fr() { self.d(x) if self.b(x); }"
      "  def M(o) { o.d := 5; }"
      "}"
      "skip;";
  Program core = coreProgram(src);
  UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
  CHECK(r.diags.empty());  // aliasing territory: runtime guard catches it
  REQUIRE(r.sites.size() == 1);
  CHECK(r.sites[0].kind == UpdateKind::Unrelated);
}

TEST_CASE("infer targets are update sites") {
  Program core = coreProgram(
      std::string(kTrans) +
      "rules tr(e, p) { p(x, y) if e(x, y); }"
      "rh := {(1, 2)};"
      "path := infer(p, e=rh, rules=tr);");
  UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
  REQUIRE(r.diags.size() == 1);
  CHECK(r.diags[0].code == "E013");
  const UpdateSite* site = findSite(r, "path");
  REQUIRE(site != nullptr);
  CHECK(site->kind == UpdateKind::DerivedUpdateError);
}

TEST_CASE("every update statement appears in the site list") {
  Program core = coreProgram(
      std::string(kTrans) +
      "edge := {};"
      "q := new sequence;"
      "for x in edge { q.add(x); }"
      "if True { junk := 1; } else { junk := 2; }"
      "while False { edge.add((1, 1)); }");
  UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
  // edge new, q new, q.add (in loop), 2 junk assigns, edge.add (in while).
  CHECK(r.sites.size() == 6);
  std::string text = explainUpdates(r);
  CHECK(text.find("no-alias") != std::string::npos);
  CHECK(text.find("base update of 'edge'") != std::string::npos);
  CHECK(text.find("unrelated update of 'junk'") != std::string::npos);
}

TEST_CASE("local infer references are validated standalone") {
  SUBCASE("valid references produce no diagnostics") {
    Program core = coreProgram(
        "rules tr(e, p) { p(x, y) if e(x, y); }"
        "rh := {(1, 2)};"
        "res := infer(p, e=rh, rules=tr);");
    CHECK(localInferCheck(core).empty());
  }
  SUBCASE("violations are reported over unchecked programs") {
    auto unchecked = [](const std::string& src) {
      ParseResult res = parseProgramRaw(src);
      REQUIRE(res.diags.empty());
      Diagnostics ignored;
      resolveProgram(res.program, ignored);
      FreshNamer fresh;
      return desugarProgram(res.program, fresh);
    };
    Diagnostics unknown =
        localInferCheck(unchecked("x := infer(p, rules=nope);"));
    REQUIRE(unknown.size() == 1);
    CHECK(unknown[0].message.find("unknown rule set") != std::string::npos);

    Diagnostics badKw = localInferCheck(
        unchecked("rules tr(e, p) { p(x, y) if e(x, y); }"
                  "s := {(1, 2)};"
                  "x := infer(p, zig=s, rules=tr);"));
    REQUIRE(badKw.size() == 1);
    CHECK(badKw[0].message.find("zig") != std::string::npos);

    Diagnostics baseQuery = localInferCheck(
        unchecked("rules tr(e, p) { p(x, y) if e(x, y); }"
                  "s := {(1, 2)};"
                  "x := infer(e, e=s, rules=tr);"));
    REQUIRE(baseQuery.size() == 1);
    CHECK(baseQuery[0].message.find("not a derived predicate") !=
          std::string::npos);
  }
}

TEST_CASE("methods of a class with rule sets classify their own sites") {
  const char* src =
      "class RBAC {"
      "  rules transRH() {"
      "    self.tr(u, v) if self.rh(u, v);"
      "    self.tr(u, v) if self.rh(u, w), self.tr(w, v);"
      "  }"
      "  def Setup() { self.rh := {}; self.roles := {}; }"
      "  def AddRole(role) { self.roles.add(role); }"
      "  def Link(a, b) { self.rh.add((a, b)); }"
      "}"
      "h := new RBAC;"
      "h.Setup();"
      "h.AddRole('chair');";
  Program core = coreProgram(src);
  UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
  CHECK(r.diags.empty());
  const UpdateSite* rh = findSite(r, "self.rh");
  REQUIRE(rh != nullptr);
  CHECK(rh->kind == UpdateKind::BaseUpdate);
  const UpdateSite* h = findSite(r, "h");
  REQUIRE(h != nullptr);
  CHECK(h->kind == UpdateKind::Unrelated);
}

// ---------------------------------------------------------------------------
// Soundness: a program that passes the no-alias check never trips the
// runtime's illegal-assignment guard on a syntactically named field, as
// long as it does not alias objects. Fuzzed over generated programs.
// ---------------------------------------------------------------------------

TEST_CASE("no-alias check is sound for alias-free programs") {
  std::mt19937_64 rng(77001);
  auto ri = [&](int lo, int hi) {
    return std::uniform_int_distribution<int>(lo, hi)(rng);
  };
  int cleanTrials = 0;
  int executedBadTrials = 0;
  for (int trial = 0; trial < 60; ++trial) {
    bool allowBad = ri(0, 1) == 1;
    bool declareBadD = allowBad && ri(0, 1) == 1;
    std::string src =
        "rules tc() {"
        "  path(x, y) if edge(x, y);"
        "  path(x, y) if edge(x, z), path(z, y);"
        "}"
        "class C {"
        "  rules cr() { self.d(x) if self.b(x); }"
        "  def Init() { self.b := {}; }"
        "  def SetB(v) { self.b.add(v); }"
        "  def ReadD() { probe := self.d.any(); }";
    if (declareBadD) src += "  def BadD(v) { self.d := v; }";
    src +=
        "}"
        "edge := {}; junk := 0;"
        "o := new C; o.Init();";

    bool staticBad = declareBadD;  // the body is a site even if never run
    bool executedBad = false;
    int ops = ri(4, 14);
    for (int i = 0; i < ops; ++i) {
      int a = ri(0, 3);
      int pick = ri(0, allowBad ? 7 : 4);
      switch (pick) {
        case 0:
        case 1:
          src += "edge.add((" + std::to_string(a) + ", " +
                 std::to_string(ri(0, 3)) + "));";
          break;
        case 2:
          src += "junk := " + std::to_string(a) + ";";
          break;
        case 3:
          src += "o.SetB(" + std::to_string(a) + ");";
          break;
        case 4:
          src += "o.ReadD();";
          break;
        case 5:
          src += "path := {};";
          staticBad = executedBad = true;
          break;
        case 6:
          src += "path.add((1, 1));";
          staticBad = executedBad = true;
          break;
        case 7:
          if (declareBadD) {
            src += "o.BadD(" + std::to_string(a) + ");";
            executedBad = true;
          } else {
            src += "junk := 9;";
          }
          break;
      }
    }

    Program core = coreProgram(src);
    UpdateSiteReport r = checkUpdates(core, AliasMode::NoAlias);
    bool flagged = !r.diags.empty();
    CHECK_MESSAGE(flagged == staticBad, "site flags diverged: " << src);
    for (const Diagnostic& d : r.diags) CHECK(d.code == "E013");

    Machine m(core);
    Outcome o = m.run();
    if (executedBad) {
      ++executedBadTrials;
      REQUIRE_MESSAGE(o.kind == Outcome::Kind::Error, "expected a fault: "
                                                          << src);
      CHECK(o.message.find("illegal assignment") != std::string::npos);
      CHECK(flagged);  // runtime illegal-assign implies a static flag
    } else {
      REQUIRE_MESSAGE(o.kind == Outcome::Kind::Done,
                      "clean run failed: " << o.message << " in " << src);
    }
    if (!flagged) ++cleanTrials;
  }
  // The generator must actually exercise both sides of the property.
  CHECK(cleanTrials >= 10);
  CHECK(executedBadTrials >= 10);
}
