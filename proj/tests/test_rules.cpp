#include <algorithm>
#include <random>
#include <set>
#include <string>
#include <vector>

#include "doctest.h"
#include "rli/parser.hpp"
#include "rli/pretty.hpp"
#include "rli/rules.hpp"

using namespace rli;

namespace {

RuleSetDecl parsedRuleSet(const std::string& src) {
  ParseResult res = parseProgram(src);
  REQUIRE_MESSAGE(res.ok(), "input must be diagnostic-free: " << src);
  bool hasRuleSet =
      !res.program.rulesets.empty() || !res.program.classes.empty();
  REQUIRE(hasRuleSet);
  if (!res.program.rulesets.empty()) return res.program.rulesets[0];
  return res.program.classes[0].rulesets[0];
}

const std::string kTrans =
    "rules trans_rs(edge, path) {"
    "  path(x, y) if edge(x, y);"
    "  path(x, y) if edge(x, z), path(z, y);"
    "}"
    "skip;";

// Hand-built rules for generated graphs: every predicate is a parameter,
// every rule is unary and safe (p(x) if q(x) [, not r(x)]).
PredRef param(const std::string& n) {
  PredRef p;
  p.kind = PredRef::Kind::Param;
  p.name = n;
  return p;
}

RuleArg varArg(const std::string& v) {
  RuleArg a;
  a.isVar = true;
  a.var = v;
  return a;
}

RuleAtom atom(const std::string& pred) {
  RuleAtom a;
  a.pred = param(pred);
  a.args = {varArg("x")};
  return a;
}

Rule edgeRule(const std::string& head, const std::string& body, bool neg) {
  Rule r;
  r.head = atom(head);
  if (neg) r.hyps.push_back({false, atom(head + "$guard")});
  r.hyps.push_back({neg, atom(body)});
  return r;
}

// Independent oracle: base predicates reachable from `from`, by fixpoint
// over the rule list (no shared code with classify's depth-first walk).
std::set<std::string> reachableBases(const std::vector<Rule>& rules,
                                     const std::string& from) {
  std::set<std::string> heads;
  for (const Rule& r : rules) heads.insert(r.head.pred.key());

  std::set<std::string> reach = {from};
  bool grew = true;
  while (grew) {
    grew = false;
    for (const Rule& r : rules)
      if (reach.count(r.head.pred.key()))
        for (const RuleHyp& h : r.hyps)
          grew |= reach.insert(h.atom.pred.key()).second;
  }
  std::set<std::string> bases;
  for (const std::string& p : reach)
    if (!heads.count(p)) bases.insert(p);
  return bases;
}

// Independent oracle: some cycle passes through a negated hypothesis.
// For each negative edge u -> v, test whether u is reachable from v over
// edges of either polarity (breadth-first).
bool hasNegativeCycle(const std::vector<Rule>& rules) {
  std::map<std::string, std::set<std::string>> succ;
  std::vector<std::pair<std::string, std::string>> neg;
  for (const Rule& r : rules)
    for (const RuleHyp& h : r.hyps) {
      succ[r.head.pred.key()].insert(h.atom.pred.key());
      if (h.negated) neg.emplace_back(r.head.pred.key(), h.atom.pred.key());
    }
  for (const auto& [u, v] : neg) {
    std::set<std::string> seen = {v};
    std::vector<std::string> todo = {v};
    while (!todo.empty()) {
      std::string n = todo.back();
      todo.pop_back();
      if (n == u) return true;
      for (const std::string& w : succ[n])
        if (seen.insert(w).second) todo.push_back(w);
    }
  }
  return false;
}

std::vector<std::string> ruleTexts(const std::vector<Rule>& rules) {
  std::vector<std::string> out;
  for (const Rule& r : rules) out.push_back(prettyRule(r));
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace

TEST_CASE("transitive-closure rule set classifies edge base, path derived") {
  RuleSetInfo info = classify(parsedRuleSet(kTrans));
  CHECK(info.basePredParams == std::set<std::string>{"%edge"});
  CHECK(info.derivedPredParams == std::set<std::string>{"%path"});
  CHECK(info.basePredVars.empty());
  CHECK(info.derivedPredVars.empty());
  // path depends on edge and, through its recursive rule, on itself.
  CHECK((info.dependency.at("%path") ==
         std::set<std::string>{"%edge", "%path"}));
}

TEST_CASE("a fact rule's predicate is derived with no base predicates") {
  RuleSetInfo info = classify(parsedRuleSet("rules f(p) { p(1, 2); } skip;"));
  CHECK(info.basePreds().empty());
  CHECK(info.derivedPreds() == std::set<std::string>{"%p"});
  CHECK(info.dependency.at("%p").empty());
  CHECK(fullyDepends(info, "%p", {}));
}

TEST_CASE("self-field rule set classifies fields as variable predicates") {
  RuleSetDecl rs = parsedRuleSet(
      "class HierRBAC {"
      "  rules transRH_rs() {"
      "    self.transRH(x, y) if self.RH(x, y);"
      "    self.transRH(r, r) if self.ROLES(r);"
      "    self.transRH(x, y) if self.RH(x, z), self.transRH(z, y);"
      "  }"
      "}"
      "skip;");
  RuleSetInfo info = classify(rs);
  CHECK((info.basePredVars ==
         std::set<std::string>{"self.RH", "self.ROLES"}));
  CHECK(info.derivedPredVars == std::set<std::string>{"self.transRH"});
  CHECK(info.basePredParams.empty());
  CHECK(info.derivedPredParams.empty());

  SUBCASE("fully depends needs every reachable base predicate") {
    CHECK(fullyDepends(info, "self.transRH", {"self.RH", "self.ROLES"}));
    CHECK(!fullyDepends(info, "self.transRH", {"self.RH"}));
    CHECK(fullyDepends(info, "self.transRH", info.basePreds()));
  }

  SUBCASE("instantiation rewrites self fields to the receiver's fields") {
    InstRuleSet inst = instantiate(rs, 7, "HierRBAC");
    CHECK(inst.origin == "HierRBAC");
    REQUIRE(inst.rules.size() == 3);
    CHECK(inst.rules[0].head.pred.key() == "@7.transRH");
    CHECK(inst.rules[0].hyps[0].atom.pred.key() == "@7.RH");
    CHECK(inst.rules[1].hyps[0].atom.pred.key() == "@7.ROLES");
    CHECK(inst.rules[2].hyps[1].atom.pred.key() == "@7.transRH");
  }
}

TEST_CASE("transitive-closure fully-depends and slicing") {
  RuleSetDecl rs = parsedRuleSet(kTrans);
  RuleSetInfo info = classify(rs);
  CHECK(fullyDepends(info, "%path", {"%edge"}));
  CHECK(!fullyDepends(info, "%path", {}));

  CHECK(slice(rs.rules, {"%edge"}).size() == 2);
  CHECK(slice(rs.rules, {}).empty());
}

TEST_CASE("slicing keeps only chains grounded in known predicates") {
  RuleSetDecl rs = parsedRuleSet(
      "rules two(p, q, r, s) {"
      "  p(x) if q(x);"
      "  r(x) if s(x);"
      "}"
      "skip;");
  std::vector<Rule> kept = slice(rs.rules, {"%q"});
  REQUIRE(kept.size() == 1);
  CHECK(kept[0].head.pred.key() == "%p");
}

TEST_CASE("instantiating a parameter-only rule set changes nothing") {
  RuleSetDecl rs = parsedRuleSet(kTrans);
  InstRuleSet inst = instantiate(rs, kGlobalsAddr, "global");
  CHECK(inst.origin == "global");
  CHECK(ruleTexts(inst.rules) == ruleTexts(rs.rules));
}

TEST_CASE("same-generation variant stratifies with the negation on top") {
  RuleSetDecl rs = parsedRuleSet(
      "rules modsg(sg, nonsg, sg2, up, down, flat) {"
      "  sg(x, y) if flat(x, y);"
      "  sg(x, y) if up(x, z), sg(z, w), down(w, y);"
      "  nonsg(x, y) if up(x, z), sg(z, y);"
      "  sg2(x, y) if sg(x, y), not nonsg(x, y);"
      "}"
      "skip;");
  Stratification st = stratify(rs.rules);
  REQUIRE(st.ok);
  int sg = st.stratumOf("%sg");
  int nonsg = st.stratumOf("%nonsg");
  int sg2 = st.stratumOf("%sg2");
  REQUIRE(sg >= 0);
  REQUIRE(nonsg >= 0);
  REQUIRE(sg2 >= 0);
  CHECK(sg2 > sg);
  CHECK(sg2 > nonsg);
  CHECK(nonsg > sg);
  // Every other predicate is below sg2, so sg2 sits alone on top.
  CHECK(sg2 == static_cast<int>(st.strata.size()) - 1);
  CHECK(st.strata.back() == std::vector<std::string>{"%sg2"});
}

TEST_CASE("negation through recursion is not stratifiable") {
  RuleSetDecl rs = parsedRuleSet(
      "rules winr(win, move) {"
      "  win(x) if move(x, y), not win(y);"
      "}"
      "skip;");
  CHECK(!stratify(rs.rules).ok);
}

TEST_CASE("negation-free recursion is always stratifiable") {
  RuleSetDecl rs = parsedRuleSet(kTrans);
  Stratification st = stratify(rs.rules);
  REQUIRE(st.ok);
  CHECK(st.stratumOf("%edge") < st.stratumOf("%path"));
}

TEST_CASE("strata order every dependency downward") {
  // On a fixed rule set with a diamond and a negation, the strata form a
  // topological order: positive edges never go up, negative edges go
  // strictly down.
  RuleSetDecl rs = parsedRuleSet(
      "rules d(a, b, c, e, f) {"
      "  b(x) if a(x);"
      "  c(x) if a(x);"
      "  e(x) if b(x), c(x);"
      "  f(x) if e(x), not b(x);"
      "}"
      "skip;");
  Stratification st = stratify(rs.rules);
  REQUIRE(st.ok);
  for (const Rule& r : rs.rules) {
    int head = st.stratumOf(r.head.pred.key());
    for (const RuleHyp& h : r.hyps) {
      int hyp = st.stratumOf(h.atom.pred.key());
      CHECK(hyp <= head);
      if (h.negated) CHECK(hyp < head);
    }
  }
}

TEST_CASE("classification partitions every mentioned predicate") {
  std::mt19937_64 rng(20240811);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> npred(1, 6), nrule(1, 6), coin(0, 1);
    int preds = npred(rng);
    std::uniform_int_distribution<int> pick(0, preds - 1);
    std::vector<Rule> rules;
    int count = nrule(rng);
    for (int i = 0; i < count; ++i)
      rules.push_back(edgeRule("p" + std::to_string(pick(rng)),
                               "p" + std::to_string(pick(rng)), false));
    RuleSetDecl rs;
    rs.name = "g";
    rs.rules = rules;
    RuleSetInfo info = classify(rs);

    std::set<std::string> mentioned;
    for (const Rule& r : rules) {
      mentioned.insert(r.head.pred.key());
      for (const RuleHyp& h : r.hyps) mentioned.insert(h.atom.pred.key());
    }
    std::set<std::string> base = info.basePreds();
    std::set<std::string> derived = info.derivedPreds();
    std::set<std::string> both;
    std::set_intersection(base.begin(), base.end(), derived.begin(),
                          derived.end(), std::inserter(both, both.begin()));
    CHECK(both.empty());
    std::set<std::string> all = base;
    all.insert(derived.begin(), derived.end());
    CHECK(all == mentioned);

    // dependency agrees with the independent fixpoint oracle on bases
    for (const std::string& d : derived) {
      std::set<std::string> viaInfo;
      for (const std::string& q : info.dependency.at(d))
        if (base.count(q)) viaInfo.insert(q);
      CHECK(viaInfo == reachableBases(rules, d));
    }
  }
}

TEST_CASE("slicing is monotone and sound on random rule graphs") {
  std::mt19937_64 rng(20240812);
  for (int trial = 0; trial < 200; ++trial) {
    std::uniform_int_distribution<int> npred(2, 6), nrule(1, 7);
    int preds = npred(rng);
    std::uniform_int_distribution<int> pick(0, preds - 1);
    std::vector<Rule> rules;
    int count = nrule(rng);
    for (int i = 0; i < count; ++i)
      rules.push_back(edgeRule("p" + std::to_string(pick(rng)),
                               "p" + std::to_string(pick(rng)), false));

    RuleSetDecl rs;
    rs.name = "g";
    rs.rules = rules;
    RuleSetInfo info = classify(rs);
    std::set<std::string> bases = info.basePreds();
    std::vector<std::string> base(bases.begin(), bases.end());

    std::set<std::string> known1, known2;
    std::uniform_int_distribution<int> coin(0, 2);
    for (const std::string& b : base) {
      int c = coin(rng);
      if (c >= 1) known2.insert(b);
      if (c == 2) known1.insert(b);
    }

    std::vector<std::string> s1 = ruleTexts(slice(rules, known1));
    std::vector<std::string> s2 = ruleTexts(slice(rules, known2));
    CHECK(std::includes(s2.begin(), s2.end(), s1.begin(), s1.end()));

    // soundness: kept conclusions reach no base predicate outside known
    for (const Rule& r : slice(rules, known1)) {
      std::set<std::string> reach = reachableBases(rules, r.head.pred.key());
      bool inside = std::includes(known1.begin(), known1.end(), reach.begin(),
                                  reach.end());
      CHECK(inside);
    }
  }
}

TEST_CASE("stratification matches brute-force negative-cycle detection") {
  std::mt19937_64 rng(20240813);
  int rejected = 0;
  for (int trial = 0; trial < 400; ++trial) {
    std::uniform_int_distribution<int> npred(1, 6), nrule(1, 8), coin(0, 3);
    int preds = npred(rng);
    std::uniform_int_distribution<int> pick(0, preds - 1);
    std::vector<Rule> rules;
    int count = nrule(rng);
    for (int i = 0; i < count; ++i)
      rules.push_back(edgeRule("p" + std::to_string(pick(rng)),
                               "p" + std::to_string(pick(rng)),
                               coin(rng) == 0));

    Stratification st = stratify(rules);
    bool cyclic = hasNegativeCycle(rules);
    CHECK(st.ok == !cyclic);
    if (!st.ok) {
      ++rejected;
      continue;
    }
    // the strata really are a stratification
    for (const Rule& r : rules) {
      int head = st.stratumOf(r.head.pred.key());
      for (const RuleHyp& h : r.hyps) {
        int hyp = st.stratumOf(h.atom.pred.key());
        CHECK(hyp <= head);
        if (h.negated) CHECK(hyp < head);
      }
    }
  }
  // the corpus must actually exercise both outcomes
  CHECK(rejected > 20);
  CHECK(rejected < 380);
}
