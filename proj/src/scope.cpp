#include "rli/scope.hpp"

#include "rli/pretty.hpp"

#include <map>
#include <set>
#include <string>
#include <vector>

namespace rli {

namespace {

struct ClassTable {
  std::map<std::string, const ClassDecl*> byName;
  std::set<std::string> defNames;    // procedure methods (statement position)
  std::set<std::string> defunNames;  // pure functions (expression position)

  bool knownClass(const std::string& n) const {
    return n == "set" || n == "sequence" || byName.count(n) > 0;
  }
};

ClassTable buildClassTable(const Program& p, Diagnostics& diags) {
  ClassTable t;
  for (const ClassDecl& c : p.classes) {
    if (!t.byName.emplace(c.name, &c).second)
      addDiag(diags, "E015", "class '" + c.name + "' defined more than once",
              c.loc);
    for (const MethodDecl& m : c.methods)
      (m.isFunction ? t.defunNames : t.defNames).insert(m.name);
  }
  for (const ClassDecl& c : p.classes) {
    if (!c.base.empty() && !t.byName.count(c.base))
      addDiag(diags, "E007", "unknown base class '" + c.base + "'", c.loc);
    // Walk the base chain to detect cycles.
    std::set<std::string> seen{c.name};
    const ClassDecl* cur = &c;
    while (!cur->base.empty()) {
      auto it = t.byName.find(cur->base);
      if (it == t.byName.end()) break;
      if (!seen.insert(it->first).second) {
        addDiag(diags, "E015", "inheritance cycle through '" + c.name + "'",
                c.loc);
        break;
      }
      cur = it->second;
    }
  }
  return t;
}

class Resolver {
public:
  Resolver(Diagnostics& diags, const ClassTable& classes)
      : diags_(diags), classes_(classes) {}

  StmtP stmt(const StmtP& s) {
    if (!s) return s;
    switch (s->kind) {
      case Stmt::Kind::Skip:
      case Stmt::Kind::Return:
        return s;
      case Stmt::Kind::Assign:
        return mkAssign(target(s->target), expr(s->rhs), s->loc);
      case Stmt::Kind::AssignNew: {
        if (!classes_.knownClass(s->className))
          addDiag(diags_, "E007", "unknown class '" + s->className + "'",
                  s->loc);
        return mkAssignNew(target(s->target), s->className, s->loc);
      }
      case Stmt::Kind::Compre: {
        ExprP tgt = target(s->target);
        push();
        std::vector<Iterator> its = iterators(s->iters);
        ExprP cond = expr(s->cond);
        ExprP result = expr(s->result);
        pop();
        return mkCompre(tgt, result, std::move(its), cond, s->loc);
      }
      case Stmt::Kind::MultiAssign: {
        if (s->targets.size() != s->rhsList.size())
          addDiag(diags_, "E009",
                  "assignment target/value counts differ", s->loc);
        auto out = std::make_shared<Stmt>(*s);
        for (ExprP& t : out->targets) t = target(t);
        for (ExprP& r : out->rhsList) r = expr(r);
        return out;
      }
      case Stmt::Kind::Seq:
        return mkSeq(stmt(s->a), stmt(s->b));
      case Stmt::Kind::If:
        return mkIf(expr(s->cond), stmt(s->a), stmt(s->b), s->loc);
      case Stmt::Kind::For: {
        push();
        std::vector<Iterator> its = iterators(s->iters);
        StmtP body = stmt(s->a);
        pop();
        return mkFor(std::move(its[0]), body, s->loc);
      }
      case Stmt::Kind::ForInTuple:
        return s;  // internal form, already resolved
      case Stmt::Kind::While:
        return mkWhile(expr(s->cond), stmt(s->a), s->loc);
      case Stmt::Kind::IfSome:
      case Stmt::Kind::WhileSome: {
        push();
        std::vector<Iterator> its = iterators(s->iters);
        ExprP cond = expr(s->cond);
        StmtP body = stmt(s->a);
        pop();
        return s->kind == Stmt::Kind::IfSome
                   ? mkIfSome(std::move(its), cond, body, s->loc)
                   : mkWhileSome(std::move(its), cond, body, s->loc);
      }
      case Stmt::Kind::Call: {
        std::vector<ExprP> args;
        for (const ExprP& a : s->args) args.push_back(expr(a));
        return mkCallStmt(expr(s->recv), s->method, std::move(args), s->loc);
      }
      case Stmt::Kind::Infer: {
        auto out = std::make_shared<Stmt>(*s);
        for (ExprP& t : out->targets) t = target(t);
        if (out->recv) out->recv = expr(out->recv);
        for (InferKwarg& kw : out->kwargs) kw.value = expr(kw.value);
        for (InferQuery& q : out->queries) {
          push();
          for (PatElem& el : q.pat) patElem(el);
          pop();
        }
        return out;
      }
    }
    return s;
  }

  ExprP expr(const ExprP& e) {
    if (!e) return e;
    switch (e->kind) {
      case Expr::Kind::Lit:
      case Expr::Kind::Param:
      case Expr::Kind::Global:
        return e;
      case Expr::Kind::Name:
        return name(e);
      case Expr::Kind::Field:
        return mkField(expr(e->obj), e->name, e->loc);
      case Expr::Kind::Tuple:
      case Expr::Kind::SetDisplay: {
        auto out = std::make_shared<Expr>(*e);
        for (ExprP& el : out->elems) el = expr(el);
        return out;
      }
      case Expr::Kind::Call: {
        auto out = std::make_shared<Expr>(*e);
        out->obj = expr(out->obj);
        for (ExprP& el : out->elems) el = expr(el);
        return out;
      }
      case Expr::Kind::Unary:
        return mkUnary(e->uop, expr(e->a), e->loc);
      case Expr::Kind::Binary:
        return mkBinary(e->bop, expr(e->a), expr(e->b), e->loc);
      case Expr::Kind::IsInstance: {
        if (!classes_.knownClass(e->name))
          addDiag(diags_, "E007", "unknown class '" + e->name + "'", e->loc);
        return mkIsInstance(expr(e->a), e->name, e->loc);
      }
      case Expr::Kind::And:
        return mkAnd(expr(e->a), expr(e->b), e->loc);
      case Expr::Kind::Or:
        return mkOr(expr(e->a), expr(e->b), e->loc);
      case Expr::Kind::In:
        return mkIn(expr(e->a), expr(e->b), e->loc);
      case Expr::Kind::Some:
      case Expr::Kind::Each: {
        push();
        std::vector<Iterator> its = iterators(e->iters);
        ExprP cond = expr(e->cond);
        pop();
        return e->kind == Expr::Kind::Some ? mkSome(std::move(its), cond, e->loc)
                                           : mkEach(std::move(its), cond, e->loc);
      }
      case Expr::Kind::Agg: {
        auto out = std::make_shared<Expr>(*e);
        out->a = expr(out->a);
        return out;
      }
      case Expr::Kind::CompreSrc: {
        auto out = std::make_shared<Expr>(*e);
        push();
        out->iters = iterators(out->iters);
        out->cond = expr(out->cond);
        out->b = expr(out->b);
        pop();
        return out;
      }
    }
    return e;
  }

  void ruleSet(RuleSetDecl& rs, bool classScope) {
    std::set<std::string> locals;
    for (const std::string& pn : rs.params) {
      if (pn == "self")
        addDiag(diags_, "E008", "'self' cannot be a rule set local", rs.loc);
      if (!locals.insert(pn).second)
        addDiag(diags_, "E015",
                "duplicate local predicate '" + pn + "' in rule set '" +
                    rs.name + "'",
                rs.loc);
    }
    auto fix = [&](RuleAtom& a) {
      switch (a.pred.kind) {
        case PredRef::Kind::Name:
          a.pred.kind = locals.count(a.pred.name) ? PredRef::Kind::Param
                                                  : PredRef::Kind::Global;
          break;
        case PredRef::Kind::SelfField:
          if (!classScope)
            addDiag(diags_, "E006",
                    "self-field predicate in a global rule set", a.loc);
          break;
        default:
          break;
      }
    };
    for (Rule& r : rs.rules) {
      fix(r.head);
      for (RuleHyp& h : r.hyps) fix(h.atom);
    }
  }

  void method(MethodDecl& m) {
    inMethod_ = true;
    methodParams_.clear();
    for (const std::string& pn : m.params) {
      if (pn == "self")
        addDiag(diags_, "E008", "'self' cannot be a parameter", m.loc);
      if (!methodParams_.insert(pn).second)
        addDiag(diags_, "E015", "duplicate parameter '" + pn + "'", m.loc);
    }
    if (m.isFunction)
      m.fnBody = expr(m.fnBody);
    else
      m.body = stmt(m.body);
    methodParams_.clear();
    inMethod_ = false;
  }

private:
  Diagnostics& diags_;
  const ClassTable& classes_;
  std::set<std::string> methodParams_;
  bool inMethod_ = false;
  // Iteration variables of enclosing constructs, one frame per iterator
  // group; used only to reject same-name nesting and body assignment.
  std::vector<std::vector<std::string>> activeVars_;

  void push() { activeVars_.emplace_back(); }
  void pop() { activeVars_.pop_back(); }

  bool isParamName(const std::string& n) const {
    return inMethod_ && (n == "self" || methodParams_.count(n) > 0);
  }

  ExprP name(const ExprP& e) {
    if (e->name == "self") {
      if (!inMethod_) {
        addDiag(diags_, "E007", "'self' used outside a method", e->loc);
        return mkGlobal(e->name, e->loc);
      }
      return mkParam("self", e->loc);
    }
    if (isParamName(e->name)) return mkParam(e->name, e->loc);
    return mkGlobal(e->name, e->loc);
  }

  // Resolves an iteration variable: an assignable variable (global or
  // object field); parameters are values after substitution and cannot be
  // iterated over. A repeat within the same iterator group is an equality
  // constraint (join); reusing an enclosing construct's variable is
  // rejected because the enclosing iteration rewrites occurrences of it
  // inside its body, including the inner binding position.
  ExprP bindVar(const ExprP& v) {
    if (!v) return v;
    ExprP r;
    if (v->kind == Expr::Kind::Name) {
      if (isParamName(v->name)) {
        addDiag(diags_, "E009",
                "iteration variable '" + v->name +
                    "' collides with a parameter",
                v->loc);
        return mkParam(v->name, v->loc);
      }
      r = mkGlobal(v->name, v->loc);
    } else if (v->kind == Expr::Kind::Field) {
      r = mkField(expr(v->obj), v->name, v->loc);
    } else if (v->kind == Expr::Kind::Global || v->kind == Expr::Kind::Param) {
      r = v;  // already resolved (desugared input)
    } else {
      addDiag(diags_, "E011",
              "iteration variable must be a variable or field",
              v ? v->loc : SrcLoc{});
      return v;
    }
    std::string key = prettyExpr(r);
    for (size_t i = 0; i + 1 < activeVars_.size(); ++i)
      for (const std::string& k : activeVars_[i])
        if (k == key) {
          addDiag(diags_, "E009",
                  "'" + key +
                      "' reuses the iteration variable of an enclosing "
                      "construct",
                  v->loc);
          return r;
        }
    if (!activeVars_.empty()) activeVars_.back().push_back(key);
    return r;
  }

  ExprP target(const ExprP& t) {
    if (!t) return t;
    ExprP r;
    if (t->kind == Expr::Kind::Name) {
      if (t->name == "self" || isParamName(t->name)) {
        addDiag(diags_, "E009",
                "cannot assign to parameter '" + t->name + "'", t->loc);
        return mkParam(t->name, t->loc);
      }
      r = mkGlobal(t->name, t->loc);
    } else if (t->kind == Expr::Kind::Field) {
      r = mkField(expr(t->obj), t->name, t->loc);
    } else if (t->kind == Expr::Kind::Global) {
      r = t;  // already resolved (desugared input)
    } else {
      addDiag(diags_, "E009", "assignment target must be a variable or field",
              t ? t->loc : SrcLoc{});
      return t;
    }
    std::string key = prettyExpr(r);
    for (const auto& frame : activeVars_)
      for (const std::string& k : frame)
        if (k == key) {
          addDiag(diags_, "E009",
                  "cannot assign to iteration variable '" + key + "'", t->loc);
          return r;
        }
    return r;
  }

  void patElem(PatElem& el) {
    switch (el.kind) {
      case PatElem::Kind::Bind:
        el.e = bindVar(el.e);
        break;
      case PatElem::Kind::Eq:
      case PatElem::Kind::Expr:
        el.e = expr(el.e);
        break;
      case PatElem::Kind::Wildcard:
        break;
    }
  }

  Pattern pattern(Pattern p) {
    if (!p.isTuple) {
      p.var = bindVar(p.var);
      return p;
    }
    for (PatElem& el : p.elems) patElem(el);
    return p;
  }

  std::vector<Iterator> iterators(const std::vector<Iterator>& its) {
    std::vector<Iterator> out;
    out.reserve(its.size());
    for (const Iterator& it : its) {
      Iterator r;
      r.src = expr(it.src);  // sees earlier iterators' variables
      r.pat = pattern(it.pat);
      out.push_back(std::move(r));
    }
    return out;
  }
};

// ---- well-formedness ----

struct RsLocalInfo {
  std::set<std::string> locals;
  std::set<std::string> derivedLocals;
};

RsLocalInfo localInfo(const RuleSetDecl& rs) {
  RsLocalInfo info;
  info.locals.insert(rs.params.begin(), rs.params.end());
  for (const Rule& r : rs.rules)
    if (r.head.pred.kind == PredRef::Kind::Param)
      info.derivedLocals.insert(r.head.pred.name);
  return info;
}

class Checker {
public:
  Checker(const Program& p, Diagnostics& diags) : prog_(p), diags_(diags) {
    for (const ClassDecl& c : p.classes) {
      classByName_[c.name] = &c;
      for (const MethodDecl& m : c.methods)
        (m.isFunction ? defunNames_ : defNames_).insert(m.name);
    }
  }

  void run() {
    std::map<std::string, std::string> globalDerived;  // pred -> rule set
    for (const RuleSetDecl& rs : prog_.rulesets) {
      checkRuleSet(rs);
      noteDerived(rs, globalDerived, nullptr);
    }
    for (const ClassDecl& c : prog_.classes) {
      std::map<std::string, std::string> selfDerived;
      for (const RuleSetDecl* rs : rulesetsOf(c)) {
        noteDerived(*rs, globalDerived, &selfDerived);
      }
      for (const RuleSetDecl& rs : c.rulesets) checkRuleSet(rs);
    }
    for (const RuleSetDecl& rs : prog_.rulesets) rsByName_[rs.name] = &rs;

    checkStmt(prog_.main);
    for (const ClassDecl& c : prog_.classes) {
      std::set<std::string> methodNames;
      for (const MethodDecl& m : c.methods) {
        if (!methodNames.insert(m.name).second)
          addDiag(diags_, "E015",
                  "method '" + m.name + "' defined more than once in class '" +
                      c.name + "'",
                  m.loc);
        if (m.isFunction)
          checkExpr(m.fnBody, false);
        else
          checkStmt(m.body);
      }
      std::set<std::string> rsNames;
      for (const RuleSetDecl& rs : c.rulesets)
        if (!rsNames.insert(rs.name).second)
          addDiag(diags_, "E015",
                  "rule set '" + rs.name + "' defined more than once in class '" +
                      c.name + "'",
                  rs.loc);
    }
    std::set<std::string> globalRsNames;
    for (const RuleSetDecl& rs : prog_.rulesets)
      if (!globalRsNames.insert(rs.name).second)
        addDiag(diags_, "E015",
                "rule set '" + rs.name + "' defined more than once", rs.loc);
  }

private:
  const Program& prog_;
  Diagnostics& diags_;
  std::map<std::string, const ClassDecl*> classByName_;
  std::map<std::string, const RuleSetDecl*> rsByName_;
  std::set<std::string> defNames_, defunNames_;

  // Own rule sets plus inherited ones, nearest class first.
  std::vector<const RuleSetDecl*> rulesetsOf(const ClassDecl& c) const {
    std::vector<const RuleSetDecl*> out;
    std::set<std::string> seen;
    const ClassDecl* cur = &c;
    while (cur && seen.insert(cur->name).second) {
      for (const RuleSetDecl& rs : cur->rulesets) out.push_back(&rs);
      auto it = cur->base.empty() ? classByName_.end()
                                  : classByName_.find(cur->base);
      cur = it == classByName_.end() ? nullptr : it->second;
    }
    return out;
  }

  void noteDerived(const RuleSetDecl& rs,
                   std::map<std::string, std::string>& globalDerived,
                   std::map<std::string, std::string>* selfDerived) {
    std::set<std::string> reported;
    for (const Rule& r : rs.rules) {
      const PredRef& p = r.head.pred;
      if (p.kind == PredRef::Kind::Global) {
        auto it = globalDerived.find(p.name);
        if (it != globalDerived.end() && it->second != rs.name &&
            reported.insert(p.name).second)
          addDiag(diags_, "E005",
                  "'" + p.name + "' is derived in rule sets '" + it->second +
                      "' and '" + rs.name + "'",
                  r.loc);
        globalDerived.emplace(p.name, rs.name);
      } else if (p.kind == PredRef::Kind::SelfField && selfDerived) {
        auto it = selfDerived->find(p.name);
        if (it != selfDerived->end() && it->second != rs.name &&
            reported.insert(p.name).second)
          addDiag(diags_, "E005",
                  "'self." + p.name + "' is derived in rule sets '" +
                      it->second + "' and '" + rs.name + "'",
                  r.loc);
        selfDerived->emplace(p.name, rs.name);
      }
    }
  }

  void checkRuleSet(const RuleSetDecl& rs) {
    std::map<std::string, size_t> arity;
    for (const Rule& r : rs.rules) {
      auto checkArity = [&](const RuleAtom& a) {
        auto [it, fresh] = arity.emplace(a.pred.key(), a.args.size());
        if (!fresh && it->second != a.args.size())
          addDiag(diags_, "E004",
                  "predicate '" + a.pred.name + "' used with arities " +
                      std::to_string(it->second) + " and " +
                      std::to_string(a.args.size()),
                  a.loc);
      };
      checkArity(r.head);
      for (const RuleHyp& h : r.hyps) checkArity(h.atom);

      if (r.hyps.empty()) {
        for (const RuleArg& a : r.head.args)
          if (a.isVar)
            addDiag(diags_, "E003",
                    "fact rule argument '" + a.var + "' is not a constant",
                    a.loc);
        continue;
      }
      std::set<std::string> positive;
      for (const RuleHyp& h : r.hyps)
        if (!h.negated)
          for (const RuleArg& a : h.atom.args)
            if (a.isVar) positive.insert(a.var);
      for (const RuleArg& a : r.head.args)
        if (a.isVar && !positive.count(a.var))
          addDiag(diags_, "E002",
                  "unsafe rule: '" + a.var +
                      "' does not appear in a positive hypothesis",
                  a.loc);
      std::set<std::string> boundSoFar;
      for (const RuleHyp& h : r.hyps) {
        if (h.negated) {
          for (const RuleArg& a : h.atom.args)
            if (a.isVar && !boundSoFar.count(a.var))
              addDiag(diags_, "E012",
                      "unsafe negation: '" + a.var +
                          "' is not bound by an earlier positive hypothesis",
                      a.loc);
        } else {
          for (const RuleArg& a : h.atom.args)
            if (a.isVar) boundSoFar.insert(a.var);
        }
      }
    }
  }

  void checkInfer(const Stmt& s) {
    std::vector<const RuleSetDecl*> candidates;
    if (!s.recv) {
      auto it = rsByName_.find(s.ruleset);
      if (it != rsByName_.end()) candidates.push_back(it->second);
    } else {
      for (const ClassDecl& c : prog_.classes)
        for (const RuleSetDecl& rs : c.rulesets)
          if (rs.name == s.ruleset) candidates.push_back(&rs);
    }
    if (candidates.empty()) {
      addDiag(diags_, "E014", "unknown rule set '" + s.ruleset + "'", s.loc);
      return;
    }
    if (!s.targets.empty() && s.targets.size() != s.queries.size())
      addDiag(diags_, "E014",
              "infer has " + std::to_string(s.queries.size()) +
                  " queries but " + std::to_string(s.targets.size()) +
                  " targets",
              s.loc);
    if (s.targets.empty() && !s.queries.empty())
      addDiag(diags_, "E014", "infer queries require assignment targets",
              s.loc);
    // With a dynamic receiver any class rule set of the name may apply;
    // accept a reference that is valid for at least one candidate.
    for (const InferKwarg& kw : s.kwargs) {
      bool ok = false;
      for (const RuleSetDecl* rs : candidates) {
        RsLocalInfo info = localInfo(*rs);
        if (info.locals.count(kw.pred) && !info.derivedLocals.count(kw.pred))
          ok = true;
      }
      if (!ok)
        addDiag(diags_, "E014",
                "'" + kw.pred + "' is not a base predicate local to '" +
                    s.ruleset + "'",
                s.loc);
    }
    for (const InferQuery& q : s.queries) {
      bool ok = false;
      for (const RuleSetDecl* rs : candidates) {
        RsLocalInfo info = localInfo(*rs);
        if (info.derivedLocals.count(q.pred)) ok = true;
      }
      if (!ok)
        addDiag(diags_, "E014",
                "'" + q.pred + "' is not a derived predicate local to '" +
                    s.ruleset + "'",
                q.loc);
    }
  }

  void checkCallPosition(const std::string& name, bool exprPosition,
                         SrcLoc loc) {
    static const std::set<std::string> mutators = {"add", "del"};
    static const std::set<std::string> pureBuiltins = {"contains", "any",
                                                       "size", "length"};
    if (exprPosition) {
      if (mutators.count(name) ||
          (defNames_.count(name) && !defunNames_.count(name)))
        addDiag(diags_, "E009",
                "'" + name + "' mutates and cannot appear in an expression",
                loc);
    } else {
      if (pureBuiltins.count(name) ||
          (defunNames_.count(name) && !defNames_.count(name)))
        addDiag(diags_, "E009",
                "'" + name + "' is pure and cannot be a statement", loc);
    }
  }

  // `allowForms` permits an aggregate or set display at this node (the full
  // right-hand side of an assignment only).
  void checkExpr(const ExprP& e, bool allowForms) {
    if (!e) return;
    switch (e->kind) {
      case Expr::Kind::Lit:
      case Expr::Kind::Name:
      case Expr::Kind::Param:
      case Expr::Kind::Global:
        return;
      case Expr::Kind::Field:
        checkExpr(e->obj, false);
        return;
      case Expr::Kind::Tuple:
        for (const ExprP& el : e->elems) checkExpr(el, false);
        return;
      case Expr::Kind::Call:
        checkCallPosition(e->name, true, e->loc);
        checkExpr(e->obj, false);
        for (const ExprP& el : e->elems) checkExpr(el, false);
        return;
      case Expr::Kind::Unary:
        checkExpr(e->a, false);
        return;
      case Expr::Kind::Binary:
        checkExpr(e->a, false);
        checkExpr(e->b, false);
        return;
      case Expr::Kind::IsInstance:
        checkExpr(e->a, false);
        return;
      case Expr::Kind::And:
      case Expr::Kind::Or:
      case Expr::Kind::In:
        checkExpr(e->a, false);
        checkExpr(e->b, false);
        return;
      case Expr::Kind::Some:
      case Expr::Kind::Each:
        for (const Iterator& it : e->iters) checkIterator(it);
        checkExpr(e->cond, false);
        return;
      case Expr::Kind::Agg:
        if (!allowForms) {
          addDiag(diags_, "E009",
                  "aggregate is only allowed as a full assignment source",
                  e->loc);
        }
        if (e->a && e->a->kind == Expr::Kind::CompreSrc) {
          for (const Iterator& it : e->a->iters) checkIterator(it);
          checkExpr(e->a->cond, false);
          checkExpr(e->a->b, false);
        } else {
          checkExpr(e->a, false);
        }
        return;
      case Expr::Kind::SetDisplay:
        if (!allowForms)
          addDiag(diags_, "E009",
                  "set display is only allowed as a full assignment source",
                  e->loc);
        for (const ExprP& el : e->elems) checkExpr(el, false);
        return;
      case Expr::Kind::CompreSrc:
        addDiag(diags_, "E009", "comprehension in an illegal position", e->loc);
        return;
    }
  }

  void checkPatElem(const PatElem& el) {
    if (el.kind == PatElem::Kind::Eq || el.kind == PatElem::Kind::Expr)
      checkExpr(el.e, false);
  }

  void checkIterator(const Iterator& it) {
    checkExpr(it.src, false);
    if (it.pat.isTuple)
      for (const PatElem& el : it.pat.elems) checkPatElem(el);
  }

  void checkStmt(const StmtP& s) {
    if (!s) return;
    switch (s->kind) {
      case Stmt::Kind::Skip:
      case Stmt::Kind::Return:
      case Stmt::Kind::ForInTuple:
        return;
      case Stmt::Kind::Assign:
        checkExpr(s->target, false);
        checkExpr(s->rhs, true);
        return;
      case Stmt::Kind::AssignNew:
        checkExpr(s->target, false);
        return;
      case Stmt::Kind::Compre:
        checkExpr(s->target, false);
        for (const Iterator& it : s->iters) checkIterator(it);
        checkExpr(s->cond, false);
        checkExpr(s->result, false);
        return;
      case Stmt::Kind::MultiAssign:
        for (const ExprP& t : s->targets) checkExpr(t, false);
        for (const ExprP& r : s->rhsList) checkExpr(r, false);
        return;
      case Stmt::Kind::Seq:
        checkStmt(s->a);
        checkStmt(s->b);
        return;
      case Stmt::Kind::If:
        checkExpr(s->cond, false);
        checkStmt(s->a);
        checkStmt(s->b);
        return;
      case Stmt::Kind::For:
        for (const Iterator& it : s->iters) checkIterator(it);
        checkStmt(s->a);
        return;
      case Stmt::Kind::While:
        checkExpr(s->cond, false);
        checkStmt(s->a);
        return;
      case Stmt::Kind::IfSome:
      case Stmt::Kind::WhileSome:
        for (const Iterator& it : s->iters) checkIterator(it);
        checkExpr(s->cond, false);
        checkStmt(s->a);
        return;
      case Stmt::Kind::Call:
        checkCallPosition(s->method, false, s->loc);
        checkExpr(s->recv, false);
        for (const ExprP& a : s->args) checkExpr(a, false);
        return;
      case Stmt::Kind::Infer:
        for (const ExprP& t : s->targets) checkExpr(t, false);
        checkExpr(s->recv, false);
        for (const InferKwarg& kw : s->kwargs) checkExpr(kw.value, false);
        for (const InferQuery& q : s->queries)
          for (const PatElem& el : q.pat) checkPatElem(el);
        checkInfer(*s);
        return;
    }
  }
};

}  // namespace

void resolveProgram(Program& p, Diagnostics& diags) {
  ClassTable classes = buildClassTable(p, diags);
  Resolver r(diags, classes);
  for (RuleSetDecl& rs : p.rulesets) r.ruleSet(rs, false);
  for (ClassDecl& c : p.classes) {
    for (RuleSetDecl& rs : c.rulesets) r.ruleSet(rs, true);
    for (MethodDecl& m : c.methods) r.method(m);
  }
  p.main = r.stmt(p.main);
}

void checkWellFormed(const Program& p, Diagnostics& diags) {
  Checker(p, diags).run();
}

}  // namespace rli
