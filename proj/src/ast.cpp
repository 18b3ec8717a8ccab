#include "rli/ast.hpp"

namespace rli {

namespace {
std::shared_ptr<Expr> newExpr(Expr::Kind k, SrcLoc loc) {
  auto e = std::make_shared<Expr>();
  e->kind = k;
  e->loc = loc;
  return e;
}
std::shared_ptr<Stmt> newStmt(Stmt::Kind k, SrcLoc loc) {
  auto s = std::make_shared<Stmt>();
  s->kind = k;
  s->loc = loc;
  return s;
}
}  // namespace

ExprP mkLit(Value v, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Lit, loc);
  e->lit = std::move(v);
  return e;
}
ExprP mkName(std::string n, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Name, loc);
  e->name = std::move(n);
  return e;
}
ExprP mkParam(std::string n, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Param, loc);
  e->name = std::move(n);
  return e;
}
ExprP mkGlobal(std::string n, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Global, loc);
  e->name = std::move(n);
  return e;
}
ExprP mkField(ExprP obj, std::string f, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Field, loc);
  e->obj = std::move(obj);
  e->name = std::move(f);
  return e;
}
ExprP mkTuple(std::vector<ExprP> elems, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Tuple, loc);
  e->elems = std::move(elems);
  return e;
}
ExprP mkCall(ExprP recv, std::string m, std::vector<ExprP> args, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Call, loc);
  e->obj = std::move(recv);
  e->name = std::move(m);
  e->elems = std::move(args);
  return e;
}
ExprP mkUnary(UnaryOp op, ExprP a, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Unary, loc);
  e->uop = op;
  e->a = std::move(a);
  return e;
}
ExprP mkBinary(BinaryOp op, ExprP a, ExprP b, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Binary, loc);
  e->bop = op;
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}
ExprP mkIsInstance(ExprP a, std::string cls, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::IsInstance, loc);
  e->a = std::move(a);
  e->name = std::move(cls);
  return e;
}
ExprP mkAnd(ExprP a, ExprP b, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::And, loc);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}
ExprP mkOr(ExprP a, ExprP b, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Or, loc);
  e->a = std::move(a);
  e->b = std::move(b);
  return e;
}
ExprP mkSome(std::vector<Iterator> its, ExprP cond, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Some, loc);
  e->iters = std::move(its);
  e->cond = std::move(cond);
  return e;
}
ExprP mkEach(std::vector<Iterator> its, ExprP cond, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::Each, loc);
  e->iters = std::move(its);
  e->cond = std::move(cond);
  return e;
}
ExprP mkIn(ExprP elem, ExprP coll, SrcLoc loc) {
  auto e = newExpr(Expr::Kind::In, loc);
  e->a = std::move(elem);
  e->b = std::move(coll);
  return e;
}
ExprP mkGlobalsField(const std::string& name, SrcLoc loc) {
  return mkField(mkLit(Value::address(kGlobalsAddr), loc), name, loc);
}

StmtP mkSkip(SrcLoc loc) { return newStmt(Stmt::Kind::Skip, loc); }
StmtP mkAssign(ExprP target, ExprP rhs, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::Assign, loc);
  s->target = std::move(target);
  s->rhs = std::move(rhs);
  return s;
}
StmtP mkAssignNew(ExprP target, std::string cls, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::AssignNew, loc);
  s->target = std::move(target);
  s->className = std::move(cls);
  return s;
}
StmtP mkCompre(ExprP target, ExprP result, std::vector<Iterator> its, ExprP cond,
               SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::Compre, loc);
  s->target = std::move(target);
  s->result = std::move(result);
  s->iters = std::move(its);
  s->cond = std::move(cond);
  return s;
}
StmtP mkSeq(StmtP a, StmtP b) {
  auto s = newStmt(Stmt::Kind::Seq, a ? a->loc : SrcLoc{});
  s->a = std::move(a);
  s->b = std::move(b);
  return s;
}
StmtP mkBlock(std::vector<StmtP> stmts, SrcLoc loc) {
  if (stmts.empty()) return mkSkip(loc);
  StmtP out = stmts.back();
  for (size_t i = stmts.size() - 1; i-- > 0;) out = mkSeq(stmts[i], out);
  return out;
}
StmtP mkIf(ExprP cond, StmtP thenS, StmtP elseS, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::If, loc);
  s->cond = std::move(cond);
  s->a = std::move(thenS);
  s->b = std::move(elseS);
  return s;
}
StmtP mkFor(Iterator it, StmtP body, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::For, loc);
  s->iters = {std::move(it)};
  s->a = std::move(body);
  return s;
}
StmtP mkForInTuple(ExprP var, std::shared_ptr<const std::vector<Value>> values,
                   size_t offset, StmtP body, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::ForInTuple, loc);
  s->target = std::move(var);
  s->values = std::move(values);
  s->offset = offset;
  s->a = std::move(body);
  return s;
}
StmtP mkWhile(ExprP cond, StmtP body, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::While, loc);
  s->cond = std::move(cond);
  s->a = std::move(body);
  return s;
}
StmtP mkIfSome(std::vector<Iterator> its, ExprP cond, StmtP body, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::IfSome, loc);
  s->iters = std::move(its);
  s->cond = std::move(cond);
  s->a = std::move(body);
  return s;
}
StmtP mkWhileSome(std::vector<Iterator> its, ExprP cond, StmtP body, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::WhileSome, loc);
  s->iters = std::move(its);
  s->cond = std::move(cond);
  s->a = std::move(body);
  return s;
}
StmtP mkCallStmt(ExprP recv, std::string m, std::vector<ExprP> args, SrcLoc loc) {
  auto s = newStmt(Stmt::Kind::Call, loc);
  s->recv = std::move(recv);
  s->method = std::move(m);
  s->args = std::move(args);
  return s;
}
StmtP mkReturn(SrcLoc loc) { return newStmt(Stmt::Kind::Return, loc); }

std::string PredRef::key() const {
  switch (kind) {
    case Kind::Name:
      return name;
    case Kind::Param:
      return "%" + name;
    case Kind::SelfField:
      return "self." + name;
    case Kind::Global:
      return "g:" + name;
    case Kind::Field:
      return "@" + std::to_string(addr) + "." + name;
  }
  return name;
}

namespace {

bool equalPattern(const Pattern& a, const Pattern& b);

bool equalIters(const std::vector<Iterator>& a, const std::vector<Iterator>& b) {
  if (a.size() != b.size()) return false;
  for (size_t i = 0; i < a.size(); ++i) {
    if (!equalPattern(a[i].pat, b[i].pat)) return false;
    if (!equalExpr(a[i].src, b[i].src)) return false;
  }
  return true;
}

bool equalPattern(const Pattern& a, const Pattern& b) {
  if (a.isTuple != b.isTuple) return false;
  if (!a.isTuple) return equalExpr(a.var, b.var);
  if (a.elems.size() != b.elems.size()) return false;
  for (size_t i = 0; i < a.elems.size(); ++i) {
    if (a.elems[i].kind != b.elems[i].kind) return false;
    if (!equalExpr(a.elems[i].e, b.elems[i].e)) return false;
  }
  return true;
}

}  // namespace

bool equalExpr(const ExprP& a, const ExprP& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Expr::Kind::Lit:
      return a->lit == b->lit;
    case Expr::Kind::Name:
    case Expr::Kind::Param:
    case Expr::Kind::Global:
      return a->name == b->name;
    case Expr::Kind::Field:
      return a->name == b->name && equalExpr(a->obj, b->obj);
    case Expr::Kind::Tuple:
    case Expr::Kind::SetDisplay: {
      if (a->elems.size() != b->elems.size()) return false;
      for (size_t i = 0; i < a->elems.size(); ++i)
        if (!equalExpr(a->elems[i], b->elems[i])) return false;
      return true;
    }
    case Expr::Kind::Call: {
      if (a->name != b->name || !equalExpr(a->obj, b->obj)) return false;
      if (a->elems.size() != b->elems.size()) return false;
      for (size_t i = 0; i < a->elems.size(); ++i)
        if (!equalExpr(a->elems[i], b->elems[i])) return false;
      return true;
    }
    case Expr::Kind::Unary:
      return a->uop == b->uop && equalExpr(a->a, b->a);
    case Expr::Kind::Binary:
      return a->bop == b->bop && equalExpr(a->a, b->a) && equalExpr(a->b, b->b);
    case Expr::Kind::IsInstance:
      return a->name == b->name && equalExpr(a->a, b->a);
    case Expr::Kind::And:
    case Expr::Kind::Or:
    case Expr::Kind::In:
      return equalExpr(a->a, b->a) && equalExpr(a->b, b->b);
    case Expr::Kind::Some:
    case Expr::Kind::Each:
      return equalIters(a->iters, b->iters) && equalExpr(a->cond, b->cond);
    case Expr::Kind::Agg:
      return a->agg == b->agg && equalExpr(a->a, b->a) && equalExpr(a->b, b->b) &&
             equalIters(a->iters, b->iters) && equalExpr(a->cond, b->cond);
    case Expr::Kind::CompreSrc:
      return equalExpr(a->b, b->b) && equalIters(a->iters, b->iters) &&
             equalExpr(a->cond, b->cond);
  }
  return false;
}

bool equalStmt(const StmtP& a, const StmtP& b) {
  if (!a || !b) return !a && !b;
  if (a->kind != b->kind) return false;
  switch (a->kind) {
    case Stmt::Kind::Skip:
    case Stmt::Kind::Return:
      return true;
    case Stmt::Kind::Assign:
      return equalExpr(a->target, b->target) && equalExpr(a->rhs, b->rhs);
    case Stmt::Kind::AssignNew:
      return equalExpr(a->target, b->target) && a->className == b->className;
    case Stmt::Kind::Compre:
      return equalExpr(a->target, b->target) && equalExpr(a->result, b->result) &&
             equalIters(a->iters, b->iters) && equalExpr(a->cond, b->cond);
    case Stmt::Kind::MultiAssign: {
      if (a->targets.size() != b->targets.size()) return false;
      for (size_t i = 0; i < a->targets.size(); ++i)
        if (!equalExpr(a->targets[i], b->targets[i])) return false;
      if (a->rhsList.size() != b->rhsList.size()) return false;
      for (size_t i = 0; i < a->rhsList.size(); ++i)
        if (!equalExpr(a->rhsList[i], b->rhsList[i])) return false;
      return true;
    }
    case Stmt::Kind::Seq:
      return equalStmt(a->a, b->a) && equalStmt(a->b, b->b);
    case Stmt::Kind::If:
      return equalExpr(a->cond, b->cond) && equalStmt(a->a, b->a) &&
             equalStmt(a->b, b->b);
    case Stmt::Kind::For:
      return equalIters(a->iters, b->iters) && equalStmt(a->a, b->a);
    case Stmt::Kind::ForInTuple:
      return false;  // internal form; not compared structurally
    case Stmt::Kind::While:
      return equalExpr(a->cond, b->cond) && equalStmt(a->a, b->a);
    case Stmt::Kind::IfSome:
    case Stmt::Kind::WhileSome:
      return equalIters(a->iters, b->iters) && equalExpr(a->cond, b->cond) &&
             equalStmt(a->a, b->a);
    case Stmt::Kind::Call: {
      if (!equalExpr(a->recv, b->recv) || a->method != b->method) return false;
      if (a->args.size() != b->args.size()) return false;
      for (size_t i = 0; i < a->args.size(); ++i)
        if (!equalExpr(a->args[i], b->args[i])) return false;
      return true;
    }
    case Stmt::Kind::Infer: {
      if (a->targets.size() != b->targets.size()) return false;
      for (size_t i = 0; i < a->targets.size(); ++i)
        if (!equalExpr(a->targets[i], b->targets[i])) return false;
      if (!equalExpr(a->recv, b->recv) || a->ruleset != b->ruleset) return false;
      if (a->queries.size() != b->queries.size()) return false;
      for (size_t i = 0; i < a->queries.size(); ++i) {
        const auto& qa = a->queries[i];
        const auto& qb = b->queries[i];
        if (qa.pred != qb.pred || qa.hasPattern != qb.hasPattern) return false;
        if (qa.pat.size() != qb.pat.size()) return false;
        for (size_t j = 0; j < qa.pat.size(); ++j) {
          if (qa.pat[j].kind != qb.pat[j].kind) return false;
          if (!equalExpr(qa.pat[j].e, qb.pat[j].e)) return false;
        }
      }
      if (a->kwargs.size() != b->kwargs.size()) return false;
      for (size_t i = 0; i < a->kwargs.size(); ++i) {
        if (a->kwargs[i].pred != b->kwargs[i].pred) return false;
        if (!equalExpr(a->kwargs[i].value, b->kwargs[i].value)) return false;
      }
      return true;
    }
  }
  return false;
}

namespace {

bool equalRule(const Rule& a, const Rule& b) {
  auto equalAtom = [](const RuleAtom& x, const RuleAtom& y) {
    if (!(x.pred == y.pred) || x.args.size() != y.args.size()) return false;
    for (size_t i = 0; i < x.args.size(); ++i) {
      if (x.args[i].isVar != y.args[i].isVar) return false;
      if (x.args[i].isVar ? x.args[i].var != y.args[i].var
                          : x.args[i].lit != y.args[i].lit)
        return false;
    }
    return true;
  };
  if (!equalAtom(a.head, b.head) || a.hyps.size() != b.hyps.size()) return false;
  for (size_t i = 0; i < a.hyps.size(); ++i) {
    if (a.hyps[i].negated != b.hyps[i].negated) return false;
    if (!equalAtom(a.hyps[i].atom, b.hyps[i].atom)) return false;
  }
  return true;
}

bool equalRuleSet(const RuleSetDecl& a, const RuleSetDecl& b) {
  if (a.name != b.name || a.params != b.params) return false;
  if (a.rules.size() != b.rules.size()) return false;
  for (size_t i = 0; i < a.rules.size(); ++i)
    if (!equalRule(a.rules[i], b.rules[i])) return false;
  return true;
}

}  // namespace

bool equalProgram(const Program& a, const Program& b) {
  if (a.rulesets.size() != b.rulesets.size()) return false;
  for (size_t i = 0; i < a.rulesets.size(); ++i)
    if (!equalRuleSet(a.rulesets[i], b.rulesets[i])) return false;
  if (a.classes.size() != b.classes.size()) return false;
  for (size_t i = 0; i < a.classes.size(); ++i) {
    const auto& x = a.classes[i];
    const auto& y = b.classes[i];
    if (x.name != y.name || x.base != y.base) return false;
    if (x.rulesets.size() != y.rulesets.size()) return false;
    for (size_t j = 0; j < x.rulesets.size(); ++j)
      if (!equalRuleSet(x.rulesets[j], y.rulesets[j])) return false;
    if (x.methods.size() != y.methods.size()) return false;
    for (size_t j = 0; j < x.methods.size(); ++j) {
      const auto& m = x.methods[j];
      const auto& n = y.methods[j];
      if (m.isFunction != n.isFunction || m.name != n.name || m.params != n.params)
        return false;
      if (m.isFunction ? !equalExpr(m.fnBody, n.fnBody) : !equalStmt(m.body, n.body))
        return false;
    }
  }
  return equalStmt(a.main, b.main);
}

}  // namespace rli
