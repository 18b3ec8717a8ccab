#include "rli/desugar.hpp"

#include <functional>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rli/pretty.hpp"

namespace rli {

namespace {

using ExprFn = std::function<ExprP(const ExprP&)>;
using StmtFn = std::function<StmtP(const StmtP&)>;

// ---------------------------------------------------------------- helpers

ExprP litTrue(SrcLoc loc = {}) { return mkLit(Value::boolean(true), loc); }
ExprP litInt(int64_t i, SrcLoc loc = {}) {
  return mkLit(Value::integer(i), loc);
}

bool isTrueLit(const ExprP& e) {
  return e && e->kind == Expr::Kind::Lit && e->lit.isBool() && e->lit.asBool();
}

// Conjunction in core form. 'and' is gone after the bool pass, and both
// conjuncts are side-effect free, so not(not a or not b) evaluates a first
// exactly like the short-circuit surface form.
ExprP coreAnd(ExprP a, ExprP b) {
  if (!a || isTrueLit(a)) return b ? b : litTrue();
  if (!b || isTrueLit(b)) return a;
  SrcLoc loc = a->loc;
  return mkUnary(
      UnaryOp::Not,
      mkOr(mkUnary(UnaryOp::Not, a, loc), mkUnary(UnaryOp::Not, b, loc), loc),
      loc);
}

// Stable identity of a variable expression, used for join detection and
// substitution maps.
std::string keyOf(const ExprP& e) { return prettyExpr(e); }

Pattern varPattern(ExprP v, SrcLoc loc = {}) {
  Pattern p;
  p.isTuple = false;
  p.var = std::move(v);
  p.loc = p.var ? p.var->loc : loc;
  return p;
}

PatElem bindElem(ExprP v) {
  PatElem el;
  el.kind = PatElem::Kind::Bind;
  el.e = std::move(v);
  return el;
}

ExprP selectOf(const ExprP& x, size_t i, SrcLoc loc) {
  return mkBinary(BinaryOp::Select, x, litInt(static_cast<int64_t>(i)), loc);
}

// --------------------------------------------- generic structural rewriting

ExprP mapExpr(const ExprP& e, const ExprFn& fn);

Pattern mapPattern(const Pattern& p, const ExprFn& fn) {
  Pattern out = p;
  if (!p.isTuple) {
    out.var = mapExpr(p.var, fn);
    return out;
  }
  for (PatElem& el : out.elems)
    if (el.e) el.e = mapExpr(el.e, fn);
  return out;
}

std::vector<Iterator> mapIterators(const std::vector<Iterator>& its,
                                   const ExprFn& fn) {
  std::vector<Iterator> out;
  out.reserve(its.size());
  for (const Iterator& it : its) {
    Iterator r;
    r.src = mapExpr(it.src, fn);
    r.pat = mapPattern(it.pat, fn);
    out.push_back(std::move(r));
  }
  return out;
}

// Copy of e with rec applied to each direct child expression.
ExprP rebuildExpr(const ExprP& e, const ExprFn& rec) {
  auto out = std::make_shared<Expr>(*e);
  switch (e->kind) {
    case Expr::Kind::Lit:
    case Expr::Kind::Name:
    case Expr::Kind::Param:
    case Expr::Kind::Global:
      break;
    case Expr::Kind::Field:
      out->obj = rec(e->obj);
      break;
    case Expr::Kind::Tuple:
    case Expr::Kind::SetDisplay:
      for (ExprP& el : out->elems) el = rec(el);
      break;
    case Expr::Kind::Call:
      out->obj = rec(e->obj);
      for (ExprP& el : out->elems) el = rec(el);
      break;
    case Expr::Kind::Unary:
    case Expr::Kind::IsInstance:
      out->a = rec(e->a);
      break;
    case Expr::Kind::Binary:
    case Expr::Kind::And:
    case Expr::Kind::Or:
    case Expr::Kind::In:
      out->a = rec(e->a);
      out->b = rec(e->b);
      break;
    case Expr::Kind::Some:
    case Expr::Kind::Each: {
      std::vector<Iterator> its;
      for (const Iterator& it : e->iters) {
        Iterator r;
        r.src = rec(it.src);
        Pattern p = it.pat;
        if (!p.isTuple) {
          p.var = rec(p.var);
        } else {
          for (PatElem& el : p.elems)
            if (el.e) el.e = rec(el.e);
        }
        r.pat = std::move(p);
        its.push_back(std::move(r));
      }
      out->iters = std::move(its);
      if (out->cond) out->cond = rec(e->cond);
      break;
    }
    case Expr::Kind::Agg:
      out->a = rec(e->a);
      break;
    case Expr::Kind::CompreSrc: {
      std::vector<Iterator> its;
      for (const Iterator& it : e->iters) {
        Iterator r;
        r.src = rec(it.src);
        Pattern p = it.pat;
        if (!p.isTuple) {
          p.var = rec(p.var);
        } else {
          for (PatElem& el : p.elems)
            if (el.e) el.e = rec(el.e);
        }
        r.pat = std::move(p);
        its.push_back(std::move(r));
      }
      out->iters = std::move(its);
      if (out->cond) out->cond = rec(e->cond);
      out->b = rec(e->b);
      break;
    }
  }
  return out;
}

// Post-order: children first, then fn on the rebuilt node.
ExprP mapExpr(const ExprP& e, const ExprFn& fn) {
  if (!e) return e;
  return fn(rebuildExpr(e, [&fn](const ExprP& c) { return mapExpr(c, fn); }));
}

StmtP mapStmt(const StmtP& s, const ExprFn& efn, const StmtFn& sfn);

// Copy of s with efn mapped over contained expressions (post-order) and
// substatements rewritten recursively; sfn applied to the result.
StmtP rebuildStmt(const StmtP& s, const ExprFn& efn, const StmtFn& sfn) {
  auto out = std::make_shared<Stmt>(*s);
  auto ex = [&efn](const ExprP& e) { return mapExpr(e, efn); };
  switch (s->kind) {
    case Stmt::Kind::Skip:
    case Stmt::Kind::Return:
      break;
    case Stmt::Kind::Assign:
      out->target = ex(s->target);
      out->rhs = ex(s->rhs);
      break;
    case Stmt::Kind::AssignNew:
      out->target = ex(s->target);
      break;
    case Stmt::Kind::Compre:
      out->target = ex(s->target);
      out->result = ex(s->result);
      out->iters = mapIterators(s->iters, efn);
      out->cond = ex(s->cond);
      break;
    case Stmt::Kind::MultiAssign:
      for (ExprP& t : out->targets) t = ex(t);
      for (ExprP& r : out->rhsList) r = ex(r);
      break;
    case Stmt::Kind::Seq:
      out->a = mapStmt(s->a, efn, sfn);
      out->b = mapStmt(s->b, efn, sfn);
      break;
    case Stmt::Kind::If:
      out->cond = ex(s->cond);
      out->a = mapStmt(s->a, efn, sfn);
      out->b = mapStmt(s->b, efn, sfn);
      break;
    case Stmt::Kind::For:
      out->iters = mapIterators(s->iters, efn);
      out->a = mapStmt(s->a, efn, sfn);
      break;
    case Stmt::Kind::ForInTuple:
      out->target = ex(s->target);
      out->a = mapStmt(s->a, efn, sfn);
      break;
    case Stmt::Kind::While:
      out->cond = ex(s->cond);
      out->a = mapStmt(s->a, efn, sfn);
      break;
    case Stmt::Kind::IfSome:
    case Stmt::Kind::WhileSome:
      out->iters = mapIterators(s->iters, efn);
      out->cond = ex(s->cond);
      out->a = mapStmt(s->a, efn, sfn);
      break;
    case Stmt::Kind::Call:
      out->recv = ex(s->recv);
      for (ExprP& a : out->args) a = ex(a);
      break;
    case Stmt::Kind::Infer:
      for (ExprP& t : out->targets) t = ex(t);
      out->recv = ex(s->recv);
      for (InferKwarg& kw : out->kwargs) kw.value = ex(kw.value);
      for (InferQuery& q : out->queries)
        for (PatElem& el : q.pat)
          if (el.e) el.e = ex(el.e);
      break;
  }
  return out;
}

StmtP mapStmt(const StmtP& s, const ExprFn& efn, const StmtFn& sfn) {
  if (!s) return s;
  StmtP out = rebuildStmt(s, efn, sfn);
  return sfn ? sfn(out) : out;
}

Program mapProgram(const Program& p, const ExprFn& efn, const StmtFn& sfn) {
  Program out = p;
  out.main = mapStmt(p.main, efn, sfn);
  for (ClassDecl& c : out.classes)
    for (MethodDecl& m : c.methods) {
      if (m.isFunction)
        m.fnBody = mapExpr(m.fnBody, efn);
      else
        m.body = mapStmt(m.body, efn, sfn);
    }
  return out;
}

ExprFn idExpr() {
  return [](const ExprP& e) { return e; };
}

// ------------------------------------------------------------ substitution

// Pre-order substitution of whole variable expressions: a node whose
// printed form matches a key is replaced without descending (so a
// replacement is never rewritten again and compound variables like o.g.h
// are matched before their prefix o.g).
ExprP substExpr(const ExprP& e, const std::map<std::string, ExprP>& m) {
  if (!e || m.empty()) return e;
  auto hit = m.find(keyOf(e));
  if (hit != m.end()) return hit->second;
  return rebuildExpr(e,
                     [&m](const ExprP& c) { return substExpr(c, m); });
}

Pattern substPattern(const Pattern& p, const std::map<std::string, ExprP>& m) {
  Pattern out = p;
  if (!p.isTuple) {
    out.var = substExpr(p.var, m);
    return out;
  }
  for (PatElem& el : out.elems)
    if (el.e) el.e = substExpr(el.e, m);
  return out;
}

// ------------------------------------------------- pass 0: surface forms

// Repeated unprefixed variables within one iterator group express a join:
// later occurrences become =-components (tuple patterns) or a fresh
// variable plus an equality conjunct (single-variable patterns).
void normalizeGroup(std::vector<Iterator>& its, ExprP& cond,
                    FreshNamer& fresh) {
  std::set<std::string> seen;
  for (Iterator& it : its) {
    if (!it.pat.isTuple) {
      if (!it.pat.var) continue;
      std::string k = keyOf(it.pat.var);
      if (!seen.insert(k).second) {
        ExprP nv = mkGlobal(fresh.next(), it.pat.var->loc);
        cond = mkAnd(mkBinary(BinaryOp::Is, nv, it.pat.var, it.pat.var->loc),
                     cond ? cond : litTrue(), it.pat.var->loc);
        it.pat.var = nv;
        seen.insert(keyOf(nv));
      }
      continue;
    }
    for (PatElem& el : it.pat.elems) {
      if (el.kind != PatElem::Kind::Bind || !el.e) continue;
      if (!seen.insert(keyOf(el.e)).second) el.kind = PatElem::Kind::Eq;
    }
  }
}

class SurfacePass {
public:
  explicit SurfacePass(FreshNamer& fresh) : fresh_(fresh) {}

  Program run(const Program& p) {
    auto efn = [this](const ExprP& e) { return onExpr(e); };
    auto sfn = [this](const StmtP& s) { return onStmt(s); };
    return mapProgram(p, efn, sfn);
  }

private:
  FreshNamer& fresh_;

  ExprP gvar(SrcLoc loc) { return mkGlobal(fresh_.next(), loc); }

  ExprP onExpr(const ExprP& e) {
    switch (e->kind) {
      case Expr::Kind::In:
        // membership is the contains built-in
        return mkCall(e->b, "contains", {e->a}, e->loc);
      case Expr::Kind::Some:
      case Expr::Kind::Each: {
        auto out = std::make_shared<Expr>(*e);
        if (!out->cond) out->cond = litTrue(e->loc);
        normalizeGroup(out->iters, out->cond, fresh_);
        // nest multi-iterator quantifiers innermost-last
        while (out->iters.size() > 1) {
          Iterator last = out->iters.back();
          out->iters.pop_back();
          ExprP inner =
              e->kind == Expr::Kind::Some
                  ? mkSome({last}, out->cond, e->loc)
                  : mkEach({last}, out->cond, e->loc);
          out->cond = inner;
        }
        return out;
      }
      default:
        return e;
    }
  }

  StmtP onStmt(const StmtP& s) {
    switch (s->kind) {
      case Stmt::Kind::Compre: {
        auto out = std::make_shared<Stmt>(*s);
        if (!out->cond) out->cond = litTrue(s->loc);
        normalizeGroup(out->iters, out->cond, fresh_);
        return out;
      }
      case Stmt::Kind::IfSome:
      case Stmt::Kind::WhileSome: {
        auto out = std::make_shared<Stmt>(*s);
        if (!out->cond) out->cond = litTrue(s->loc);
        normalizeGroup(out->iters, out->cond, fresh_);
        return out;
      }
      case Stmt::Kind::MultiAssign: {
        // parallel: evaluate all sources into temporaries, then assign
        std::vector<StmtP> block;
        std::vector<ExprP> temps;
        for (const ExprP& r : s->rhsList) {
          ExprP t = gvar(s->loc);
          temps.push_back(t);
          block.push_back(mkAssign(t, r, s->loc));
        }
        for (size_t i = 0; i < s->targets.size() && i < temps.size(); ++i)
          block.push_back(mkAssign(s->targets[i], temps[i], s->loc));
        return mkBlock(std::move(block), s->loc);
      }
      case Stmt::Kind::Assign:
        if (s->rhs && s->rhs->kind == Expr::Kind::SetDisplay)
          return expandDisplay(s);
        if (s->rhs && s->rhs->kind == Expr::Kind::Agg)
          return expandAggregate(s);
        return s;
      default:
        return s;
    }
  }

  // x := {e1, ..., en}: evaluate the elements, then build the set.
  StmtP expandDisplay(const StmtP& s) {
    std::vector<StmtP> block;
    std::vector<ExprP> temps;
    for (const ExprP& el : s->rhs->elems) {
      ExprP t = gvar(s->loc);
      temps.push_back(t);
      block.push_back(mkAssign(t, el, s->loc));
    }
    ExprP tgt = hoistTarget(s->target, block, s->loc);
    block.push_back(mkAssignNew(tgt, "set", s->loc));
    for (const ExprP& t : temps)
      block.push_back(mkCallStmt(tgt, "add", {t}, s->loc));
    return mkBlock(std::move(block), s->loc);
  }

  // x := agg(e) / agg{r : iterators | cond}: accumulate over the source.
  StmtP expandAggregate(const StmtP& s) {
    const ExprP& ag = s->rhs;
    SrcLoc loc = s->loc;
    std::vector<StmtP> block;
    ExprP src = gvar(loc);
    if (ag->a && ag->a->kind == Expr::Kind::CompreSrc) {
      ExprP cond = ag->a->cond ? ag->a->cond : litTrue(loc);
      std::vector<Iterator> its = ag->a->iters;
      normalizeGroup(its, cond, fresh_);
      block.push_back(mkCompre(src, ag->a->b, std::move(its), cond, loc));
    } else {
      block.push_back(mkAssign(src, ag->a, loc));
    }
    ExprP acc = gvar(loc);
    ExprP item = gvar(loc);
    bool numericStart =
        ag->agg == AggKind::Count || ag->agg == AggKind::Sum;
    block.push_back(mkAssign(
        acc, numericStart ? litInt(0, loc) : mkLit(Value::none(), loc), loc));
    StmtP update;
    switch (ag->agg) {
      case AggKind::Count:
        update = mkAssign(
            acc, mkBinary(BinaryOp::Plus, acc, litInt(1, loc), loc), loc);
        break;
      case AggKind::Sum:
        update =
            mkAssign(acc, mkBinary(BinaryOp::Plus, acc, item, loc), loc);
        break;
      case AggKind::Max:
      case AggKind::Min: {
        ExprP lt = ag->agg == AggKind::Max
                       ? mkBinary(BinaryOp::Lt, acc, item, loc)
                       : mkBinary(BinaryOp::Lt, item, acc, loc);
        update = mkIf(
            mkBinary(BinaryOp::Is, acc, mkLit(Value::none(), loc), loc),
            mkAssign(acc, item, loc),
            mkIf(lt, mkAssign(acc, item, loc), mkSkip(loc), loc), loc);
        break;
      }
    }
    block.push_back(mkFor({varPattern(item), src}, update, loc));
    block.push_back(mkAssign(s->target, acc, loc));
    return mkBlock(std::move(block), loc);
  }

  // Freeze the object of a field target so repeated uses of the target in
  // an expansion refer to the same object.
  ExprP hoistTarget(const ExprP& t, std::vector<StmtP>& block, SrcLoc loc) {
    if (!t || t->kind != Expr::Kind::Field) return t;
    if (t->obj && (t->obj->kind == Expr::Kind::Param ||
                   t->obj->kind == Expr::Kind::Global ||
                   t->obj->kind == Expr::Kind::Lit))
      return t;  // already a stable variable
    ExprP o = gvar(loc);
    block.push_back(mkAssign(o, t->obj, loc));
    return mkField(o, t->name, loc);
  }
};

// ----------------------------------------------------------- pass 1: bool

ExprP boolExpr(const ExprP& e) {
  switch (e->kind) {
    case Expr::Kind::And:
      // a and b == not (not a or not b)
      return mkUnary(UnaryOp::Not,
                     mkOr(mkUnary(UnaryOp::Not, e->a, e->loc),
                          mkUnary(UnaryOp::Not, e->b, e->loc), e->loc),
                     e->loc);
    case Expr::Kind::Each: {
      // each p in s | b == not (some p in s | not b)
      ExprP cond = e->cond ? e->cond : litTrue(e->loc);
      return mkUnary(
          UnaryOp::Not,
          mkSome(e->iters, mkUnary(UnaryOp::Not, cond, e->loc), e->loc),
          e->loc);
    }
    default:
      return e;
  }
}

// -------------------------------------------------------- pass 2: globals

ExprP globalExpr(const ExprP& e) {
  if (e->kind == Expr::Kind::Global) return mkGlobalsField(e->name, e->loc);
  return e;
}

// ----------------------------------------------- pass 3: pattern normalize

class PatternNormPass {
public:
  explicit PatternNormPass(FreshNamer& fresh) : fresh_(fresh) {}

  Program run(const Program& p) {
    auto efn = [this](const ExprP& e) { return onExpr(e); };
    auto sfn = [this](const StmtP& s) { return onStmt(s); };
    return mapProgram(p, efn, sfn);
  }

private:
  FreshNamer& fresh_;

  ExprP gvar(SrcLoc loc) { return mkGlobalsField(fresh_.next(), loc); }

  // In quantifiers (expression position) only wildcards need names; other
  // expression components stay and are checked by the select/is form.
  ExprP onExpr(const ExprP& e) {
    if (e->kind != Expr::Kind::Some && e->kind != Expr::Kind::Each) return e;
    bool any = false;
    for (const Iterator& it : e->iters)
      if (it.pat.isTuple)
        for (const PatElem& el : it.pat.elems)
          if (el.kind == PatElem::Kind::Wildcard) any = true;
    if (!any) return e;
    auto out = std::make_shared<Expr>(*e);
    for (Iterator& it : out->iters)
      if (it.pat.isTuple)
        for (PatElem& el : it.pat.elems)
          if (el.kind == PatElem::Kind::Wildcard) el = bindElem(gvar(e->loc));
    return out;
  }

  // In loops (statement position) non-constant expression components are
  // evaluated once, before the statement: v := e; ... =v ...
  StmtP onStmt(const StmtP& s) {
    bool isLoop = s->kind == Stmt::Kind::For ||
                  s->kind == Stmt::Kind::IfSome ||
                  s->kind == Stmt::Kind::WhileSome ||
                  s->kind == Stmt::Kind::Compre;
    if (!isLoop) return s;
    std::vector<StmtP> prelude;
    auto out = std::make_shared<Stmt>(*s);
    for (Iterator& it : out->iters) {
      if (!it.pat.isTuple) continue;
      for (PatElem& el : it.pat.elems) {
        switch (el.kind) {
          case PatElem::Kind::Wildcard:
            el = bindElem(gvar(s->loc));
            break;
          case PatElem::Kind::Expr:
            if (el.e && el.e->kind != Expr::Kind::Lit) {
              ExprP v = gvar(s->loc);
              prelude.push_back(mkAssign(v, el.e, s->loc));
              el.kind = PatElem::Kind::Eq;
              el.e = v;
            }
            break;
          default:
            break;
        }
      }
    }
    if (prelude.empty()) return out;
    prelude.push_back(out);
    return mkBlock(std::move(prelude), s->loc);
  }
};

// ------------------------------------------------ pass 4: query patterns

class InferPatternPass {
public:
  explicit InferPatternPass(FreshNamer& fresh) : fresh_(fresh) {}

  Program run(const Program& p) {
    auto sfn = [this](const StmtP& s) { return onStmt(s); };
    return mapProgram(p, idExpr(), sfn);
  }

private:
  FreshNamer& fresh_;

  ExprP gvar(SrcLoc loc) { return mkGlobalsField(fresh_.next(), loc); }

  StmtP onStmt(const StmtP& s) {
    if (s->kind != Stmt::Kind::Infer) return s;
    bool any = false;
    for (const InferQuery& q : s->queries) any = any || q.hasPattern;
    if (!any || s->targets.size() != s->queries.size()) return s;

    std::vector<StmtP> prelude, post;
    auto inf = std::make_shared<Stmt>(*s);
    for (size_t i = 0; i < inf->queries.size(); ++i) {
      InferQuery& q = inf->queries[i];
      if (!q.hasPattern) continue;
      ExprP y = gvar(q.loc);

      // Build the projection comprehension over the whole predicate.
      std::vector<PatElem> elems;
      std::vector<ExprP> proj;
      std::set<std::string> seen;
      ExprP cond = litTrue(q.loc);
      for (const PatElem& el : q.pat) {
        switch (el.kind) {
          case PatElem::Kind::Bind:
            if (el.e && seen.insert(keyOf(el.e)).second) {
              elems.push_back(el);
              proj.push_back(el.e);
            } else {
              PatElem eq = el;
              eq.kind = PatElem::Kind::Eq;
              elems.push_back(eq);
            }
            break;
          case PatElem::Kind::Wildcard: {
            // a query wildcard is projected under a fresh name
            ExprP w = gvar(q.loc);
            elems.push_back(bindElem(w));
            proj.push_back(w);
            break;
          }
          case PatElem::Kind::Eq:
            elems.push_back(el);
            break;
          case PatElem::Kind::Expr: {
            ExprP v = gvar(q.loc);
            prelude.push_back(mkAssign(v, el.e, q.loc));
            PatElem eq;
            eq.kind = PatElem::Kind::Eq;
            eq.e = v;
            elems.push_back(eq);
            break;
          }
        }
      }

      Pattern pat;
      if (elems.size() == 1) {
        // arity-1 relations hold raw elements, not 1-tuples
        if (elems[0].kind == PatElem::Kind::Bind) {
          pat = varPattern(elems[0].e, q.loc);
        } else {
          ExprP u = gvar(q.loc);
          pat = varPattern(u, q.loc);
          cond = mkBinary(BinaryOp::Is, u, elems[0].e, q.loc);
        }
      } else {
        pat.isTuple = true;
        pat.elems = std::move(elems);
        pat.loc = q.loc;
      }

      post.push_back(mkCompre(inf->targets[i], mkTuple(proj, q.loc),
                              {Iterator{pat, y}}, cond, q.loc));
      inf->targets[i] = y;
      q.hasPattern = false;
      q.pat.clear();
    }

    std::vector<StmtP> block = std::move(prelude);
    block.push_back(inf);
    for (StmtP& st : post) block.push_back(std::move(st));
    return mkBlock(std::move(block), s->loc);
  }
};

// --------------------------------------------- pass 5: ifSome / whileSome

class SomeLoopPass {
public:
  explicit SomeLoopPass(FreshNamer& fresh) : fresh_(fresh) {}

  Program run(const Program& p) {
    auto sfn = [this](const StmtP& s) { return onStmt(s); };
    return mapProgram(p, idExpr(), sfn);
  }

private:
  FreshNamer& fresh_;

  ExprP gvar(SrcLoc loc) { return mkGlobalsField(fresh_.next(), loc); }

  StmtP onStmt(const StmtP& s) {
    if (s->kind != Stmt::Kind::IfSome && s->kind != Stmt::Kind::WhileSome)
      return s;
    SrcLoc loc = s->loc;

    // Unprefixed variables of the group, in binding order.
    std::vector<ExprP> vars;
    std::set<std::string> seen;
    for (const Iterator& it : s->iters) {
      if (!it.pat.isTuple) {
        if (it.pat.var && seen.insert(keyOf(it.pat.var)).second)
          vars.push_back(it.pat.var);
        continue;
      }
      for (const PatElem& el : it.pat.elems)
        if (el.kind == PatElem::Kind::Bind && el.e &&
            seen.insert(keyOf(el.e)).second)
          vars.push_back(el.e);
    }

    // Primed copies: the loops bind fresh variables; on the first match the
    // witnesses are copied into the user variables and the body runs.
    std::map<std::string, ExprP> theta;
    std::vector<ExprP> primes;
    for (const ExprP& v : vars) {
      ExprP pv = gvar(loc);
      theta[keyOf(v)] = pv;
      primes.push_back(pv);
    }

    std::vector<Iterator> its;
    for (size_t i = 0; i < s->iters.size(); ++i) {
      Iterator it;
      it.src = i == 0 ? s->iters[i].src : substExpr(s->iters[i].src, theta);
      it.pat = substPattern(s->iters[i].pat, theta);
      its.push_back(std::move(it));
    }
    ExprP condP = substExpr(s->cond ? s->cond : litTrue(loc), theta);

    ExprP flag = gvar(loc);
    std::vector<StmtP> inner;
    for (size_t i = 0; i < vars.size(); ++i)
      inner.push_back(mkAssign(vars[i], primes[i], loc));
    inner.push_back(s->a ? s->a : mkSkip(loc));
    inner.push_back(mkAssign(flag, litTrue(loc), loc));
    StmtP hit = mkBlock(std::move(inner), loc);

    StmtP guarded =
        mkIf(mkUnary(UnaryOp::Not, flag, loc), hit, mkSkip(loc), loc);
    StmtP body = isTrueLit(condP)
                     ? guarded
                     : mkIf(condP, guarded, mkSkip(loc), loc);
    for (size_t i = its.size(); i-- > 0;)
      body = mkFor(its[i], body, loc);

    if (s->kind == Stmt::Kind::IfSome)
      return mkBlock({mkAssign(flag, mkLit(Value::boolean(false), loc), loc),
                      body},
                     loc);
    StmtP again = mkBlock(
        {mkAssign(flag, mkLit(Value::boolean(false), loc), loc), body}, loc);
    return mkBlock({mkAssign(flag, litTrue(loc), loc),
                    mkWhile(flag, again, loc)},
                   loc);
  }
};

// ----------------------------------------------- pass 6: comprehensions

class ComprePass {
public:
  explicit ComprePass(FreshNamer& fresh) : fresh_(fresh) {}

  Program run(const Program& p) {
    auto sfn = [this](const StmtP& s) { return onStmt(s); };
    return mapProgram(p, idExpr(), sfn);
  }

private:
  FreshNamer& fresh_;

  ExprP gvar(SrcLoc loc) { return mkGlobalsField(fresh_.next(), loc); }

  StmtP onStmt(const StmtP& s) {
    if (s->kind != Stmt::Kind::Compre) return s;
    SrcLoc loc = s->loc;
    ExprP cond = s->cond ? s->cond : litTrue(loc);

    // =-components become fresh variables checked in the condition, so a
    // component may refer to a variable bound by any iterator of the group.
    std::vector<Iterator> its = s->iters;
    for (Iterator& it : its) {
      if (!it.pat.isTuple) continue;
      for (PatElem& el : it.pat.elems) {
        if (el.kind != PatElem::Kind::Eq) continue;
        ExprP y = gvar(loc);
        cond = coreAnd(mkBinary(BinaryOp::Is, y, el.e, loc), cond);
        el = bindElem(y);
      }
    }

    StmtP add = mkCallStmt(s->target, "add", {s->result}, loc);
    StmtP body = isTrueLit(cond) ? add : mkIf(cond, add, mkSkip(loc), loc);
    for (size_t i = its.size(); i-- > 0;) body = mkFor(its[i], body, loc);
    return mkBlock({mkAssignNew(s->target, "set", loc), body}, loc);
  }
};

// -------------------------------------------- pass 7: iterator tuples

class IteratorTuplePass {
public:
  explicit IteratorTuplePass(FreshNamer& fresh) : fresh_(fresh) {}

  Program run(const Program& p) {
    auto efn = [this](const ExprP& e) { return onExpr(e); };
    auto sfn = [this](const StmtP& s) { return onStmt(s); };
    return mapProgram(p, efn, sfn);
  }

private:
  FreshNamer& fresh_;

  ExprP gvar(SrcLoc loc) { return mkGlobalsField(fresh_.next(), loc); }

  // isTuple(x) and len(x) is n and (select(x,j1),...) is (e_j1,...)
  // as nested core conjunctions; theta rewrites bound components.
  ExprP matchExpr(const ExprP& x, const std::vector<PatElem>& elems,
                  const std::map<std::string, ExprP>& theta, SrcLoc loc) {
    ExprP conj = mkUnary(UnaryOp::IsTuple, x, loc);
    conj = coreAnd(conj,
                   mkBinary(BinaryOp::Is, mkUnary(UnaryOp::Len, x, loc),
                            litInt(static_cast<int64_t>(elems.size()), loc),
                            loc));
    std::vector<ExprP> sel, want;
    for (size_t i = 0; i < elems.size(); ++i) {
      const PatElem& el = elems[i];
      if (el.kind != PatElem::Kind::Eq && el.kind != PatElem::Kind::Expr)
        continue;
      sel.push_back(selectOf(x, i + 1, loc));
      want.push_back(substExpr(el.e, theta));
    }
    if (!sel.empty())
      conj = coreAnd(conj, mkBinary(BinaryOp::Is, mkTuple(sel, loc),
                                    mkTuple(want, loc), loc));
    return conj;
  }

  ExprP onExpr(const ExprP& e) {
    if (e->kind != Expr::Kind::Some || e->iters.size() != 1) return e;
    const Iterator& it = e->iters[0];
    if (!it.pat.isTuple) return e;
    SrcLoc loc = e->loc;
    ExprP x = gvar(loc);
    std::map<std::string, ExprP> theta;
    for (size_t i = 0; i < it.pat.elems.size(); ++i) {
      const PatElem& el = it.pat.elems[i];
      if (el.kind == PatElem::Kind::Bind && el.e)
        theta[keyOf(el.e)] = selectOf(x, i + 1, loc);
    }
    ExprP cond = matchExpr(x, it.pat.elems, theta, loc);
    cond = coreAnd(cond,
                   substExpr(e->cond ? e->cond : litTrue(loc), theta));
    return mkSome({Iterator{varPattern(x, loc), it.src}}, cond, loc);
  }

  StmtP onStmt(const StmtP& s) {
    if (s->kind != Stmt::Kind::For) return s;
    const Iterator& it = s->iters[0];
    if (!it.pat.isTuple) return s;
    SrcLoc loc = s->loc;
    const std::vector<PatElem>& elems = it.pat.elems;
    std::map<std::string, ExprP> noTheta;

    ExprP src = gvar(loc);
    auto componentAssigns = [&](const ExprP& x) {
      std::vector<StmtP> out;
      for (size_t i = 0; i < elems.size(); ++i)
        if (elems[i].kind == PatElem::Kind::Bind && elems[i].e)
          out.push_back(mkAssign(elems[i].e, selectOf(x, i + 1, loc), loc));
      return out;
    };

    // set source: filter matching elements first, then iterate and bind
    ExprP fx = gvar(loc);
    ExprP filtered = gvar(loc);
    StmtP filterLoop = mkFor(
        {varPattern(fx, loc), src},
        mkIf(matchExpr(fx, elems, noTheta, loc),
             mkCallStmt(filtered, "add", {fx}, loc), mkSkip(loc), loc),
        loc);
    ExprP sx = gvar(loc);
    std::vector<StmtP> setInner = componentAssigns(sx);
    setInner.push_back(s->a ? s->a : mkSkip(loc));
    StmtP setLoop =
        mkFor({varPattern(sx, loc), filtered}, mkBlock(setInner, loc), loc);
    StmtP setBranch = mkBlock(
        {mkAssignNew(filtered, "set", loc), filterLoop, setLoop}, loc);

    // sequence source: test and bind element by element, preserving order
    // and duplicates
    ExprP qx = gvar(loc);
    std::vector<StmtP> seqInner = componentAssigns(qx);
    seqInner.push_back(s->a ? s->a : mkSkip(loc));
    StmtP seqBranch = mkFor(
        {varPattern(qx, loc), src},
        mkIf(matchExpr(qx, elems, noTheta, loc), mkBlock(seqInner, loc),
             mkSkip(loc), loc),
        loc);

    return mkBlock({mkAssign(src, it.src, loc),
                    mkIf(mkIsInstance(src, "set", loc), setBranch, seqBranch,
                         loc)},
                   loc);
  }
};

// ----------------------------------------------------------- counting

struct SugarCounter {
  int count = 0;

  void pattern(const Pattern& p) {
    if (p.isTuple) ++count;
  }

  ExprP operator()(const ExprP& e) {
    switch (e->kind) {
      case Expr::Kind::And:
      case Expr::Kind::Each:
      case Expr::Kind::In:
      case Expr::Kind::Agg:
      case Expr::Kind::SetDisplay:
      case Expr::Kind::CompreSrc:
      case Expr::Kind::Global:
      case Expr::Kind::Name:
        ++count;
        break;
      case Expr::Kind::Some:
        if (e->iters.size() > 1) ++count;
        for (const Iterator& it : e->iters) pattern(it.pat);
        break;
      default:
        break;
    }
    return e;
  }

  StmtP operator()(const StmtP& s) {
    switch (s->kind) {
      case Stmt::Kind::MultiAssign:
      case Stmt::Kind::Compre:
      case Stmt::Kind::IfSome:
      case Stmt::Kind::WhileSome:
        ++count;
        break;
      case Stmt::Kind::For:
        for (const Iterator& it : s->iters) pattern(it.pat);
        break;
      case Stmt::Kind::Infer:
        for (const InferQuery& q : s->queries)
          if (q.hasPattern) ++count;
        break;
      default:
        break;
    }
    return s;
  }
};

}  // namespace

// -------------------------------------------------------------- interface

Program normalizeSurface(const Program& p, FreshNamer& fresh) {
  return SurfacePass(fresh).run(p);
}

Program elimBool(const Program& p, FreshNamer&) {
  return mapProgram(p, boolExpr, nullptr);
}

Program elimGlobals(const Program& p, FreshNamer&) {
  Program out = mapProgram(p, globalExpr, nullptr);
  auto lower = [](RuleSetDecl& rs) {
    auto fix = [](PredRef& pr) {
      if (pr.kind == PredRef::Kind::Global) {
        pr.kind = PredRef::Kind::Field;
        pr.addr = kGlobalsAddr;
      }
    };
    for (Rule& r : rs.rules) {
      fix(r.head.pred);
      for (RuleHyp& h : r.hyps) fix(h.atom.pred);
    }
  };
  for (RuleSetDecl& rs : out.rulesets) lower(rs);
  for (ClassDecl& c : out.classes)
    for (RuleSetDecl& rs : c.rulesets) lower(rs);
  return out;
}

Program normalizePatterns(const Program& p, FreshNamer& fresh) {
  return PatternNormPass(fresh).run(p);
}

Program elimInferPatterns(const Program& p, FreshNamer& fresh) {
  return InferPatternPass(fresh).run(p);
}

Program elimSomeLoops(const Program& p, FreshNamer& fresh) {
  return SomeLoopPass(fresh).run(p);
}

Program elimComprehensions(const Program& p, FreshNamer& fresh) {
  return ComprePass(fresh).run(p);
}

Program elimIteratorTuples(const Program& p, FreshNamer& fresh) {
  return IteratorTuplePass(fresh).run(p);
}

Program desugarProgram(const Program& p, FreshNamer& fresh) {
  Program q = normalizeSurface(p, fresh);
  q = elimBool(q, fresh);
  q = elimGlobals(q, fresh);
  q = normalizePatterns(q, fresh);
  q = elimInferPatterns(q, fresh);
  q = elimSomeLoops(q, fresh);
  q = elimComprehensions(q, fresh);
  q = elimIteratorTuples(q, fresh);
  return q;
}

int countSugaredNodes(const Program& p) {
  SugarCounter c;
  ExprFn efn = [&c](const ExprP& e) { return c(e); };
  StmtFn sfn = [&c](const StmtP& s) { return c(s); };
  mapProgram(p, efn, sfn);
  auto countRs = [&c](const RuleSetDecl& rs) {
    for (const Rule& r : rs.rules) {
      if (r.head.pred.kind == PredRef::Kind::Global) ++c.count;
      for (const RuleHyp& h : r.hyps)
        if (h.atom.pred.kind == PredRef::Kind::Global) ++c.count;
    }
  };
  for (const RuleSetDecl& rs : p.rulesets) countRs(rs);
  for (const ClassDecl& cl : p.classes)
    for (const RuleSetDecl& rs : cl.rulesets) countRs(rs);
  return c.count;
}

ExprP substituteExpr(const ExprP& e, const SubstMap& m) {
  return substExpr(e, m);
}

StmtP substituteStmt(const StmtP& s, const SubstMap& m) {
  if (!s || m.empty()) return s;
  return mapStmt(
      s, [&m](const ExprP& e) { return substExpr(e, m); }, nullptr);
}

}  // namespace rli
