#include "rli/pretty.hpp"

namespace rli {

namespace {

// Precedence levels, loosest first. An operand prints parenthesized when
// its own level is looser than its context requires.
enum Prec { kOr = 0, kAnd, kNot, kCmp, kAdd, kPostfix };

std::string exprAt(const ExprP& e, int ctx);

std::string atomText(const Value& v) { return toText(v); }

std::string litText(const Value& v) {
  if (v.kind() == Value::Kind::Address) {
    if (v.asAddress() == kGlobalsAddr) return "@0";
    return "@" + std::to_string(v.asAddress());
  }
  return atomText(v);
}

std::string patternText(const Pattern& p) {
  if (!p.isTuple) return exprAt(p.var, kPostfix);
  std::string out = "(";
  for (size_t i = 0; i < p.elems.size(); ++i) {
    if (i) out += ", ";
    const PatElem& el = p.elems[i];
    switch (el.kind) {
      case PatElem::Kind::Bind:
        out += exprAt(el.e, kPostfix);
        break;
      case PatElem::Kind::Eq:
        out += "=" + exprAt(el.e, kAdd);
        break;
      case PatElem::Kind::Wildcard:
        out += "_";
        break;
      case PatElem::Kind::Expr:
        out += exprAt(el.e, kAdd);
        break;
    }
  }
  out += ")";
  return out;
}

std::string itersText(const std::vector<Iterator>& its) {
  std::string out;
  for (size_t i = 0; i < its.size(); ++i) {
    if (i) out += ", ";
    out += patternText(its[i].pat) + " in " + exprAt(its[i].src, kAdd);
  }
  return out;
}

bool isTrueLit(const ExprP& e) {
  return e && e->kind == Expr::Kind::Lit &&
         e->lit == Value::boolean(true);
}

std::string quantText(const ExprP& e) {
  std::string out = e->kind == Expr::Kind::Some ? "some " : "each ";
  out += itersText(e->iters);
  if (!isTrueLit(e->cond)) out += " | " + exprAt(e->cond, kOr);
  return out;
}

std::string callArgs(const std::vector<ExprP>& args) {
  std::string out = "(";
  for (size_t i = 0; i < args.size(); ++i) {
    if (i) out += ", ";
    out += exprAt(args[i], kOr);
  }
  out += ")";
  return out;
}

std::string exprCore(const ExprP& e, int& level) {
  switch (e->kind) {
    case Expr::Kind::Lit:
      level = kPostfix;
      return litText(e->lit);
    case Expr::Kind::Name:
    case Expr::Kind::Param:
    case Expr::Kind::Global:
      level = kPostfix;
      return e->name;
    case Expr::Kind::Field:
      level = kPostfix;
      return exprAt(e->obj, kPostfix) + "." + e->name;
    case Expr::Kind::Tuple: {
      level = kPostfix;
      if (e->elems.empty()) return "()";
      if (e->elems.size() == 1) return "(" + exprAt(e->elems[0], kOr) + ",)";
      std::string out = "(";
      for (size_t i = 0; i < e->elems.size(); ++i) {
        if (i) out += ", ";
        out += exprAt(e->elems[i], kOr);
      }
      return out + ")";
    }
    case Expr::Kind::Call:
      level = kPostfix;
      return exprAt(e->obj, kPostfix) + "." + e->name + callArgs(e->elems);
    case Expr::Kind::Unary:
      switch (e->uop) {
        case UnaryOp::Not:
          level = kNot;
          return "not " + exprAt(e->a, kNot);
        case UnaryOp::IsTuple:
          level = kPostfix;
          return "isTuple(" + exprAt(e->a, kOr) + ")";
        case UnaryOp::Len:
          level = kPostfix;
          return "len(" + exprAt(e->a, kOr) + ")";
      }
      break;
    case Expr::Kind::Binary:
      switch (e->bop) {
        case BinaryOp::Is:
          level = kCmp;
          return exprAt(e->a, kAdd) + " is " + exprAt(e->b, kAdd);
        case BinaryOp::Plus:
          level = kAdd;
          return exprAt(e->a, kAdd) + " + " + exprAt(e->b, kPostfix);
        case BinaryOp::Lt:
          level = kCmp;
          return exprAt(e->a, kAdd) + " < " + exprAt(e->b, kAdd);
        case BinaryOp::Select:
          level = kPostfix;
          return "select(" + exprAt(e->a, kOr) + ", " + exprAt(e->b, kOr) + ")";
      }
      break;
    case Expr::Kind::IsInstance:
      level = kPostfix;
      return "isinstance(" + exprAt(e->a, kOr) + ", " + e->name + ")";
    case Expr::Kind::And:
      level = kAnd;
      return exprAt(e->a, kAnd) + " and " + exprAt(e->b, kNot);
    case Expr::Kind::Or:
      level = kOr;
      return exprAt(e->a, kOr) + " or " + exprAt(e->b, kAnd);
    case Expr::Kind::In:
      level = kCmp;
      return exprAt(e->a, kAdd) + " in " + exprAt(e->b, kAdd);
    case Expr::Kind::Some:
    case Expr::Kind::Each:
      // Quantifier conditions extend to the right; parenthesize always.
      level = kPostfix;
      return "(" + quantText(e) + ")";
    case Expr::Kind::Agg: {
      level = kPostfix;
      std::string kw = e->agg == AggKind::Count ? "count"
                       : e->agg == AggKind::Sum ? "sum"
                       : e->agg == AggKind::Max ? "max"
                                                : "min";
      if (e->a && e->a->kind == Expr::Kind::CompreSrc) return kw + exprAt(e->a, kOr);
      return kw + "(" + exprAt(e->a, kOr) + ")";
    }
    case Expr::Kind::SetDisplay: {
      level = kPostfix;
      std::string out = "{";
      for (size_t i = 0; i < e->elems.size(); ++i) {
        if (i) out += ", ";
        out += exprAt(e->elems[i], kOr);
      }
      return out + "}";
    }
    case Expr::Kind::CompreSrc: {
      level = kPostfix;
      std::string out = "{" + exprAt(e->b, kOr) + " : " + itersText(e->iters);
      if (!isTrueLit(e->cond)) out += " | " + exprAt(e->cond, kOr);
      return out + "}";
    }
  }
  level = kPostfix;
  return "?";
}

std::string exprAt(const ExprP& e, int ctx) {
  if (!e) return "?";
  int level = kPostfix;
  std::string text = exprCore(e, level);
  if (level < ctx) return "(" + text + ")";
  return text;
}

std::string pad(int indent) { return std::string(indent * 2, ' '); }

std::string blockText(const StmtP& s, int indent);

void stmtLines(const StmtP& s, int indent, std::string& out) {
  if (!s) return;
  switch (s->kind) {
    case Stmt::Kind::Seq:
      stmtLines(s->a, indent, out);
      stmtLines(s->b, indent, out);
      return;
    case Stmt::Kind::Skip:
      out += pad(indent) + "skip;\n";
      return;
    case Stmt::Kind::Return:
      out += pad(indent) + "skip; # return\n";
      return;
    case Stmt::Kind::Assign:
      out += pad(indent) + exprAt(s->target, kPostfix) + " := " +
             exprAt(s->rhs, kOr) + ";\n";
      return;
    case Stmt::Kind::AssignNew:
      out += pad(indent) + exprAt(s->target, kPostfix) + " := new " +
             s->className + ";\n";
      return;
    case Stmt::Kind::Compre: {
      out += pad(indent) + exprAt(s->target, kPostfix) + " := {" +
             exprAt(s->result, kOr) + " : " + itersText(s->iters);
      if (!isTrueLit(s->cond)) out += " | " + exprAt(s->cond, kOr);
      out += "};\n";
      return;
    }
    case Stmt::Kind::MultiAssign: {
      std::string lhs, rhs;
      for (size_t i = 0; i < s->targets.size(); ++i) {
        if (i) lhs += ", ";
        lhs += exprAt(s->targets[i], kPostfix);
      }
      for (size_t i = 0; i < s->rhsList.size(); ++i) {
        if (i) rhs += ", ";
        rhs += exprAt(s->rhsList[i], kOr);
      }
      out += pad(indent) + lhs + " := " + rhs + ";\n";
      return;
    }
    case Stmt::Kind::If: {
      out += pad(indent) + "if " + exprAt(s->cond, kOr) + " " +
             blockText(s->a, indent);
      if (!s->b || s->b->kind != Stmt::Kind::Skip)
        out += " else " + blockText(s->b, indent);
      out += "\n";
      return;
    }
    case Stmt::Kind::For:
      out += pad(indent) + "for " + itersText(s->iters) + " " +
             blockText(s->a, indent) + "\n";
      return;
    case Stmt::Kind::ForInTuple: {
      out += pad(indent) + "for " + exprAt(s->target, kPostfix) +
             " in <linearized:" +
             std::to_string(s->values ? s->values->size() - s->offset : 0) +
             "> " + blockText(s->a, indent) + "\n";
      return;
    }
    case Stmt::Kind::While:
      out += pad(indent) + "while " + exprAt(s->cond, kOr) + " " +
             blockText(s->a, indent) + "\n";
      return;
    case Stmt::Kind::IfSome:
    case Stmt::Kind::WhileSome: {
      out += pad(indent) +
             (s->kind == Stmt::Kind::IfSome ? "ifSome " : "whileSome ") +
             itersText(s->iters);
      if (!isTrueLit(s->cond)) out += " | " + exprAt(s->cond, kOr);
      out += " " + blockText(s->a, indent) + "\n";
      return;
    }
    case Stmt::Kind::Call:
      out += pad(indent) + exprAt(s->recv, kPostfix) + "." + s->method +
             callArgs(s->args) + ";\n";
      return;
    case Stmt::Kind::Infer: {
      out += pad(indent);
      for (size_t i = 0; i < s->targets.size(); ++i) {
        if (i) out += ", ";
        out += exprAt(s->targets[i], kPostfix);
      }
      if (!s->targets.empty()) out += " := ";
      if (s->recv) out += exprAt(s->recv, kPostfix) + ".";
      out += "infer(";
      bool first = true;
      for (const InferQuery& q : s->queries) {
        if (!first) out += ", ";
        first = false;
        out += q.pred;
        if (q.hasPattern) {
          Pattern p;
          p.isTuple = true;
          p.elems = q.pat;
          out += patternText(p);
        }
      }
      for (const InferKwarg& kw : s->kwargs) {
        if (!first) out += ", ";
        first = false;
        out += kw.pred + "=" + exprAt(kw.value, kOr);
      }
      if (!first) out += ", ";
      out += "rules=" + s->ruleset + ");\n";
      return;
    }
  }
}

std::string blockText(const StmtP& s, int indent) {
  std::string inner;
  stmtLines(s, indent + 1, inner);
  if (inner.empty()) inner = pad(indent + 1) + "skip;\n";
  return "{\n" + inner + pad(indent) + "}";
}

std::string predText(const PredRef& p) {
  switch (p.kind) {
    case PredRef::Kind::Name:
    case PredRef::Kind::Param:
    case PredRef::Kind::Global:
      return p.name;
    case PredRef::Kind::SelfField:
      return "self." + p.name;
    case PredRef::Kind::Field:
      return "@" + std::to_string(p.addr) + "." + p.name;
  }
  return p.name;
}

std::string atomText(const RuleAtom& a) {
  std::string out = predText(a.pred) + "(";
  for (size_t i = 0; i < a.args.size(); ++i) {
    if (i) out += ", ";
    out += a.args[i].isVar ? a.args[i].var : atomText(a.args[i].lit);
  }
  return out + ")";
}

std::string ruleSetText(const RuleSetDecl& rs, int indent) {
  std::string out = pad(indent) + "rules " + rs.name + "(";
  for (size_t i = 0; i < rs.params.size(); ++i) {
    if (i) out += ", ";
    out += rs.params[i];
  }
  out += ") {\n";
  for (const Rule& r : rs.rules) out += pad(indent + 1) + prettyRule(r) + "\n";
  out += pad(indent) + "}\n";
  return out;
}

}  // namespace

std::string prettyExpr(const ExprP& e) { return exprAt(e, kOr); }

std::string prettyStmt(const StmtP& s, int indent) {
  std::string out;
  stmtLines(s, indent, out);
  return out;
}

std::string prettyRule(const Rule& r) {
  std::string out = atomText(r.head);
  for (size_t i = 0; i < r.hyps.size(); ++i) {
    out += i == 0 ? " if " : ", ";
    if (r.hyps[i].negated) out += "not ";
    out += atomText(r.hyps[i].atom);
  }
  return out + ";";
}

std::string prettyProgram(const Program& p) {
  std::string out;
  for (const RuleSetDecl& rs : p.rulesets) out += ruleSetText(rs, 0);
  for (const ClassDecl& c : p.classes) {
    out += "class " + c.name;
    if (!c.base.empty()) out += " extends " + c.base;
    out += " {\n";
    for (const RuleSetDecl& rs : c.rulesets) out += ruleSetText(rs, 1);
    for (const MethodDecl& m : c.methods) {
      out += pad(1) + (m.isFunction ? "defun " : "def ") + m.name + "(";
      for (size_t i = 0; i < m.params.size(); ++i) {
        if (i) out += ", ";
        out += m.params[i];
      }
      out += ")";
      if (m.isFunction) {
        out += " = " + prettyExpr(m.fnBody) + ";\n";
      } else {
        out += " " + blockText(m.body, 1) + "\n";
      }
    }
    out += "}\n";
  }
  if (p.main && p.main->kind != Stmt::Kind::Skip) out += prettyStmt(p.main, 0);
  return out;
}

}  // namespace rli
