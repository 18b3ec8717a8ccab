#include "rli/parser.hpp"

#include <cctype>
#include <functional>
#include <set>

#include "rli/lexer.hpp"
#include "rli/scope.hpp"

namespace rli {

namespace {

const std::set<std::string> kReserved = {
    "if",   "else",  "for",  "while", "ifSome", "whileSome", "skip", "class",
    "def",  "defun", "rules", "extends", "new",  "infer",    "not",  "and",
    "or",   "in",    "is",   "some",  "each",   "True",      "False", "None",
    "rules"};

bool isBuiltinCallName(const std::string& n) {
  return n == "len" || n == "isTuple" || n == "select" || n == "plus" ||
         n == "lt" || n == "isinstance" || n == "count" || n == "sum" ||
         n == "max" || n == "min";
}

class Parser {
public:
  Parser(std::vector<Token> toks, Diagnostics& diags)
      : toks_(std::move(toks)), diags_(diags) {}

  Program parse() {
    Program prog;
    std::vector<StmtP> mainStmts;
    while (!at(Tok::End)) {
      if (atIdent("rules")) {
        prog.rulesets.push_back(parseRuleSet());
      } else if (atIdent("class")) {
        prog.classes.push_back(parseClass());
      } else {
        size_t before = pos_;
        StmtP s = parseStmt();
        if (s) mainStmts.push_back(s);
        if (pos_ == before) ++pos_;  // ensure progress after an error
      }
    }
    prog.main = mkBlock(std::move(mainStmts));
    return prog;
  }

private:
  std::vector<Token> toks_;
  Diagnostics& diags_;
  size_t pos_ = 0;

  const Token& cur() const { return toks_[pos_]; }
  const Token& peek(size_t k = 1) const {
    size_t i = pos_ + k;
    return i < toks_.size() ? toks_[i] : toks_.back();
  }
  bool at(Tok k) const { return cur().kind == k; }
  bool atIdent(const std::string& s) const {
    return cur().kind == Tok::Ident && cur().text == s;
  }
  Token take() { return toks_[pos_ < toks_.size() - 1 ? pos_++ : pos_]; }
  bool accept(Tok k) {
    if (at(k)) {
      take();
      return true;
    }
    return false;
  }
  bool acceptIdent(const std::string& s) {
    if (atIdent(s)) {
      take();
      return true;
    }
    return false;
  }
  void error(const std::string& msg, SrcLoc loc) {
    addDiag(diags_, "E001", msg, loc);
  }
  Token expect(Tok k, const std::string& what) {
    if (at(k)) return take();
    error("expected " + what, cur().loc);
    return cur();
  }
  std::string expectIdent(const std::string& what) {
    if (cur().kind == Tok::Ident) return take().text;
    error("expected " + what, cur().loc);
    return "?";
  }
  void skipToRecover() {
    int depth = 0;
    while (!at(Tok::End)) {
      if (at(Tok::LBrace)) ++depth;
      if (at(Tok::RBrace)) {
        if (depth == 0) return;
        --depth;
      }
      if (at(Tok::Semi) && depth == 0) {
        take();
        return;
      }
      take();
    }
  }

  // ---- rule sets ----

  RuleSetDecl parseRuleSet() {
    RuleSetDecl rs;
    rs.loc = cur().loc;
    acceptIdent("rules");
    rs.name = expectIdent("rule set name");
    expect(Tok::LParen, "'(' after rule set name");
    while (!at(Tok::RParen) && !at(Tok::End)) {
      rs.params.push_back(expectIdent("local predicate name"));
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RParen, "')'");
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      size_t before = pos_;
      rs.rules.push_back(parseRule());
      if (pos_ == before) ++pos_;
    }
    expect(Tok::RBrace, "'}'");
    return rs;
  }

  Rule parseRule() {
    Rule r;
    r.loc = cur().loc;
    r.head = parseAtom();
    if (acceptIdent("if")) {
      while (true) {
        RuleHyp h;
        h.negated = acceptIdent("not");
        h.atom = parseAtom();
        r.hyps.push_back(std::move(h));
        if (!accept(Tok::Comma)) break;
      }
    }
    expect(Tok::Semi, "';' after rule");
    return r;
  }

  RuleAtom parseAtom() {
    RuleAtom a;
    a.loc = cur().loc;
    if (atIdent("self") && peek().kind == Tok::Dot) {
      take();
      take();
      a.pred.kind = PredRef::Kind::SelfField;
      a.pred.name = expectIdent("field name");
    } else {
      a.pred.kind = PredRef::Kind::Name;
      a.pred.name = expectIdent("predicate name");
    }
    expect(Tok::LParen, "'('");
    while (!at(Tok::RParen) && !at(Tok::End)) {
      RuleArg arg;
      arg.loc = cur().loc;
      if (cur().kind == Tok::Ident) {
        const std::string& w = cur().text;
        if (w == "True" || w == "False") {
          arg.lit = Value::boolean(w == "True");
          take();
        } else if (w == "None") {
          arg.lit = Value::none();
          take();
        } else if (std::isupper(static_cast<unsigned char>(w[0]))) {
          error("rule arguments are lowercase variables or literals", cur().loc);
          arg.isVar = true;
          arg.var = take().text;
        } else {
          arg.isVar = true;
          arg.var = take().text;
        }
      } else if (cur().kind == Tok::Int) {
        arg.lit = Value::integer(take().intVal);
      } else if (cur().kind == Tok::Str) {
        arg.lit = Value::str(take().text);
      } else {
        error("expected rule argument", cur().loc);
        take();
      }
      a.args.push_back(std::move(arg));
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RParen, "')'");
    return a;
  }

  // ---- classes ----

  ClassDecl parseClass() {
    ClassDecl c;
    c.loc = cur().loc;
    acceptIdent("class");
    c.name = expectIdent("class name");
    if (c.name == "set" || c.name == "sequence")
      addDiag(diags_, "E008", "'" + c.name + "' is a reserved class name", c.loc);
    if (acceptIdent("extends")) c.base = expectIdent("base class name");
    expect(Tok::LBrace, "'{'");
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      if (atIdent("rules")) {
        c.rulesets.push_back(parseRuleSet());
      } else if (atIdent("def") || atIdent("defun")) {
        c.methods.push_back(parseMethod());
      } else {
        error("expected rule set or method in class body", cur().loc);
        skipToRecover();
      }
    }
    expect(Tok::RBrace, "'}'");
    return c;
  }

  MethodDecl parseMethod() {
    MethodDecl m;
    m.loc = cur().loc;
    m.isFunction = cur().text == "defun";
    take();
    m.name = expectIdent("method name");
    expect(Tok::LParen, "'('");
    while (!at(Tok::RParen) && !at(Tok::End)) {
      m.params.push_back(expectIdent("parameter name"));
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RParen, "')'");
    if (m.isFunction) {
      expect(Tok::Eq, "'=' before function body");
      m.fnBody = parseExpr();
      expect(Tok::Semi, "';' after function body");
    } else {
      m.body = parseBlock();
    }
    return m;
  }

  // ---- statements ----

  StmtP parseBlock() {
    SrcLoc loc = cur().loc;
    expect(Tok::LBrace, "'{'");
    std::vector<StmtP> stmts;
    while (!at(Tok::RBrace) && !at(Tok::End)) {
      size_t before = pos_;
      StmtP s = parseStmt();
      if (s) stmts.push_back(s);
      if (pos_ == before) ++pos_;
    }
    expect(Tok::RBrace, "'}'");
    return mkBlock(std::move(stmts), loc);
  }

  StmtP parseStmt() {
    SrcLoc loc = cur().loc;
    if (atIdent("skip")) {
      take();
      expect(Tok::Semi, "';'");
      return mkSkip(loc);
    }
    if (atIdent("if")) return parseIf();
    if (atIdent("for")) {
      take();
      Iterator it = parseIterator();
      StmtP body = parseBlock();
      return mkFor(std::move(it), std::move(body), loc);
    }
    if (atIdent("while")) {
      take();
      ExprP cond = parseExpr();
      StmtP body = parseBlock();
      return mkWhile(std::move(cond), std::move(body), loc);
    }
    if (atIdent("ifSome") || atIdent("whileSome")) {
      bool isWhile = cur().text == "whileSome";
      take();
      std::vector<Iterator> its;
      its.push_back(parseIterator());
      while (accept(Tok::Comma)) its.push_back(parseIterator());
      ExprP cond = accept(Tok::Bar) ? parseExpr()
                                    : mkLit(Value::boolean(true), cur().loc);
      StmtP body = parseBlock();
      return isWhile ? mkWhileSome(std::move(its), cond, body, loc)
                     : mkIfSome(std::move(its), cond, body, loc);
    }
    if (maybeInferAhead()) return parseInferStmt({}, loc);

    // Assignment, multi-assignment, or method-call statement.
    std::vector<ExprP> lhs;
    lhs.push_back(parsePostfix());
    while (accept(Tok::Comma)) lhs.push_back(parsePostfix());
    if (accept(Tok::Assign)) return parseAssignRhs(std::move(lhs), loc);
    if (lhs.size() == 1 && lhs[0] && lhs[0]->kind == Expr::Kind::Call) {
      expect(Tok::Semi, "';' after method call");
      return mkCallStmt(lhs[0]->obj, lhs[0]->name, lhs[0]->elems, loc);
    }
    error("expected ':=' or method call", loc);
    skipToRecover();
    return nullptr;
  }

  StmtP parseIf() {
    SrcLoc loc = cur().loc;
    acceptIdent("if");
    ExprP cond = parseExpr();
    StmtP thenS = parseBlock();
    StmtP elseS = mkSkip(loc);
    if (acceptIdent("else"))
      elseS = atIdent("if") ? parseIf() : parseBlock();
    return mkIf(std::move(cond), std::move(thenS), std::move(elseS), loc);
  }

  // Detects `[name(.name)*.]infer(` ahead without consuming tokens.
  bool maybeInferAhead() const {
    size_t i = pos_;
    auto tk = [&](size_t j) -> const Token& {
      return j < toks_.size() ? toks_[j] : toks_.back();
    };
    while (tk(i).kind == Tok::Ident && tk(i + 1).kind == Tok::Dot &&
           tk(i).text != "infer")
      i += 2;
    return tk(i).kind == Tok::Ident && tk(i).text == "infer" &&
           tk(i + 1).kind == Tok::LParen;
  }

  StmtP parseAssignRhs(std::vector<ExprP> targets, SrcLoc loc) {
    for (const ExprP& t : targets) {
      if (t && t->kind != Expr::Kind::Name && t->kind != Expr::Kind::Field)
        error("assignment target must be a variable or field", t->loc);
    }
    if (atIdent("new")) {
      take();
      std::string cls = expectIdent("class name");
      expect(Tok::Semi, "';'");
      if (targets.size() != 1) {
        error("'new' takes a single target", loc);
        return mkSkip(loc);
      }
      return mkAssignNew(targets[0], cls, loc);
    }
    if (maybeInferAhead()) return parseInferStmt(std::move(targets), loc);
    if (at(Tok::LBrace)) {
      // Set display or comprehension.
      if (targets.size() != 1) {
        error("set expression takes a single target", loc);
      }
      ExprP e = parseBraceExpr();
      expect(Tok::Semi, "';'");
      if (e->kind == Expr::Kind::CompreSrc)
        return mkCompre(targets[0], e->b, e->iters, e->cond, loc);
      return mkAssign(targets[0], e, loc);
    }
    std::vector<ExprP> rhs;
    rhs.push_back(parseExpr());
    while (accept(Tok::Comma)) rhs.push_back(parseExpr());
    expect(Tok::Semi, "';'");
    if (targets.size() == 1 && rhs.size() == 1)
      return mkAssign(targets[0], rhs[0], loc);
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::MultiAssign;
    s->loc = loc;
    s->targets = std::move(targets);
    s->rhsList = std::move(rhs);
    return s;
  }

  StmtP parseInferStmt(std::vector<ExprP> targets, SrcLoc loc) {
    // Receiver chain, if any: name(.name)* before `.infer(`.
    ExprP recv;
    while (!(atIdent("infer") && peek().kind == Tok::LParen)) {
      Token t = take();
      recv = recv ? mkField(recv, t.text, t.loc) : mkName(t.text, t.loc);
      expect(Tok::Dot, "'.'");
    }
    take();  // infer
    expect(Tok::LParen, "'('");
    auto s = std::make_shared<Stmt>();
    s->kind = Stmt::Kind::Infer;
    s->loc = loc;
    s->targets = std::move(targets);
    s->recv = recv;
    bool haveRules = false;
    while (!at(Tok::RParen) && !at(Tok::End)) {
      if (cur().kind == Tok::Ident && peek().kind == Tok::Eq) {
        std::string name = take().text;
        take();  // =
        if (name == "rules") {
          s->ruleset = expectIdent("rule set name");
          haveRules = true;
        } else {
          InferKwarg kw;
          kw.pred = name;
          kw.value = parseExpr();
          s->kwargs.push_back(std::move(kw));
        }
      } else {
        InferQuery q;
        q.loc = cur().loc;
        q.pred = expectIdent("query predicate");
        if (at(Tok::LParen)) {
          take();
          q.hasPattern = true;
          while (!at(Tok::RParen) && !at(Tok::End)) {
            q.pat.push_back(parsePatElem());
            if (!accept(Tok::Comma)) break;
          }
          expect(Tok::RParen, "')'");
        }
        s->queries.push_back(std::move(q));
      }
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RParen, "')'");
    expect(Tok::Semi, "';'");
    if (!haveRules) error("infer requires rules=<name>", loc);
    return s;
  }

  // ---- patterns and iterators ----

  Iterator parseIterator() {
    Iterator it;
    it.pat = parsePattern();
    if (!acceptIdent("in")) error("expected 'in' in iterator", cur().loc);
    it.src = parsePostfixOrAdd();
    return it;
  }

  Pattern parsePattern() {
    Pattern p;
    p.loc = cur().loc;
    if (at(Tok::LParen)) {
      take();
      p.isTuple = true;
      while (!at(Tok::RParen) && !at(Tok::End)) {
        p.elems.push_back(parsePatElem());
        if (!accept(Tok::Comma)) break;
      }
      expect(Tok::RParen, "')'");
      return p;
    }
    p.isTuple = false;
    p.var = parsePostfix();
    if (p.var && p.var->kind != Expr::Kind::Name && p.var->kind != Expr::Kind::Field)
      error("pattern variable must be a name or field", p.loc);
    return p;
  }

  PatElem parsePatElem() {
    PatElem e;
    if (at(Tok::Underscore)) {
      take();
      e.kind = PatElem::Kind::Wildcard;
      return e;
    }
    if (accept(Tok::Eq)) {
      e.kind = PatElem::Kind::Eq;
      e.e = parseAddExpr();
      return e;
    }
    if (at(Tok::LParen)) {
      addDiag(diags_, "E011",
              "nested tuple patterns are not supported; bind a variable and "
              "destructure it",
              cur().loc);
      e.kind = PatElem::Kind::Wildcard;
      skipBalancedParens();
      return e;
    }
    ExprP x = parseAddExpr();
    if (x && x->kind == Expr::Kind::Name) {
      e.kind = PatElem::Kind::Bind;
      e.e = x;
    } else if (x && x->kind == Expr::Kind::Field) {
      e.kind = PatElem::Kind::Bind;
      e.e = x;
    } else {
      e.kind = PatElem::Kind::Expr;
      e.e = x;
    }
    return e;
  }

  void skipBalancedParens() {
    int depth = 0;
    while (!at(Tok::End)) {
      if (at(Tok::LParen)) ++depth;
      if (at(Tok::RParen)) {
        --depth;
        if (depth == 0) {
          take();
          return;
        }
      }
      take();
    }
  }

  // ---- expressions ----

  ExprP parseExpr() { return parseOr(); }

  ExprP parseOr() {
    ExprP a = parseAnd();
    while (atIdent("or")) {
      SrcLoc loc = take().loc;
      a = mkOr(a, parseAnd(), loc);
    }
    return a;
  }

  ExprP parseAnd() {
    ExprP a = parseNot();
    while (atIdent("and")) {
      SrcLoc loc = take().loc;
      a = mkAnd(a, parseNot(), loc);
    }
    return a;
  }

  ExprP parseNot() {
    if (atIdent("not")) {
      SrcLoc loc = take().loc;
      return mkUnary(UnaryOp::Not, parseNot(), loc);
    }
    return parseCmp();
  }

  ExprP parseCmp() {
    ExprP a = parseAddExpr();
    if (atIdent("is")) {
      SrcLoc loc = take().loc;
      return mkBinary(BinaryOp::Is, a, parseAddExpr(), loc);
    }
    if (atIdent("in")) {
      SrcLoc loc = take().loc;
      return mkIn(a, parseAddExpr(), loc);
    }
    if (atIdent("not") && peek().kind == Tok::Ident && peek().text == "in") {
      SrcLoc loc = take().loc;
      take();
      return mkUnary(UnaryOp::Not, mkIn(a, parseAddExpr(), loc), loc);
    }
    if (at(Tok::Lt)) {
      SrcLoc loc = take().loc;
      return mkBinary(BinaryOp::Lt, a, parseAddExpr(), loc);
    }
    return a;
  }

  ExprP parseAddExpr() {
    ExprP a = parsePostfix();
    while (at(Tok::Plus)) {
      SrcLoc loc = take().loc;
      a = mkBinary(BinaryOp::Plus, a, parsePostfix(), loc);
    }
    return a;
  }

  // Iterator sources bind tighter than comparisons but allow '+'.
  ExprP parsePostfixOrAdd() { return parseAddExpr(); }

  ExprP parsePostfix() {
    ExprP e = parsePrimary();
    while (true) {
      if (at(Tok::Dot)) {
        take();
        Token name = expect(Tok::Ident, "member name");
        if (at(Tok::LParen)) {
          take();
          std::vector<ExprP> args;
          while (!at(Tok::RParen) && !at(Tok::End)) {
            args.push_back(parseExpr());
            if (!accept(Tok::Comma)) break;
          }
          expect(Tok::RParen, "')'");
          e = mkCall(e, name.text, std::move(args), name.loc);
        } else {
          e = mkField(e, name.text, name.loc);
        }
        continue;
      }
      break;
    }
    return e;
  }

  ExprP parsePrimary() {
    SrcLoc loc = cur().loc;
    switch (cur().kind) {
      case Tok::Int:
        return mkLit(Value::integer(take().intVal), loc);
      case Tok::Str:
        return mkLit(Value::str(take().text), loc);
      case Tok::LParen: {
        take();
        if (accept(Tok::RParen)) return mkTuple({}, loc);
        ExprP first = parseExpr();
        if (accept(Tok::Comma)) {
          std::vector<ExprP> elems{first};
          if (!at(Tok::RParen)) {
            elems.push_back(parseExpr());
            while (accept(Tok::Comma)) {
              if (at(Tok::RParen)) break;
              elems.push_back(parseExpr());
            }
          }
          expect(Tok::RParen, "')'");
          return mkTuple(std::move(elems), loc);
        }
        expect(Tok::RParen, "')'");
        return first;
      }
      case Tok::LBrace:
        return parseBraceExpr();
      case Tok::Ident:
        break;
      default:
        error("expected expression", loc);
        take();
        return mkLit(Value::none(), loc);
    }

    const std::string word = cur().text;
    if (word == "None") {
      take();
      return mkLit(Value::none(), loc);
    }
    if (word == "True" || word == "False") {
      take();
      return mkLit(Value::boolean(word == "True"), loc);
    }
    if (word == "some" || word == "each") {
      take();
      std::vector<Iterator> its;
      its.push_back(parseIterator());
      while (accept(Tok::Comma)) its.push_back(parseIterator());
      ExprP cond =
          accept(Tok::Bar) ? parseExpr() : mkLit(Value::boolean(true), loc);
      return word == "some" ? mkSome(std::move(its), cond, loc)
                            : mkEach(std::move(its), cond, loc);
    }
    if (isBuiltinCallName(word) &&
        (peek().kind == Tok::LParen || peek().kind == Tok::LBrace)) {
      return parseBuiltinCall();
    }
    take();
    return mkName(word, loc);
  }

  ExprP parseBuiltinCall() {
    SrcLoc loc = cur().loc;
    std::string name = take().text;
    auto aggOf = [&]() {
      return name == "count"  ? AggKind::Count
             : name == "sum"  ? AggKind::Sum
             : name == "max"  ? AggKind::Max
                              : AggKind::Min;
    };
    if (name == "count" || name == "sum" || name == "max" || name == "min") {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::Agg;
      e->loc = loc;
      e->agg = aggOf();
      if (at(Tok::LBrace)) {
        e->a = parseBraceExpr();
      } else {
        expect(Tok::LParen, "'('");
        e->a = parseExpr();
        expect(Tok::RParen, "')'");
      }
      return e;
    }
    expect(Tok::LParen, "'('");
    std::vector<ExprP> args;
    while (!at(Tok::RParen) && !at(Tok::End)) {
      if (name == "isinstance" && args.size() == 1 && cur().kind == Tok::Ident) {
        args.push_back(mkName(take().text, loc));
      } else {
        args.push_back(parseExpr());
      }
      if (!accept(Tok::Comma)) break;
    }
    expect(Tok::RParen, "')'");
    auto arity = [&](size_t n) {
      if (args.size() != n)
        error(name + " takes " + std::to_string(n) + " argument(s)", loc);
      while (args.size() < n) args.push_back(mkLit(Value::none(), loc));
    };
    if (name == "len") {
      arity(1);
      return mkUnary(UnaryOp::Len, args[0], loc);
    }
    if (name == "isTuple") {
      arity(1);
      return mkUnary(UnaryOp::IsTuple, args[0], loc);
    }
    if (name == "select") {
      arity(2);
      return mkBinary(BinaryOp::Select, args[0], args[1], loc);
    }
    if (name == "plus") {
      arity(2);
      return mkBinary(BinaryOp::Plus, args[0], args[1], loc);
    }
    if (name == "lt") {
      arity(2);
      return mkBinary(BinaryOp::Lt, args[0], args[1], loc);
    }
    // isinstance
    arity(2);
    std::string cls =
        args[1] && args[1]->kind == Expr::Kind::Name ? args[1]->name : "?";
    if (cls == "?") error("isinstance expects a class name", loc);
    return mkIsInstance(args[0], cls, loc);
  }

  // `{ ... }`: set display, or comprehension when a ':' follows the first
  // expression.
  ExprP parseBraceExpr() {
    SrcLoc loc = cur().loc;
    expect(Tok::LBrace, "'{'");
    if (accept(Tok::RBrace)) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::SetDisplay;
      e->loc = loc;
      return e;
    }
    ExprP first = parseExpr();
    if (accept(Tok::Colon)) {
      auto e = std::make_shared<Expr>();
      e->kind = Expr::Kind::CompreSrc;
      e->loc = loc;
      e->b = first;
      e->iters.push_back(parseIterator());
      while (accept(Tok::Comma)) e->iters.push_back(parseIterator());
      e->cond = accept(Tok::Bar) ? parseExpr() : mkLit(Value::boolean(true), loc);
      expect(Tok::RBrace, "'}'");
      return e;
    }
    auto e = std::make_shared<Expr>();
    e->kind = Expr::Kind::SetDisplay;
    e->loc = loc;
    e->elems.push_back(first);
    while (accept(Tok::Comma)) {
      if (at(Tok::RBrace)) break;
      e->elems.push_back(parseExpr());
    }
    expect(Tok::RBrace, "'}'");
    return e;
  }
};

}  // namespace

ParseResult parseProgramRaw(const std::string& src) {
  ParseResult res;
  std::vector<Token> toks = lex(src, res.diags);
  Parser p(std::move(toks), res.diags);
  res.program = p.parse();
  return res;
}

ParseResult parseProgram(const std::string& src) {
  ParseResult res = parseProgramRaw(src);
  if (!res.diags.empty()) return res;
  resolveProgram(res.program, res.diags);
  if (res.diags.empty()) checkWellFormed(res.program, res.diags);
  return res;
}

}  // namespace rli
