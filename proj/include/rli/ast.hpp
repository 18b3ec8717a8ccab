#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "rli/value.hpp"

namespace rli {

struct SrcLoc {
  int line = 0;
  int col = 0;
  bool valid() const { return line > 0; }
};

struct Expr;
struct Stmt;
using ExprP = std::shared_ptr<const Expr>;
using StmtP = std::shared_ptr<const Stmt>;

enum class UnaryOp { Not, IsTuple, Len };
enum class BinaryOp { Is, Plus, Lt, Select };
enum class AggKind { Count, Sum, Max, Min };

/// Tuple-pattern component.
///   Bind      x        binds the variable (an lvalue after resolution)
///   Eq        =x / =e  must equal the value of the expression
///   Wildcard  _        matches anything
///   Expr      e        surface form; normalized to Eq on a fresh variable
struct PatElem {
  enum class Kind { Bind, Eq, Wildcard, Expr };
  Kind kind = Kind::Wildcard;
  ExprP e;  // Bind: lvalue expr; Eq/Expr: arbitrary expr; Wildcard: null
};

/// Iterator `pattern in expr`. A pattern is either a single variable
/// (lvalue) or a tuple of components.
struct Pattern {
  bool isTuple = false;
  ExprP var;                   // single-variable form
  std::vector<PatElem> elems;  // tuple form
  SrcLoc loc;
};

struct Iterator {
  Pattern pat;
  ExprP src;
};

struct Expr {
  enum class Kind {
    Lit,         // value (literals; addresses after substitution)
    Name,        // unresolved identifier (parser output only)
    Param,       // method/function parameter, substituted at call time
    Global,      // resolved global variable (eliminated by desugaring)
    Field,       // obj.field instance variable
    Tuple,       // (e1, ..., en)
    Call,        // recv.method(args) -- pure built-ins and defun functions
    Unary,       // not / isTuple / len
    Binary,      // is / plus / lt / select
    IsInstance,  // isinstance(e, className)
    And,         // surface only; desugared
    Or,
    Some,  // some iterators | cond
    Each,  // surface only; desugared
    In,    // surface only; e1 in e2 membership test
    Agg,   // surface only; aggregate over a set expression (RHS position)
    SetDisplay,  // surface only; {e1, ..., en} (RHS position)
    CompreSrc,   // surface only; comprehension used as an aggregate payload
  };

  Kind kind;
  SrcLoc loc;

  Value lit;                       // Lit
  std::string name;                // Name/Param/Global/Field(method)/IsInstance(class)
  ExprP obj;                       // Field: object; Call: receiver
  std::vector<ExprP> elems;        // Tuple/SetDisplay elems, Call args
  UnaryOp uop = UnaryOp::Not;      // Unary
  BinaryOp bop = BinaryOp::Is;     // Binary
  ExprP a, b;  // Unary(a), Binary(a,b), And/Or/In(a,b), IsInstance(a), Agg(a),
               // CompreSrc result in b
  std::vector<Iterator> iters;     // Some/Each/CompreSrc
  ExprP cond;                      // Some/Each/CompreSrc condition
  AggKind agg = AggKind::Count;    // Agg
};

ExprP mkLit(Value v, SrcLoc loc = {});
ExprP mkName(std::string n, SrcLoc loc = {});
ExprP mkParam(std::string n, SrcLoc loc = {});
ExprP mkGlobal(std::string n, SrcLoc loc = {});
ExprP mkField(ExprP obj, std::string f, SrcLoc loc = {});
ExprP mkTuple(std::vector<ExprP> elems, SrcLoc loc = {});
ExprP mkCall(ExprP recv, std::string m, std::vector<ExprP> args, SrcLoc loc = {});
ExprP mkUnary(UnaryOp op, ExprP a, SrcLoc loc = {});
ExprP mkBinary(BinaryOp op, ExprP a, ExprP b, SrcLoc loc = {});
ExprP mkIsInstance(ExprP a, std::string cls, SrcLoc loc = {});
ExprP mkAnd(ExprP a, ExprP b, SrcLoc loc = {});
ExprP mkOr(ExprP a, ExprP b, SrcLoc loc = {});
ExprP mkSome(std::vector<Iterator> its, ExprP cond, SrcLoc loc = {});
ExprP mkEach(std::vector<Iterator> its, ExprP cond, SrcLoc loc = {});
ExprP mkIn(ExprP elem, ExprP coll, SrcLoc loc = {});

/// Field of the globals object: the desugared form of a global variable.
ExprP mkGlobalsField(const std::string& name, SrcLoc loc = {});

struct InferQuery {
  std::string pred;
  bool hasPattern = false;
  std::vector<PatElem> pat;
  SrcLoc loc;
};

struct InferKwarg {
  std::string pred;
  ExprP value;
};

struct Stmt {
  enum class Kind {
    Skip,
    Assign,       // target := rhs
    AssignNew,    // target := new className
    Compre,       // target := { result : iterators | cond }
    MultiAssign,  // surface only; targets := rhs list or single tuple expr
    Seq,          // a; b
    If,           // if cond { then } else { els }
    For,          // for iterator { body }
    ForInTuple,   // internal unrolled loop over a frozen linearization
    While,        // while cond { body }
    IfSome,       // ifSome iterators | cond { body }
    WhileSome,    // whileSome iterators | cond { body }
    Call,         // recv.method(args)
    Infer,        // targets := recv.infer(queries, kwargs, rules=name)
    Return,       // internal marker appended to inlined method bodies
  };

  Kind kind;
  SrcLoc loc;

  ExprP target;                 // Assign/AssignNew/Compre
  ExprP rhs;                    // Assign
  std::string className;        // AssignNew
  std::vector<ExprP> targets;   // MultiAssign/Infer
  std::vector<ExprP> rhsList;   // MultiAssign
  ExprP result;                 // Compre result expression
  std::vector<Iterator> iters;  // Compre/For(1)/IfSome/WhileSome
  ExprP cond;                   // If/While/IfSome/WhileSome/Compre
  StmtP a, b;                   // Seq(a,b), If(a=then,b=else), loop body in a
  ExprP recv;                   // Call/Infer receiver (Infer: may be null)
  std::string method;           // Call
  std::vector<ExprP> args;      // Call
  std::vector<InferQuery> queries;  // Infer
  std::vector<InferKwarg> kwargs;   // Infer
  std::string ruleset;              // Infer
  // ForInTuple payload: remaining values of the frozen linearization.
  std::shared_ptr<const std::vector<Value>> values;
  size_t offset = 0;
};

StmtP mkSkip(SrcLoc loc = {});
StmtP mkAssign(ExprP target, ExprP rhs, SrcLoc loc = {});
StmtP mkAssignNew(ExprP target, std::string cls, SrcLoc loc = {});
StmtP mkCompre(ExprP target, ExprP result, std::vector<Iterator> its, ExprP cond,
               SrcLoc loc = {});
StmtP mkSeq(StmtP a, StmtP b);
/// Folds a statement list into nested Seq; empty list yields skip.
StmtP mkBlock(std::vector<StmtP> stmts, SrcLoc loc = {});
StmtP mkIf(ExprP cond, StmtP thenS, StmtP elseS, SrcLoc loc = {});
StmtP mkFor(Iterator it, StmtP body, SrcLoc loc = {});
StmtP mkForInTuple(ExprP var, std::shared_ptr<const std::vector<Value>> values,
                   size_t offset, StmtP body, SrcLoc loc = {});
StmtP mkWhile(ExprP cond, StmtP body, SrcLoc loc = {});
StmtP mkIfSome(std::vector<Iterator> its, ExprP cond, StmtP body, SrcLoc loc = {});
StmtP mkWhileSome(std::vector<Iterator> its, ExprP cond, StmtP body, SrcLoc loc = {});
StmtP mkCallStmt(ExprP recv, std::string m, std::vector<ExprP> args, SrcLoc loc = {});
StmtP mkReturn(SrcLoc loc = {});

/// Predicate reference inside a rule.
struct PredRef {
  enum class Kind {
    Name,       // unresolved bare name (parser output)
    Param,      // rule-set-local predicate, declared in the header
    SelfField,  // self.f (class rule sets)
    Global,     // resolved global (eliminated by desugaring)
    Field,      // concrete addr.field (post-desugar globals / instantiation)
  };
  Kind kind = Kind::Name;
  std::string name;
  Addr addr = 0;

  bool operator==(const PredRef& o) const {
    return kind == o.kind && name == o.name && addr == o.addr;
  }
  /// Stable identity string, also used as an engine predicate key.
  std::string key() const;
};

struct RuleArg {
  bool isVar = false;
  std::string var;  // logic variable (lowercase identifier)
  Value lit;
  SrcLoc loc;
};

struct RuleAtom {
  PredRef pred;
  std::vector<RuleArg> args;
  SrcLoc loc;
};

struct RuleHyp {
  bool negated = false;
  RuleAtom atom;
};

struct Rule {
  RuleAtom head;
  std::vector<RuleHyp> hyps;
  SrcLoc loc;
};

struct RuleSetDecl {
  std::string name;
  std::vector<std::string> params;  // rule-set-local predicate names
  std::vector<Rule> rules;
  SrcLoc loc;
};

struct MethodDecl {
  bool isFunction = false;  // defun: expression body, usable in expressions
  std::string name;
  std::vector<std::string> params;
  StmtP body;    // def
  ExprP fnBody;  // defun
  SrcLoc loc;
};

struct ClassDecl {
  std::string name;
  std::string base;  // empty if none
  std::vector<RuleSetDecl> rulesets;
  std::vector<MethodDecl> methods;
  SrcLoc loc;
};

struct Program {
  std::vector<RuleSetDecl> rulesets;  // global scope
  std::vector<ClassDecl> classes;
  StmtP main;
};

bool equalExpr(const ExprP& a, const ExprP& b);
bool equalStmt(const StmtP& a, const StmtP& b);
bool equalProgram(const Program& a, const Program& b);

}  // namespace rli
