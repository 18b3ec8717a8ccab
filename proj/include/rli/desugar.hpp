#pragma once

#include <map>
#include <string>

#include "rli/ast.hpp"

namespace rli {

/// Fresh-name generator for desugaring temporaries ("$t1", "$t2", ...).
/// '$' cannot appear in source identifiers, so the names never collide with
/// user variables, and each generated name is unique per run.
class FreshNamer {
public:
  std::string next() { return "$t" + std::to_string(++n_); }
  int used() const { return n_; }

private:
  int n_ = 0;
};

/// The desugaring passes, applied in this order by desugarProgram:
///
///  0. normalizeSurface  - multiple assignment, set displays and aggregates
///                         as assignment sources, membership tests, nesting
///                         of multi-iterator quantifiers, and =-marking of
///                         repeated variables in one iterator group (joins)
///  1. elimBool          - 'and' via not/or, 'each' via not/some
///  2. elimGlobals       - global variables become fields of the globals
///                         object
///  3. normalizePatterns - non-constant expression components of loop
///                         patterns move to a prelude assignment and an
///                         =-component; wildcards become fresh variables
///                         (except in queries, where pass 4 handles them)
///  4. elimInferPatterns - query patterns become whole-predicate queries
///                         into a temporary plus a projection comprehension
///  5. elimSomeLoops     - ifSome/whileSome via a found-flag, loops over the
///                         sources binding fresh primed variables, and
///                         witness assignments
///  6. elimComprehensions- comprehension statements via a new set, nested
///                         loops, and conditional add
///  7. elimIteratorTuples- tuple patterns in loops and quantifiers via a
///                         fresh element variable, isTuple/len/select tests,
///                         and per-component assignments (loops) or
///                         substitution (quantifiers)
///
/// Each pass returns a structurally fresh program; rule sets are untouched.
Program normalizeSurface(const Program& p, FreshNamer& fresh);
Program elimBool(const Program& p, FreshNamer& fresh);
Program elimGlobals(const Program& p, FreshNamer& fresh);
Program normalizePatterns(const Program& p, FreshNamer& fresh);
Program elimInferPatterns(const Program& p, FreshNamer& fresh);
Program elimSomeLoops(const Program& p, FreshNamer& fresh);
Program elimComprehensions(const Program& p, FreshNamer& fresh);
Program elimIteratorTuples(const Program& p, FreshNamer& fresh);

/// All passes in order. The result is a core program: countSugaredNodes
/// returns 0 and only core constructs remain.
Program desugarProgram(const Program& p, FreshNamer& fresh);

/// Number of surface-only constructs remaining in a program: and/each,
/// membership tests, global variable expressions, aggregates, set displays,
/// multiple assignment, comprehensions, ifSome/whileSome, query patterns,
/// tuple patterns and wildcards in iterators, and multi-iterator
/// quantifiers. A core program has none.
int countSugaredNodes(const Program& p);

/// Substitution maps keyed by the printed form of a whole expression
/// (e.g. "x", "self", "@0.y"). Substitution is pre-order: a node whose
/// printed form matches a key is replaced without descending, so
/// replacements are never rewritten and compound names win over prefixes.
using SubstMap = std::map<std::string, ExprP>;

/// Replaces every sub-expression whose printed form is a key of m.
ExprP substituteExpr(const ExprP& e, const SubstMap& m);

/// Applies substituteExpr to every expression slot of a statement,
/// recursing through nested statements, iterators, and query patterns.
StmtP substituteStmt(const StmtP& s, const SubstMap& m);

}  // namespace rli
