#pragma once

#include <map>
#include <set>
#include <stdexcept>
#include <string>
#include <unordered_set>
#include <vector>

#include "rli/ast.hpp"
#include "rli/value.hpp"

namespace rli {

/// A finite relation: ground rows of one fixed arity. Rows are unordered
/// internally; use sortedRows() for canonical output.
struct Relation {
  size_t arity = 0;
  std::unordered_set<Row, RowHash, RowEq> rows;

  bool contains(const Row& r) const { return rows.count(r) != 0; }
  bool insert(Row r) { return rows.insert(std::move(r)).second; }
  size_t size() const { return rows.size(); }
  bool empty() const { return rows.empty(); }

  std::vector<Row> sortedRows() const;

  bool operator==(const Relation& o) const {
    return arity == o.arity && rows == o.rows;
  }
};

/// One evaluation request: rules whose predicates are fully named (their
/// PredRef::key() is the relation name), plus the contents of every base
/// predicate. Rows must be ground; addresses of mutable collections are
/// rejected (membership of a set/sequence address in `mutableAddrs` marks
/// it mutable), since rows containing them would not denote fixed values.
struct EngineInput {
  std::vector<Rule> rules;
  std::map<std::string, Relation> facts;
  std::set<Addr> mutableAddrs;
};

/// Evaluation result: the true atoms of every predicate (base predicates
/// pass through), and — only under well-founded evaluation — the atoms
/// whose truth is undefined. The two are disjoint per predicate.
struct EngineOutput {
  std::map<std::string, Relation> extensions;
  std::map<std::string, Relation> undefinedAtoms;
};

struct EngineError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Thrown by the naive and semi-naive evaluators when some dependency
/// cycle passes through a negated hypothesis.
struct NotStratifiedError : EngineError {
  NotStratifiedError() : EngineError("rules are not stratifiable") {}
};

/// Reference evaluator: stratum by stratum, recompute every rule's matches
/// from the full relations until nothing new appears. No indexes, no
/// deltas — slow and obviously correct.
EngineOutput evalNaive(const EngineInput& in);

/// Production evaluator: same strata, but after the first round each rule
/// only joins combinations that touch the previous round's delta, probing
/// hash indexes built per (predicate, bound-position set) on demand.
/// Produces identical extensions to evalNaive on every input.
EngineOutput evalSemiNaive(const EngineInput& in);

/// Alternating-fixpoint evaluator for arbitrary negation. On stratifiable
/// input it coincides with evalNaive and reports no undefined atoms; on
/// non-stratifiable input the atoms with no two-valued truth value are
/// reported in undefinedAtoms.
EngineOutput evalWellFounded(const EngineInput& in);

}  // namespace rli
