#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "rli/ast.hpp"

namespace rli {

/// Classification of one rule set's predicates plus its transitive
/// dependency map. Predicates are identified by PredRef::key().
///
/// A predicate that appears in some conclusion is derived; all others are
/// base. Orthogonally, a predicate is either a rule-set parameter (bound
/// per call) or a variable predicate (a global-object field or self-field
/// whose value is maintained in the heap).
struct RuleSetInfo {
  RuleSetDecl decl;
  std::set<std::string> basePredParams;
  std::set<std::string> basePredVars;
  std::set<std::string> derivedPredParams;
  std::set<std::string> derivedPredVars;
  /// derived predicate -> every predicate it depends on, transitively
  /// (base and derived alike; contains the predicate itself when its
  /// rules are recursive).
  std::map<std::string, std::set<std::string>> dependency;
  /// key -> a representative reference, for display.
  std::map<std::string, PredRef> preds;

  std::set<std::string> basePreds() const;
  std::set<std::string> derivedPreds() const;
};

/// Partition the rule set's predicates and close the dependency relation.
RuleSetInfo classify(const RuleSetDecl& rs);

/// True iff every base predicate that `derived` transitively depends on
/// is in `given`. A derived predicate with no base dependencies (e.g. one
/// defined only by fact rules) fully depends on any set.
bool fullyDepends(const RuleSetInfo& info, const std::string& derived,
                  const std::set<std::string>& given);

/// Keep exactly the rules whose conclusion predicate depends on no base
/// predicate outside `known`. A derived predicate used as a hypothesis is
/// fine: its own defining rules satisfy the same criterion, so the whole
/// sub-derivation is kept or dropped together. Input order is preserved.
std::vector<Rule> slice(const std::vector<Rule>& rules,
                        const std::set<std::string>& known);

/// A rule set whose self-field predicates have been bound to a concrete
/// receiver address. Parameters and already-concrete fields pass through.
struct InstRuleSet {
  std::vector<Rule> rules;
  std::string origin;  // declaring class name, or "global"
};

InstRuleSet instantiate(const RuleSetDecl& rs, Addr receiver,
                        std::string origin);

/// Bottom-up evaluation order. Each stratum lists predicate keys whose
/// rules may be evaluated once every lower stratum is complete; negated
/// hypotheses always refer to strictly lower strata. `ok` is false when
/// no such order exists, i.e. some dependency cycle passes through a
/// negated hypothesis.
struct Stratification {
  bool ok = true;
  std::vector<std::vector<std::string>> strata;

  /// Index of the stratum containing `pred`, or -1.
  int stratumOf(const std::string& pred) const;
};

Stratification stratify(const std::vector<Rule>& rules);

}  // namespace rli
