#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "rli/ast.hpp"
#include "rli/engine.hpp"
#include "rli/mode.hpp"
#include "rli/rules.hpp"
#include "rli/value.hpp"

namespace rli {

/// A heap object: a user-class instance (named fields), a set, or a
/// sequence. The heap-type map reads "set" iff Set, "sequence" iff Seq,
/// and a class name iff Fields.
struct HeapObject {
  enum class Kind { Fields, Set, Seq };
  Kind kind = Kind::Fields;
  std::map<std::string, Value> fields;  // Fields
  ValueSet set;                         // Set
  std::vector<Value> seq;               // Seq
};


struct MachineOptions {
  AliasMode mode = AliasMode::NoAlias;
  /// Counts statement transitions, expression-function calls, and
  /// quantifier disjuncts; exceeding it yields Outcome::Kind::Budget.
  std::uint64_t stepBudget = 100'000'000;
  /// Guards the host stack against runaway expression-function
  /// recursion; counts nested evaluator frames.
  int exprDepthLimit = 20'000;
  /// Test instrumentation: snapshot heap and types every time a
  /// maintenance pass runs (the pass's input state).
  bool recordMaintenanceInput = false;
};

struct Counters {
  std::uint64_t steps = 0;
  std::uint64_t maintenanceRuns = 0;
  std::uint64_t inferCalls = 0;
};

struct Outcome {
  enum class Kind { Running, Done, Error, Budget };
  Kind kind = Kind::Running;
  std::string message;
  SrcLoc loc;
};

/// One rule set active on the maintenance stack: receiver-bound rules
/// plus their classification.
struct ActiveRuleSet {
  InstRuleSet inst;
  RuleSetInfo info;
};

/// The heap/type snapshot a maintenance pass read as its input.
struct MaintenanceInput {
  std::vector<HeapObject> heap;
  std::vector<std::string> types;
};

/// Small-step interpreter for core programs: heap, heap-type map, rule-set
/// stack (bottom entry holds the instantiated global rule sets and is
/// never popped), and a control stack of pending statements. Derived
/// predicate variables are maintained automatically at heap-mutating
/// transitions; all rule sets of one pass read the same pre-state, like a
/// single parallel assignment.
class Machine {
 public:
  explicit Machine(Program core, MachineOptions opts = {});
  Machine(const Machine&) = delete;
  Machine& operator=(const Machine&) = delete;

  /// Assigns a relation to a globals-object field through the ordinary
  /// assignment path (fresh set object, legality check, gated
  /// maintenance). Arity-1 rows bind as bare elements, wider rows as
  /// tuples. Call before run().
  void bindGlobal(const std::string& field, const Relation& rel);

  /// Runs until done, error, or budget exhaustion.
  Outcome run();
  /// Executes exactly one observable transition (or finishes).
  Outcome stepOnce();
  bool finished() const { return outcome_.kind != Outcome::Kind::Running; }
  const Outcome& outcome() const { return outcome_; }

  // ---- inspection ----
  const Counters& counters() const { return counters_; }
  std::size_t heapSize() const { return heap_.size(); }
  const HeapObject& object(Addr a) const { return heap_.at(a); }
  const std::string& typeOf(Addr a) const { return types_.at(a); }
  std::optional<Value> globalField(const std::string& f) const;
  /// Contents of the set/sequence at `a` (sets in canonical order).
  std::vector<Value> contentsOf(Addr a) const;
  const std::vector<std::vector<ActiveRuleSet>>& stack() const {
    return frames_;
  }
  /// True when the previous maintenance pass changed the heap, forcing
  /// another pass at the next heap-mutating transition.
  bool maintenancePending() const { return dirty_; }
  /// Whether the most recent stepOnce (or bindGlobal) ran maintenance.
  bool lastStepMaintained() const { return lastStepMaintained_; }
  const std::optional<MaintenanceInput>& lastMaintenanceInput() const {
    return lastMaintInput_;
  }
  /// Globals-object fields that are derived predicates of class rule
  /// sets; maintenance sets them to None while no stacked frame derives
  /// them.
  const std::set<std::string>& classDerivedGlobals() const {
    return classDerivedGlobals_;
  }

 private:
  struct Fault {
    std::string msg;
    SrcLoc loc;
  };
  struct BudgetFault {};
  /// Deferred writes of one substitution pass, merged topmost-last so
  /// upper stack frames take precedence per field and per address.
  struct WriteSet {
    std::map<std::pair<Addr, std::string>, Value> fields;
    std::map<Addr, ValueSet> setRewrites;  // in-place relation updates
    std::set<std::pair<Addr, std::string>> covered;
  };
  struct InfSubOut {
    WriteSet writes;
    std::map<std::string, Relation> result;  // defined derived predicates
  };

  [[noreturn]] void fault(std::string msg, SrcLoc loc) const;
  void tick();
  Addr alloc(HeapObject obj, std::string type);
  Addr allocSetFrom(const Relation& rel);
  const ClassDecl* findClass(const std::string& name) const;
  const MethodDecl* findMethod(const std::string& cls,
                               const std::string& m) const;
  std::pair<const RuleSetDecl*, std::string> findRuleSet(
      const std::string& cls, const std::string& name) const;
  ActiveRuleSet activate(const RuleSetDecl& rs, Addr recv,
                         std::string origin) const;
  std::vector<ActiveRuleSet> buildClassFrame(const std::string& cls,
                                             Addr recv) const;

  Value evalExpr(const ExprP& e, int depth);
  Value evalSome(const ExprP& e, int depth);
  Value evalCallExpr(const ExprP& e, int depth);
  std::vector<Value> linearize(Addr a, SrcLoc loc) const;

  void exec(const StmtP& s);
  void execCall(const StmtP& s);
  void execInfer(const StmtP& s);

  void checkLegalAssign(Addr a, const std::string& f, SrcLoc loc) const;
  bool isStackedBaseField(Addr a, const std::string& f) const;
  bool aliasesStackedBaseValue(Addr target) const;
  void maybeMaintain(bool relevant, SrcLoc loc);
  void maintainNow(SrcLoc loc);
  InfSubOut infSub(const ActiveRuleSet& ars,
                   const std::map<std::string, Value>& args,
                   SrcLoc loc);
  bool applyWrites(const WriteSet& ws);
  std::set<Addr> mutableAddrs() const;

  Program prog_;
  MachineOptions opts_;
  std::vector<HeapObject> heap_;
  std::vector<std::string> types_;
  std::vector<std::vector<ActiveRuleSet>> frames_;
  std::vector<StmtP> control_;  // back = next to execute
  Counters counters_;
  Outcome outcome_;
  bool dirty_ = false;
  bool lastStepMaintained_ = false;
  std::optional<MaintenanceInput> lastMaintInput_;
  std::set<std::string> classDerivedGlobals_;
  std::set<std::string> globalDerivedFields_;
  std::map<std::string, std::set<std::string>> derivedSelfFields_;
  std::map<std::string, const ClassDecl*> classIndex_;
};

}  // namespace rli
