#include "rli/runtime.hpp"

#include <algorithm>
#include <optional>
#include <utility>

#include "rli/desugar.hpp"
#include "rli/pretty.hpp"

namespace rli {

namespace {

/// Set elements <-> relation rows. An arity-1 relation holds its elements
/// raw; a wider one holds n-tuples, and elements of any other shape match
/// no rule atom of that arity, so they contribute no row.
Relation relationFromElements(const ValueSet& s, size_t arity) {
  Relation r;
  r.arity = arity;
  for (const Value& v : s) {
    if (arity == 1) {
      r.insert({v});
    } else if (arity == 0) {
      r.insert({});
    } else if (v.isTuple() && v.asTuple().size() == arity) {
      r.insert(Row(v.asTuple()));
    }
  }
  return r;
}

ValueSet elementsFromRelation(const Relation& r) {
  ValueSet s;
  for (const Row& row : r.rows)
    s.insert(row.size() == 1 ? row[0] : Value::tuple(row));
  return s;
}

/// Predicate key -> atom arity, from every atom of the rule set.
std::map<std::string, size_t> atomArities(const RuleSetInfo& info) {
  std::map<std::string, size_t> m;
  for (const Rule& r : info.decl.rules) {
    m.emplace(r.head.pred.key(), r.head.args.size());
    for (const RuleHyp& h : r.hyps)
      m.emplace(h.atom.pred.key(), h.atom.args.size());
  }
  return m;
}

bool sameValueSet(const ValueSet& a, const ValueSet& b) {
  return a.size() == b.size() &&
         std::equal(a.begin(), a.end(), b.begin(),
                    [](const Value& x, const Value& y) {
                      return compareValues(x, y) == 0;
                    });
}

std::string addrText(Addr a) { return "@" + std::to_string(a); }

}  // namespace

// ----------------------------------------------------------- construction

Machine::Machine(Program core, MachineOptions opts)
    : prog_(std::move(core)), opts_(opts) {
  alloc(HeapObject{}, "$globals");
  for (const ClassDecl& c : prog_.classes) classIndex_.emplace(c.name, &c);

  // Derived-predicate tables for assignment legality and for the
  // None-reset of globals derived only by (possibly unstacked) class
  // rule sets.
  auto scanRuleSet = [this](const RuleSetDecl& rs, const ClassDecl* owner) {
    RuleSetInfo info = classify(rs);
    for (const std::string& k : info.derivedPredVars) {
      const PredRef& pr = info.preds.at(k);
      if (pr.kind == PredRef::Kind::Field && pr.addr == kGlobalsAddr) {
        globalDerivedFields_.insert(pr.name);
        if (owner) classDerivedGlobals_.insert(pr.name);
      } else if (pr.kind == PredRef::Kind::SelfField && owner) {
        derivedSelfFields_[owner->name].insert(pr.name);
      }
    }
  };
  for (const RuleSetDecl& rs : prog_.rulesets) scanRuleSet(rs, nullptr);
  for (const ClassDecl& c : prog_.classes)
    for (const RuleSetDecl& rs : c.rulesets) scanRuleSet(rs, &c);

  std::vector<ActiveRuleSet> bottom;
  for (const RuleSetDecl& rs : prog_.rulesets)
    bottom.push_back(activate(rs, kGlobalsAddr, "global"));
  frames_.push_back(std::move(bottom));

  if (prog_.main) control_.push_back(prog_.main);

  // Startup maintenance: derived globals with unknown bases come up as
  // None rather than as missing fields.
  try {
    maintainNow({});
  } catch (const Fault& f) {
    outcome_ = {Outcome::Kind::Error, f.msg, f.loc};
  } catch (const BudgetFault&) {
    outcome_ = {Outcome::Kind::Budget, "step budget exhausted", {}};
  }
}

void Machine::fault(std::string msg, SrcLoc loc) const {
  throw Fault{std::move(msg), loc};
}

void Machine::tick() {
  if (++counters_.steps > opts_.stepBudget) throw BudgetFault{};
}

Addr Machine::alloc(HeapObject obj, std::string type) {
  heap_.push_back(std::move(obj));
  types_.push_back(std::move(type));
  return static_cast<Addr>(heap_.size() - 1);
}

Addr Machine::allocSetFrom(const Relation& rel) {
  HeapObject o;
  o.kind = HeapObject::Kind::Set;
  o.set = elementsFromRelation(rel);
  return alloc(std::move(o), "set");
}

// ----------------------------------------------------------------- lookup

const ClassDecl* Machine::findClass(const std::string& name) const {
  auto it = classIndex_.find(name);
  return it == classIndex_.end() ? nullptr : it->second;
}

const MethodDecl* Machine::findMethod(const std::string& cls,
                                      const std::string& m) const {
  std::string c = cls;
  for (int depth = 0; depth < 1000; ++depth) {
    const ClassDecl* cd = findClass(c);
    if (!cd) return nullptr;
    for (const MethodDecl& md : cd->methods)
      if (md.name == m) return &md;
    if (cd->base.empty()) return nullptr;
    c = cd->base;
  }
  return nullptr;
}

std::pair<const RuleSetDecl*, std::string> Machine::findRuleSet(
    const std::string& cls, const std::string& name) const {
  std::string c = cls;
  for (int depth = 0; depth < 1000; ++depth) {
    const ClassDecl* cd = findClass(c);
    if (!cd) return {nullptr, ""};
    for (const RuleSetDecl& rs : cd->rulesets)
      if (rs.name == name) return {&rs, c};
    if (cd->base.empty()) return {nullptr, ""};
    c = cd->base;
  }
  return {nullptr, ""};
}

ActiveRuleSet Machine::activate(const RuleSetDecl& rs, Addr recv,
                                std::string origin) const {
  ActiveRuleSet a;
  a.inst = instantiate(rs, recv, std::move(origin));
  RuleSetDecl bound = rs;
  bound.rules = a.inst.rules;
  a.info = classify(bound);
  return a;
}

std::vector<ActiveRuleSet> Machine::buildClassFrame(const std::string& cls,
                                                    Addr recv) const {
  std::vector<ActiveRuleSet> out;
  std::set<std::string> seen;
  std::string c = cls;
  for (int depth = 0; depth < 1000; ++depth) {
    const ClassDecl* cd = findClass(c);
    if (!cd) break;
    for (const RuleSetDecl& rs : cd->rulesets)
      if (seen.insert(rs.name).second) out.push_back(activate(rs, recv, c));
    if (cd->base.empty()) break;
    c = cd->base;
  }
  return out;
}

// ------------------------------------------------------------- inspection

std::optional<Value> Machine::globalField(const std::string& f) const {
  const auto& fm = heap_.at(kGlobalsAddr).fields;
  auto it = fm.find(f);
  if (it == fm.end()) return std::nullopt;
  return it->second;
}

std::vector<Value> Machine::contentsOf(Addr a) const {
  const HeapObject& ho = heap_.at(a);
  if (ho.kind == HeapObject::Kind::Set)
    return std::vector<Value>(ho.set.begin(), ho.set.end());
  if (ho.kind == HeapObject::Kind::Seq) return ho.seq;
  return {};
}

// ------------------------------------------------------------ expressions

std::vector<Value> Machine::linearize(Addr a, SrcLoc loc) const {
  const HeapObject& ho = heap_.at(a);
  if (ho.kind == HeapObject::Kind::Set)
    return std::vector<Value>(ho.set.begin(), ho.set.end());
  if (ho.kind == HeapObject::Kind::Seq) return ho.seq;
  fault("stuck: iteration over " + addrText(a) + ", a " + types_.at(a) +
            " object",
        loc);
}

Value Machine::evalExpr(const ExprP& e, int depth) {
  if (!e) fault("internal: missing expression", {});
  if (depth > opts_.exprDepthLimit)
    fault("expression nesting too deep", e->loc);
  switch (e->kind) {
    case Expr::Kind::Lit:
      return e->lit;
    case Expr::Kind::Param:
      fault("stuck: unbound parameter '" + e->name + "'", e->loc);
    case Expr::Kind::Field: {
      Value o = evalExpr(e->obj, depth + 1);
      if (!o.isAddress())
        fault("stuck: field access on a non-object value", e->loc);
      Addr a = o.asAddress();
      const HeapObject& ho = heap_.at(a);
      if (ho.kind != HeapObject::Kind::Fields)
        fault("stuck: field access on a " + types_.at(a), e->loc);
      auto it = ho.fields.find(e->name);
      if (it == ho.fields.end())
        fault("stuck: missing field '" + e->name + "' on " + addrText(a),
              e->loc);
      return it->second;
    }
    case Expr::Kind::Tuple: {
      std::vector<Value> vs;
      vs.reserve(e->elems.size());
      for (const ExprP& el : e->elems) vs.push_back(evalExpr(el, depth + 1));
      return Value::tuple(std::move(vs));
    }
    case Expr::Kind::Unary: {
      Value v = evalExpr(e->a, depth + 1);
      switch (e->uop) {
        case UnaryOp::Not:
          if (!v.isBool()) fault("stuck: 'not' on a non-boolean", e->loc);
          return Value::boolean(!v.asBool());
        case UnaryOp::IsTuple:
          return Value::boolean(v.isTuple());
        case UnaryOp::Len:
          if (!v.isTuple()) fault("stuck: 'len' on a non-tuple", e->loc);
          return Value::integer(static_cast<int64_t>(v.asTuple().size()));
      }
      fault("internal: unknown unary operator", e->loc);
    }
    case Expr::Kind::Binary: {
      Value a = evalExpr(e->a, depth + 1);
      Value b = evalExpr(e->b, depth + 1);
      switch (e->bop) {
        case BinaryOp::Is:
          return Value::boolean(compareValues(a, b) == 0);
        case BinaryOp::Plus:
          if (!a.isInt() || !b.isInt())
            fault("stuck: 'plus' on non-integers", e->loc);
          return Value::integer(a.asInt() + b.asInt());
        case BinaryOp::Lt:
          if (!a.isInt() || !b.isInt())
            fault("stuck: 'lt' on non-integers", e->loc);
          return Value::boolean(a.asInt() < b.asInt());
        case BinaryOp::Select: {
          if (!a.isTuple()) fault("stuck: 'select' on a non-tuple", e->loc);
          if (!b.isInt()) fault("stuck: non-integer 'select' index", e->loc);
          int64_t i = b.asInt();
          int64_t n = static_cast<int64_t>(a.asTuple().size());
          if (i < 1 || i > n)
            fault("stuck: 'select' index " + std::to_string(i) +
                      " out of range 1.." + std::to_string(n),
                  e->loc);
          return a.asTuple()[static_cast<size_t>(i - 1)];
        }
      }
      fault("internal: unknown binary operator", e->loc);
    }
    case Expr::Kind::IsInstance: {
      Value v = evalExpr(e->a, depth + 1);
      if (!v.isAddress()) return Value::boolean(false);
      return Value::boolean(types_.at(v.asAddress()) == e->name);
    }
    case Expr::Kind::Or: {
      Value l = evalExpr(e->a, depth + 1);
      if (!l.isBool()) fault("stuck: 'or' on a non-boolean", e->loc);
      if (l.asBool()) return Value::boolean(true);
      return evalExpr(e->b, depth + 1);
    }
    case Expr::Kind::Some:
      return evalSome(e, depth);
    case Expr::Kind::Call:
      return evalCallExpr(e, depth);
    default:
      fault("internal: non-core expression reached the interpreter", e->loc);
  }
}

/// `some x in s | cond` expands to the disjunction of cond[x := v] over a
/// canonical linearization of s, evaluated with the short-circuit rules
/// of binary `or`; the empty expansion is False.
Value Machine::evalSome(const ExprP& e, int depth) {
  if (e->iters.size() != 1 || e->iters[0].pat.isTuple)
    fault("internal: unexpanded quantifier form", e->loc);
  Value src = evalExpr(e->iters[0].src, depth + 1);
  if (!src.isAddress())
    fault("stuck: quantification over a non-collection", e->loc);
  std::vector<Value> vals = linearize(src.asAddress(), e->loc);
  std::string key = prettyExpr(e->iters[0].pat.var);
  for (size_t i = 0; i < vals.size(); ++i) {
    tick();
    SubstMap m;
    m.emplace(key, mkLit(vals[i], e->loc));
    Value dv = evalExpr(substituteExpr(e->cond, m), depth + 1);
    if (i + 1 == vals.size()) return dv;  // the last disjunct is returned as-is
    if (!dv.isBool()) fault("stuck: 'or' on a non-boolean", e->loc);
    if (dv.asBool()) return Value::boolean(true);
  }
  return Value::boolean(false);
}

Value Machine::evalCallExpr(const ExprP& e, int depth) {
  Value rv = evalExpr(e->obj, depth + 1);
  if (!rv.isAddress())
    fault("stuck: method call on a non-object value", e->loc);
  Addr a = rv.asAddress();
  const HeapObject& ho = heap_.at(a);
  const std::string& m = e->name;

  auto wantArgs = [&](size_t n) {
    if (e->elems.size() != n)
      fault("stuck: wrong number of arguments to '" + m + "'", e->loc);
  };

  if (ho.kind == HeapObject::Kind::Set) {
    if (m == "contains") {
      wantArgs(1);
      Value v = evalExpr(e->elems[0], depth + 1);
      return Value::boolean(ho.set.count(v) != 0);
    }
    if (m == "any") {
      wantArgs(0);
      if (ho.set.empty()) return Value::none();
      return *ho.set.begin();  // least element in canonical order
    }
    if (m == "size") {
      wantArgs(0);
      return Value::integer(static_cast<int64_t>(ho.set.size()));
    }
    if (m == "add" || m == "del")
      fault("stuck: mutating method '" + m + "' in an expression", e->loc);
    fault("unknown set method '" + m + "'", e->loc);
  }
  if (ho.kind == HeapObject::Kind::Seq) {
    if (m == "contains") {
      wantArgs(1);
      Value v = evalExpr(e->elems[0], depth + 1);
      for (const Value& x : ho.seq)
        if (compareValues(x, v) == 0) return Value::boolean(true);
      return Value::boolean(false);
    }
    if (m == "length") {
      wantArgs(0);
      return Value::integer(static_cast<int64_t>(ho.seq.size()));
    }
    if (m == "add")
      fault("stuck: mutating method 'add' in an expression", e->loc);
    fault("unknown sequence method '" + m + "'", e->loc);
  }

  const MethodDecl* md = findMethod(types_.at(a), m);
  if (!md)
    fault("unknown method '" + m + "' on class '" + types_.at(a) + "'",
          e->loc);
  if (!md->isFunction)
    fault("stuck: statement method '" + m + "' used in an expression",
          e->loc);
  wantArgs(md->params.size());
  SubstMap subst;
  subst.emplace("self", mkLit(Value::address(a), e->loc));
  for (size_t i = 0; i < md->params.size(); ++i)
    subst.emplace(md->params[i],
                  mkLit(evalExpr(e->elems[i], depth + 1), e->loc));
  tick();
  return evalExpr(substituteExpr(md->fnBody, subst), depth + 1);
}

// -------------------------------------------------------------- statements

Outcome Machine::stepOnce() {
  if (outcome_.kind != Outcome::Kind::Running) return outcome_;
  lastStepMaintained_ = false;
  lastMaintInput_.reset();
  try {
    // Sequencing is control-stack bookkeeping, not a transition.
    while (!control_.empty() &&
           control_.back()->kind == Stmt::Kind::Seq) {
      StmtP s = control_.back();
      control_.pop_back();
      if (s->b) control_.push_back(s->b);
      if (s->a) control_.push_back(s->a);
    }
    if (control_.empty()) {
      outcome_.kind = Outcome::Kind::Done;
      return outcome_;
    }
    StmtP s = control_.back();
    control_.pop_back();
    exec(s);
  } catch (const Fault& f) {
    outcome_ = {Outcome::Kind::Error, f.msg, f.loc};
  } catch (const BudgetFault&) {
    outcome_ = {Outcome::Kind::Budget, "step budget exhausted", {}};
  }
  return outcome_;
}

Outcome Machine::run() {
  while (outcome_.kind == Outcome::Kind::Running) stepOnce();
  return outcome_;
}

void Machine::exec(const StmtP& s) {
  tick();
  switch (s->kind) {
    case Stmt::Kind::Skip:
      return;
    case Stmt::Kind::Assign: {
      if (!s->target || s->target->kind != Expr::Kind::Field)
        fault("stuck: assignment target is not a field", s->loc);
      Value o = evalExpr(s->target->obj, 0);
      if (!o.isAddress())
        fault("stuck: assignment through a non-object value", s->loc);
      Addr a = o.asAddress();
      Value v = evalExpr(s->rhs, 0);
      checkLegalAssign(a, s->target->name, s->loc);
      heap_.at(a).fields[s->target->name] = std::move(v);
      maybeMaintain(isStackedBaseField(a, s->target->name), s->loc);
      return;
    }
    case Stmt::Kind::AssignNew: {
      if (!s->target || s->target->kind != Expr::Kind::Field)
        fault("stuck: assignment target is not a field", s->loc);
      Value o = evalExpr(s->target->obj, 0);
      if (!o.isAddress())
        fault("stuck: assignment through a non-object value", s->loc);
      Addr a = o.asAddress();
      Addr fresh;
      if (s->className == "set") {
        HeapObject n;
        n.kind = HeapObject::Kind::Set;
        fresh = alloc(std::move(n), "set");
      } else if (s->className == "sequence") {
        HeapObject n;
        n.kind = HeapObject::Kind::Seq;
        fresh = alloc(std::move(n), "sequence");
      } else if (findClass(s->className)) {
        fresh = alloc(HeapObject{}, s->className);
      } else {
        fault("unknown class '" + s->className + "'", s->loc);
      }
      checkLegalAssign(a, s->target->name, s->loc);
      heap_.at(a).fields[s->target->name] = Value::address(fresh);
      maybeMaintain(isStackedBaseField(a, s->target->name), s->loc);
      return;
    }
    case Stmt::Kind::If: {
      Value c = evalExpr(s->cond, 0);
      if (!c.isBool())
        fault("stuck: branch condition is not a boolean", s->loc);
      const StmtP& branch = c.asBool() ? s->a : s->b;
      if (branch) control_.push_back(branch);
      return;
    }
    case Stmt::Kind::While: {
      Value c = evalExpr(s->cond, 0);
      if (!c.isBool())
        fault("stuck: loop condition is not a boolean", s->loc);
      if (c.asBool()) {
        control_.push_back(s);
        if (s->a) control_.push_back(s->a);
      }
      return;
    }
    case Stmt::Kind::For: {
      if (s->iters.size() != 1 || s->iters[0].pat.isTuple)
        fault("internal: unexpanded loop form", s->loc);
      Value src = evalExpr(s->iters[0].src, 0);
      if (!src.isAddress())
        fault("stuck: iteration over a non-collection", s->loc);
      auto vals = std::make_shared<const std::vector<Value>>(
          linearize(src.asAddress(), s->loc));
      control_.push_back(
          mkForInTuple(s->iters[0].pat.var, vals, 0, s->a, s->loc));
      return;
    }
    case Stmt::Kind::ForInTuple: {
      if (s->offset >= s->values->size()) return;  // exhausted
      const Value& v = (*s->values)[s->offset];
      control_.push_back(
          mkForInTuple(s->target, s->values, s->offset + 1, s->a, s->loc));
      if (s->a) {
        SubstMap m;
        m.emplace(prettyExpr(s->target), mkLit(v, s->loc));
        control_.push_back(substituteStmt(s->a, m));
      }
      return;
    }
    case Stmt::Kind::Call:
      execCall(s);
      return;
    case Stmt::Kind::Infer:
      execInfer(s);
      return;
    case Stmt::Kind::Return: {
      if (frames_.size() < 2)
        fault("stuck: return outside a method call", s->loc);
      frames_.pop_back();
      maintainNow(s->loc);
      return;
    }
    default:
      fault("internal: surface statement reached the interpreter", s->loc);
  }
}

void Machine::execCall(const StmtP& s) {
  if (!s->recv) fault("stuck: method call without a receiver", s->loc);

  // When the receiver is written as a field access, remember which field
  // so mutators can reject direct updates of derived predicates. The
  // manual read mirrors the evaluator's field rules exactly.
  Value rv;
  std::optional<std::pair<Addr, std::string>> recvField;
  if (s->recv->kind == Expr::Kind::Field) {
    Value ov = evalExpr(s->recv->obj, 0);
    if (!ov.isAddress())
      fault("stuck: field access on a non-object value", s->recv->loc);
    Addr oa = ov.asAddress();
    const HeapObject& oho = heap_.at(oa);
    if (oho.kind != HeapObject::Kind::Fields)
      fault("stuck: field access on a " + types_.at(oa), s->recv->loc);
    auto it = oho.fields.find(s->recv->name);
    if (it == oho.fields.end())
      fault("stuck: missing field '" + s->recv->name + "' on " + addrText(oa),
            s->recv->loc);
    recvField.emplace(oa, s->recv->name);
    rv = it->second;
  } else {
    rv = evalExpr(s->recv, 0);
  }
  if (!rv.isAddress())
    fault("stuck: method call on a non-object value", s->loc);
  Addr a = rv.asAddress();
  const std::string& m = s->method;

  auto wantArgs = [&](size_t n) {
    if (s->args.size() != n)
      fault("stuck: wrong number of arguments to '" + m + "'", s->loc);
  };
  auto evalArg = [&](size_t i) { return evalExpr(s->args[i], 0); };
  auto guardMutation = [&] {
    if (recvField)
      checkLegalAssign(recvField->first, recvField->second, s->loc);
  };

  HeapObject& ho = heap_.at(a);
  if (ho.kind == HeapObject::Kind::Set) {
    if (m == "add") {
      wantArgs(1);
      guardMutation();
      ho.set.insert(evalArg(0));
      maybeMaintain(aliasesStackedBaseValue(a), s->loc);
      return;
    }
    if (m == "del") {
      wantArgs(1);
      guardMutation();
      ho.set.erase(evalArg(0));  // deleting an absent element is a no-op
      maybeMaintain(aliasesStackedBaseValue(a), s->loc);
      return;
    }
    if (m == "contains" || m == "any" || m == "size") {
      evalCallExpr(mkCall(s->recv, m, s->args, s->loc), 0);  // value discarded
      return;
    }
    fault("unknown set method '" + m + "'", s->loc);
  }
  if (ho.kind == HeapObject::Kind::Seq) {
    if (m == "add") {
      wantArgs(1);
      guardMutation();
      ho.seq.push_back(evalArg(0));
      maybeMaintain(aliasesStackedBaseValue(a), s->loc);
      return;
    }
    if (m == "contains" || m == "length") {
      evalCallExpr(mkCall(s->recv, m, s->args, s->loc), 0);
      return;
    }
    fault("unknown sequence method '" + m + "'", s->loc);
  }

  const MethodDecl* md = findMethod(types_.at(a), m);
  if (!md)
    fault("unknown method '" + m + "' on class '" + types_.at(a) + "'",
          s->loc);
  if (md->isFunction)
    fault("stuck: expression function '" + m + "' called as a statement",
          s->loc);
  wantArgs(md->params.size());
  SubstMap subst;
  subst.emplace("self", mkLit(Value::address(a), s->loc));
  for (size_t i = 0; i < md->params.size(); ++i)
    subst.emplace(md->params[i], mkLit(evalArg(i), s->loc));

  control_.push_back(mkReturn(s->loc));
  if (md->body) control_.push_back(substituteStmt(md->body, subst));
  frames_.push_back(buildClassFrame(types_.at(a), a));
  maintainNow(s->loc);
}

void Machine::execInfer(const StmtP& s) {
  ++counters_.inferCalls;

  // Targets evaluate first (object parts), then the receiver, then the
  // keyword arguments, left to right.
  std::vector<std::pair<Addr, std::string>> targets;
  for (const ExprP& t : s->targets) {
    if (!t || t->kind != Expr::Kind::Field)
      fault("stuck: infer target is not a field", s->loc);
    Value o = evalExpr(t->obj, 0);
    if (!o.isAddress())
      fault("stuck: assignment through a non-object value", s->loc);
    targets.emplace_back(o.asAddress(), t->name);
  }

  const RuleSetDecl* decl = nullptr;
  Addr self = kGlobalsAddr;
  std::string origin = "global";
  if (s->recv) {
    Value rv = evalExpr(s->recv, 0);
    if (!rv.isAddress() ||
        heap_.at(rv.asAddress()).kind != HeapObject::Kind::Fields)
      fault("stuck: infer receiver is not an object", s->loc);
    self = rv.asAddress();
    auto [d, cls] = findRuleSet(types_.at(self), s->ruleset);
    if (!d)
      fault("unknown rule set '" + s->ruleset + "' in class '" +
                types_.at(self) + "'",
            s->loc);
    decl = d;
    origin = cls;
  } else {
    for (const RuleSetDecl& rs : prog_.rulesets)
      if (rs.name == s->ruleset) decl = &rs;
    if (!decl) fault("unknown rule set '" + s->ruleset + "'", s->loc);
  }

  ActiveRuleSet ars = activate(*decl, self, origin);

  std::map<std::string, Value> args;
  for (const InferKwarg& kw : s->kwargs) {
    std::string key = "%" + kw.pred;
    if (!ars.info.basePredParams.count(key))
      fault("'" + kw.pred + "' is not a base-predicate parameter of rule set '" +
                decl->name + "'",
            s->loc);
    args[key] = evalExpr(kw.value, 0);
  }

  // Queries name predicates of the rule set: header parameters first,
  // then receiver fields, then globals.
  auto queryKey = [&](const std::string& name) -> std::string {
    std::string pk = "%" + name;
    if (ars.info.preds.count(pk)) return pk;
    std::string anyMatch;
    for (const auto& [k, pr] : ars.info.preds) {
      if (pr.name != name || pr.kind == PredRef::Kind::Param) continue;
      if (pr.kind == PredRef::Kind::Field && pr.addr == self && self != 0)
        return k;
      if (anyMatch.empty()) anyMatch = k;
    }
    return anyMatch;
  };

  std::set<std::string> derived = ars.info.derivedPreds();
  std::vector<std::string> queryKeys;
  for (const InferQuery& q : s->queries) {
    if (q.hasPattern)
      fault("internal: unexpanded query pattern", q.loc);
    std::string k = queryKey(q.pred);
    if (k.empty() || !derived.count(k))
      fault("'" + q.pred + "' is not a derived predicate of rule set '" +
                decl->name + "'",
            q.loc);
    queryKeys.push_back(k);
  }
  if (targets.size() != queryKeys.size())
    fault("infer expects one target per query", s->loc);

  for (const auto& [a, f] : targets) checkLegalAssign(a, f, s->loc);

  InfSubOut r = infSub(ars, args, s->loc);
  applyWrites(r.writes);

  // Query results always land at fresh addresses, even when a target
  // field already holds a set.
  for (size_t i = 0; i < queryKeys.size(); ++i) {
    auto it = r.result.find(queryKeys[i]);
    Value v = Value::none();
    if (it != r.result.end()) v = Value::address(allocSetFrom(it->second));
    heap_.at(targets[i].first).fields[targets[i].second] = v;
  }

  maintainNow(s->loc);
}

// ------------------------------------------------------------ maintenance

void Machine::checkLegalAssign(Addr a, const std::string& f,
                               SrcLoc loc) const {
  if (heap_.at(a).kind != HeapObject::Kind::Fields)
    fault("illegal assignment: " + addrText(a) + " is a " + types_.at(a),
          loc);
  if (a == kGlobalsAddr) {
    if (globalDerivedFields_.count(f))
      fault("illegal assignment to derived predicate '" + f + "'", loc);
    return;
  }
  std::string c = types_.at(a);
  for (int depth = 0; depth < 1000 && !c.empty(); ++depth) {
    auto it = derivedSelfFields_.find(c);
    if (it != derivedSelfFields_.end() && it->second.count(f))
      fault("illegal assignment to derived predicate '" + f + "' of class '" +
                c + "'",
            loc);
    const ClassDecl* cd = findClass(c);
    if (!cd) break;
    c = cd->base;
  }
}

bool Machine::isStackedBaseField(Addr a, const std::string& f) const {
  for (const auto& frame : frames_)
    for (const ActiveRuleSet& ars : frame)
      for (const std::string& k : ars.info.basePredVars) {
        const PredRef& pr = ars.info.preds.at(k);
        if (pr.addr == a && pr.name == f) return true;
      }
  return false;
}

bool Machine::aliasesStackedBaseValue(Addr target) const {
  for (const auto& frame : frames_)
    for (const ActiveRuleSet& ars : frame)
      for (const std::string& k : ars.info.basePredVars) {
        const PredRef& pr = ars.info.preds.at(k);
        const auto& fm = heap_.at(pr.addr).fields;
        auto it = fm.find(pr.name);
        if (it != fm.end() && it->second.isAddress() &&
            it->second.asAddress() == target)
          return true;
      }
  return false;
}

void Machine::maybeMaintain(bool relevant, SrcLoc loc) {
  if (relevant || dirty_) maintainNow(loc);
}

/// One maintenance pass: every rule set of every stack frame evaluates
/// against the same pre-state, and the resulting writes apply at once,
/// like a single parallel assignment; upper frames win per field and per
/// address. Globals derived only by class rule sets reset to None when no
/// stacked frame covered them. The pass marks the heap dirty when it
/// changed anything, forcing one more pass at the next mutating
/// transition so chained rule sets converge.
void Machine::maintainNow(SrcLoc loc) {
  ++counters_.maintenanceRuns;
  lastStepMaintained_ = true;
  if (opts_.recordMaintenanceInput)
    lastMaintInput_ = MaintenanceInput{heap_, types_};
  WriteSet ws;
  for (const auto& frame : frames_)
    for (const ActiveRuleSet& ars : frame) {
      InfSubOut r = infSub(ars, {}, loc);
      for (const auto& [k, v] : r.writes.fields) ws.fields[k] = v;
      for (const auto& [a, rows] : r.writes.setRewrites)
        ws.setRewrites[a] = rows;
      ws.covered.insert(r.writes.covered.begin(), r.writes.covered.end());
    }
  for (const std::string& f : classDerivedGlobals_)
    if (!ws.covered.count({kGlobalsAddr, f}))
      ws.fields[{kGlobalsAddr, f}] = Value::none();
  dirty_ = applyWrites(ws);
}

/// The infSub substitution for one receiver-bound rule set: identify the
/// base predicates whose values are known (variables whose field holds a
/// set address; parameters supplied a set address as an argument), slice
/// the rules to the ones those values determine, evaluate, and produce
/// writes for every derived predicate variable — an in-place relation
/// update when the variable already holds an address, a fresh set address
/// otherwise, and None when the variable does not fully depend on known
/// bases. Defined derived predicates (variables and parameters) are also
/// returned as relations for infer queries.
Machine::InfSubOut Machine::infSub(const ActiveRuleSet& ars,
                                   const std::map<std::string, Value>& args,
                                   SrcLoc loc) {
  const RuleSetInfo& info = ars.info;
  std::map<std::string, size_t> ar = atomArities(info);

  std::set<std::string> known;
  std::map<std::string, Relation> facts;
  auto tryKnow = [&](const std::string& key, const Value& v) {
    if (!v.isAddress()) return;
    const HeapObject& ho = heap_.at(v.asAddress());
    if (ho.kind != HeapObject::Kind::Set) return;
    auto ai = ar.find(key);
    if (ai == ar.end()) return;  // never mentioned in any atom
    known.insert(key);
    facts.emplace(key, relationFromElements(ho.set, ai->second));
  };
  for (const std::string& key : info.basePredVars) {
    const PredRef& pr = info.preds.at(key);
    const auto& fm = heap_.at(pr.addr).fields;
    auto it = fm.find(pr.name);
    if (it != fm.end()) tryKnow(key, it->second);
  }
  for (const std::string& key : info.basePredParams) {
    auto it = args.find(key);
    if (it != args.end()) tryKnow(key, it->second);
  }

  EngineInput in;
  in.rules = slice(ars.inst.rules, known);
  in.facts = facts;
  in.mutableAddrs = mutableAddrs();

  EngineOutput out;
  try {
    try {
      out = evalSemiNaive(in);
    } catch (const NotStratifiedError&) {
      // Well-founded fallback: the true atoms stand as the extensions.
      out = evalWellFounded(in);
    }
  } catch (const EngineError& e) {
    fault(std::string("rule evaluation failed: ") + e.what(), loc);
  }

  auto relOf = [&](const std::string& key) {
    auto it = out.extensions.find(key);
    if (it != out.extensions.end()) return it->second;
    Relation empty;
    auto ai = ar.find(key);
    empty.arity = ai == ar.end() ? 0 : ai->second;
    return empty;
  };

  InfSubOut r;
  for (const std::string& key : info.derivedPredVars) {
    const PredRef& pr = info.preds.at(key);
    r.writes.covered.insert({pr.addr, pr.name});
    if (!fullyDepends(info, key, known)) {
      r.writes.fields[{pr.addr, pr.name}] = Value::none();
      continue;
    }
    Relation rel = relOf(key);
    const auto& fm = heap_.at(pr.addr).fields;
    auto it = fm.find(pr.name);
    if (it != fm.end() && it->second.isAddress()) {
      r.writes.setRewrites[it->second.asAddress()] =
          elementsFromRelation(rel);
    } else {
      r.writes.fields[{pr.addr, pr.name}] =
          Value::address(allocSetFrom(rel));
    }
    r.result.emplace(key, std::move(rel));
  }
  for (const std::string& key : info.derivedPredParams)
    if (fullyDepends(info, key, known)) r.result.emplace(key, relOf(key));
  return r;
}

bool Machine::applyWrites(const WriteSet& ws) {
  bool changed = false;
  for (const auto& [a, rows] : ws.setRewrites) {
    HeapObject& ho = heap_.at(a);
    bool same =
        ho.kind == HeapObject::Kind::Set && sameValueSet(ho.set, rows);
    if (!same) {
      changed = true;
      ho.kind = HeapObject::Kind::Set;
      ho.set = rows;
      ho.fields.clear();
      ho.seq.clear();
      types_.at(a) = "set";
    }
  }
  for (const auto& [key, v] : ws.fields) {
    auto& fm = heap_.at(key.first).fields;
    auto it = fm.find(key.second);
    if (it == fm.end() || compareValues(it->second, v) != 0) {
      changed = true;
      fm[key.second] = v;
    }
  }
  return changed;
}

std::set<Addr> Machine::mutableAddrs() const {
  std::set<Addr> m;
  for (Addr a = 0; a < heap_.size(); ++a)
    if (heap_[a].kind != HeapObject::Kind::Fields) m.insert(a);
  return m;
}

// ------------------------------------------------------------ entry points

void Machine::bindGlobal(const std::string& field, const Relation& rel) {
  if (outcome_.kind != Outcome::Kind::Running) return;
  lastStepMaintained_ = false;
  lastMaintInput_.reset();
  try {
    Addr a = allocSetFrom(rel);
    checkLegalAssign(kGlobalsAddr, field, {});
    heap_.at(kGlobalsAddr).fields[field] = Value::address(a);
    maybeMaintain(isStackedBaseField(kGlobalsAddr, field), {});
  } catch (const Fault& f) {
    outcome_ = {Outcome::Kind::Error, f.msg, f.loc};
  } catch (const BudgetFault&) {
    outcome_ = {Outcome::Kind::Budget, "step budget exhausted", {}};
  }
}

}  // namespace rli
