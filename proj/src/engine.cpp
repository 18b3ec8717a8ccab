#include "rli/engine.hpp"

#include <algorithm>
#include <unordered_map>

#include "rli/rules.hpp"

namespace rli {

std::vector<Row> Relation::sortedRows() const {
  std::vector<Row> out(rows.begin(), rows.end());
  std::sort(out.begin(), out.end(), RowLess());
  return out;
}

namespace {

// ------------------------------------------------------------ stored data

/// Engine-internal relation with on-demand hash indexes. An index for a
/// bound-position set maps the values at those positions to the matching
/// rows. Rows live in the unordered_set, so pointers to them stay valid
/// across inserts; inserts keep every already-built index current.
struct Rel {
  size_t arity = 0;
  std::unordered_set<Row, RowHash, RowEq> rows;
  std::map<std::vector<int>,
           std::unordered_map<Row, std::vector<const Row*>, RowHash, RowEq>>
      idx;

  bool contains(const Row& r) const { return rows.count(r) != 0; }

  bool insert(const Row& r) {
    auto [it, fresh] = rows.insert(r);
    if (fresh)
      for (auto& [pos, m] : idx) m[keyAt(*it, pos)].push_back(&*it);
    return fresh;
  }

  static Row keyAt(const Row& r, const std::vector<int>& pos) {
    Row k;
    k.reserve(pos.size());
    for (int i : pos) k.push_back(r[static_cast<size_t>(i)]);
    return k;
  }

  const std::vector<const Row*>* probe(const std::vector<int>& pos,
                                       const Row& key) {
    auto found = idx.find(pos);
    if (found == idx.end()) {
      auto& m = idx[pos];
      for (const Row& r : rows) m[keyAt(r, pos)].push_back(&r);
      found = idx.find(pos);
    }
    auto it = found->second.find(key);
    return it == found->second.end() ? nullptr : &it->second;
  }
};

using Store = std::map<std::string, Rel>;

// ------------------------------------------------------------ validation

void requireArity(std::map<std::string, size_t>& arity, const std::string& k,
                  size_t n) {
  auto [it, fresh] = arity.emplace(k, n);
  if (!fresh && it->second != n)
    throw EngineError("arity mismatch for predicate " + k);
}

void rejectMutable(const Value& v, const std::set<Addr>& mut,
                   const std::string& pred) {
  if (v.isAddress() && mut.count(v.asAddress()))
    throw EngineError("mutable collection address in a row of " + pred);
  if (v.isTuple())
    for (const Value& e : v.asTuple()) rejectMutable(e, mut, pred);
}

/// Builds the initial store from facts plus empty relations for every
/// predicate the rules mention, checking arities and groundness.
Store initialStore(const EngineInput& in) {
  std::map<std::string, size_t> arity;
  for (const Rule& r : in.rules) {
    requireArity(arity, r.head.pred.key(), r.head.args.size());
    for (const RuleHyp& h : r.hyps)
      requireArity(arity, h.atom.pred.key(), h.atom.args.size());
  }
  for (const auto& [k, rel] : in.facts) {
    requireArity(arity, k, rel.arity);
    for (const Row& row : rel.rows) {
      if (row.size() != rel.arity)
        throw EngineError("row arity mismatch in facts for " + k);
      for (const Value& v : row) rejectMutable(v, in.mutableAddrs, k);
    }
  }
  Store store;
  for (const auto& [k, n] : arity) store[k].arity = n;
  for (const auto& [k, rel] : in.facts) {
    Rel& dst = store[k];
    for (const Row& row : rel.rows) dst.insert(row);
  }
  return store;
}

// ------------------------------------------------------------- matching

/// Variable binding during one rule match. Rules have a handful of
/// variables, so linear scans beat hashing.
struct Binding {
  std::vector<std::pair<std::string, Value>> slots;

  const Value* find(const std::string& v) const {
    for (const auto& [name, val] : slots)
      if (name == v) return &val;
    return nullptr;
  }
  size_t mark() const { return slots.size(); }
  void popTo(size_t m) { slots.resize(m); }
};

/// One evaluation context: where positive hypotheses read from, where
/// negated ones read from (fixed assumptions under well-founded
/// evaluation), whether to probe indexes, and an optional hypothesis
/// position forced to read from a delta relation.
struct EvalCtx {
  Store* store = nullptr;
  Store* negStore = nullptr;
  bool useIndexes = false;
  int deltaHyp = -1;
  Rel* deltaRel = nullptr;
};

Row groundArgs(const RuleAtom& atom, const Binding& b) {
  Row out;
  out.reserve(atom.args.size());
  for (const RuleArg& a : atom.args) {
    if (!a.isVar) {
      out.push_back(a.lit);
      continue;
    }
    const Value* v = b.find(a.var);
    if (!v)
      throw EngineError("unsafe rule: variable " + a.var +
                        " unbound where a ground atom is required");
    out.push_back(*v);
  }
  return out;
}

/// Tries to extend `b` so the atom's arguments equal `row`; returns false
/// (leaving b at `from`) on mismatch. Handles repeated variables within
/// one atom by sequential binding.
bool bindRow(const RuleAtom& atom, const Row& row, Binding& b, size_t from) {
  for (size_t i = 0; i < atom.args.size(); ++i) {
    const RuleArg& a = atom.args[i];
    if (!a.isVar) {
      if (a.lit != row[i]) {
        b.popTo(from);
        return false;
      }
      continue;
    }
    if (const Value* v = b.find(a.var)) {
      if (*v != row[i]) {
        b.popTo(from);
        return false;
      }
    } else {
      b.slots.emplace_back(a.var, row[i]);
    }
  }
  return true;
}

template <typename Emit>
void enumerate(const Rule& rule, size_t i, EvalCtx& ctx, Binding& b,
               const Emit& emit) {
  if (i == rule.hyps.size()) {
    emit(b);
    return;
  }
  const RuleHyp& hyp = rule.hyps[i];
  const std::string key = hyp.atom.pred.key();

  if (hyp.negated) {
    Row probe = groundArgs(hyp.atom, b);
    auto it = ctx.negStore->find(key);
    if (it == ctx.negStore->end() || !it->second.contains(probe))
      enumerate(rule, i + 1, ctx, b, emit);
    return;
  }

  Rel* rel = (static_cast<int>(i) == ctx.deltaHyp) ? ctx.deltaRel
                                                   : &(*ctx.store)[key];
  size_t from = b.mark();

  if (ctx.useIndexes) {
    std::vector<int> pos;
    Row key_;
    for (size_t j = 0; j < hyp.atom.args.size(); ++j) {
      const RuleArg& a = hyp.atom.args[j];
      if (!a.isVar) {
        pos.push_back(static_cast<int>(j));
        key_.push_back(a.lit);
      } else if (const Value* v = b.find(a.var)) {
        pos.push_back(static_cast<int>(j));
        key_.push_back(*v);
      }
    }
    if (!pos.empty()) {
      const std::vector<const Row*>* hits = rel->probe(pos, key_);
      if (hits)
        for (const Row* row : *hits)
          if (bindRow(hyp.atom, *row, b, from)) {
            enumerate(rule, i + 1, ctx, b, emit);
            b.popTo(from);
          }
      return;
    }
  }

  for (const Row& row : rel->rows)
    if (bindRow(hyp.atom, row, b, from)) {
      enumerate(rule, i + 1, ctx, b, emit);
      b.popTo(from);
    }
}

/// All head rows derivable for `rule` in the given context. Derivations
/// are buffered: callers merge them after enumeration so relations are
/// never mutated while being scanned.
void deriveInto(const Rule& rule, EvalCtx& ctx, std::vector<Row>& out) {
  Binding b;
  enumerate(rule, 0, ctx, b, [&](const Binding& done) {
    out.push_back(groundArgs(rule.head, done));
  });
}

// ------------------------------------------------------------- fixpoints

/// Naive fixpoint for one stratum: keep re-deriving everything until a
/// full pass adds nothing.
void fixNaive(const std::vector<const Rule*>& rules, Store& store) {
  bool changed = true;
  while (changed) {
    changed = false;
    for (const Rule* r : rules) {
      EvalCtx ctx{&store, &store, /*useIndexes=*/false};
      std::vector<Row> derived;
      deriveInto(*r, ctx, derived);
      Rel& head = store[r->head.pred.key()];
      for (Row& row : derived) changed |= head.insert(std::move(row));
    }
  }
}

/// Semi-naive fixpoint for one stratum. After a first full round, every
/// later round only explores joins where at least one same-stratum
/// hypothesis reads from the previous round's delta. Negated hypotheses
/// read `negStore` (complete lower strata, or fixed assumptions).
void fixSemiNaive(const std::vector<const Rule*>& rules, Store& store,
                  Store& negStore) {
  std::set<std::string> headPreds;
  for (const Rule* r : rules) headPreds.insert(r->head.pred.key());

  std::map<std::string, Rel> delta;

  auto merge = [&](std::map<std::string, std::vector<Row>>& pending) {
    std::map<std::string, Rel> next;
    for (auto& [pred, rows] : pending) {
      Rel& full = store[pred];
      for (Row& row : rows)
        if (full.insert(row)) next[pred].insert(row);
    }
    delta = std::move(next);
  };

  // round 0: one full evaluation of every rule
  {
    std::map<std::string, std::vector<Row>> pending;
    for (const Rule* r : rules) {
      EvalCtx ctx{&store, &negStore, /*useIndexes=*/true};
      deriveInto(*r, ctx, pending[r->head.pred.key()]);
    }
    merge(pending);
  }

  while (!delta.empty()) {
    std::map<std::string, std::vector<Row>> pending;
    for (const Rule* r : rules) {
      for (size_t j = 0; j < r->hyps.size(); ++j) {
        const RuleHyp& h = r->hyps[j];
        if (h.negated || !headPreds.count(h.atom.pred.key())) continue;
        auto d = delta.find(h.atom.pred.key());
        if (d == delta.end() || d->second.rows.empty()) continue;
        EvalCtx ctx{&store, &negStore, /*useIndexes=*/true,
                    static_cast<int>(j), &d->second};
        deriveInto(*r, ctx, pending[r->head.pred.key()]);
      }
    }
    merge(pending);
  }
}

std::vector<std::vector<const Rule*>> rulesByStratum(
    const std::vector<Rule>& rules, const Stratification& st) {
  std::vector<std::vector<const Rule*>> out(st.strata.size());
  for (const Rule& r : rules) {
    int s = st.stratumOf(r.head.pred.key());
    out[static_cast<size_t>(s)].push_back(&r);
  }
  return out;
}

EngineOutput finish(Store&& store) {
  EngineOutput out;
  for (auto& [k, rel] : store) {
    Relation r;
    r.arity = rel.arity;
    r.rows = std::move(rel.rows);
    out.extensions.emplace(k, std::move(r));
  }
  return out;
}

// ------------------------------------------------- well-founded helpers

/// Positive fixpoint of all rules with negation tested against the fixed
/// store `assumed`: `not p(t)` holds iff t is not assumed. Returns the
/// least model over a fresh store seeded with the facts.
Store positiveFixpoint(const EngineInput& in, Store& assumed) {
  Store store = initialStore(in);
  std::vector<const Rule*> all;
  all.reserve(in.rules.size());
  for (const Rule& r : in.rules) all.push_back(&r);
  fixSemiNaive(all, store, assumed);
  return store;
}

bool sameStore(const Store& a, const Store& b) {
  if (a.size() != b.size()) return false;
  for (auto ia = a.begin(), ib = b.begin(); ia != a.end(); ++ia, ++ib) {
    if (ia->first != ib->first || ia->second.arity != ib->second.arity)
      return false;
    if (ia->second.rows != ib->second.rows) return false;
  }
  return true;
}

}  // namespace

EngineOutput evalNaive(const EngineInput& in) {
  Stratification st = stratify(in.rules);
  if (!st.ok) throw NotStratifiedError();
  Store store = initialStore(in);
  for (const auto& stratum : rulesByStratum(in.rules, st))
    if (!stratum.empty()) fixNaive(stratum, store);
  return finish(std::move(store));
}

EngineOutput evalSemiNaive(const EngineInput& in) {
  Stratification st = stratify(in.rules);
  if (!st.ok) throw NotStratifiedError();
  Store store = initialStore(in);
  for (const auto& stratum : rulesByStratum(in.rules, st))
    if (!stratum.empty()) fixSemiNaive(stratum, store, store);
  return finish(std::move(store));
}

EngineOutput evalWellFounded(const EngineInput& in) {
  // Alternating fixpoint. A holds atoms known true, and grows; B holds
  // atoms true or undefined, and shrinks. Each is the positive fixpoint
  // with negation tested against the other.
  Store a;
  Store b;
  for (;;) {
    b = positiveFixpoint(in, a);
    Store a2 = positiveFixpoint(in, b);
    if (sameStore(a2, a)) break;
    a = std::move(a2);
  }

  EngineOutput out = finish(std::move(a));
  for (auto& [k, rel] : b) {
    const Relation& truth = out.extensions.at(k);
    Relation undef;
    undef.arity = rel.arity;
    for (const Row& row : rel.rows)
      if (!truth.contains(row)) undef.insert(row);
    if (!undef.empty()) out.undefinedAtoms.emplace(k, std::move(undef));
  }
  return out;
}

}  // namespace rli
