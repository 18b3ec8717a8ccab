#include "rli/rules.hpp"

#include <algorithm>
#include <functional>

namespace rli {

namespace {

/// Direct dependency map: conclusion predicate -> hypothesis predicates.
/// Every derived predicate gets an entry, even with an empty body.
std::map<std::string, std::set<std::string>> directDeps(
    const std::vector<Rule>& rules) {
  std::map<std::string, std::set<std::string>> direct;
  for (const Rule& r : rules) {
    auto& deps = direct[r.head.pred.key()];
    for (const RuleHyp& h : r.hyps) deps.insert(h.atom.pred.key());
  }
  return direct;
}

}  // namespace

std::set<std::string> RuleSetInfo::basePreds() const {
  std::set<std::string> out = basePredParams;
  out.insert(basePredVars.begin(), basePredVars.end());
  return out;
}

std::set<std::string> RuleSetInfo::derivedPreds() const {
  std::set<std::string> out = derivedPredParams;
  out.insert(derivedPredVars.begin(), derivedPredVars.end());
  return out;
}

RuleSetInfo classify(const RuleSetDecl& rs) {
  RuleSetInfo info;
  info.decl = rs;

  for (const Rule& r : rs.rules) {
    info.preds.emplace(r.head.pred.key(), r.head.pred);
    for (const RuleHyp& h : r.hyps)
      info.preds.emplace(h.atom.pred.key(), h.atom.pred);
  }

  auto direct = directDeps(rs.rules);

  // Transitive closure, one depth-first walk per derived predicate.
  for (const auto& [d, firsts] : direct) {
    std::set<std::string> seen;
    std::vector<std::string> todo(firsts.begin(), firsts.end());
    while (!todo.empty()) {
      std::string q = std::move(todo.back());
      todo.pop_back();
      if (!seen.insert(q).second) continue;
      auto it = direct.find(q);
      if (it != direct.end())
        todo.insert(todo.end(), it->second.begin(), it->second.end());
    }
    info.dependency.emplace(d, std::move(seen));
  }

  for (const auto& [key, pred] : info.preds) {
    bool derived = direct.count(key) != 0;
    bool param = pred.kind == PredRef::Kind::Param;
    auto& bucket = derived ? (param ? info.derivedPredParams
                                    : info.derivedPredVars)
                           : (param ? info.basePredParams
                                    : info.basePredVars);
    bucket.insert(key);
  }
  return info;
}

bool fullyDepends(const RuleSetInfo& info, const std::string& derived,
                  const std::set<std::string>& given) {
  auto it = info.dependency.find(derived);
  if (it == info.dependency.end()) return false;
  std::set<std::string> base = info.basePreds();
  for (const std::string& q : it->second)
    if (base.count(q) && !given.count(q)) return false;
  return true;
}

std::vector<Rule> slice(const std::vector<Rule>& rules,
                        const std::set<std::string>& known) {
  RuleSetDecl tmp;
  tmp.rules = rules;
  RuleSetInfo info = classify(tmp);

  std::vector<Rule> out;
  for (const Rule& r : rules)
    if (fullyDepends(info, r.head.pred.key(), known)) out.push_back(r);
  return out;
}

InstRuleSet instantiate(const RuleSetDecl& rs, Addr receiver,
                        std::string origin) {
  InstRuleSet out;
  out.origin = std::move(origin);
  out.rules = rs.rules;
  auto fix = [receiver](PredRef& p) {
    if (p.kind == PredRef::Kind::SelfField) {
      p.kind = PredRef::Kind::Field;
      p.addr = receiver;
    }
  };
  for (Rule& r : out.rules) {
    fix(r.head.pred);
    for (RuleHyp& h : r.hyps) fix(h.atom.pred);
  }
  return out;
}

int Stratification::stratumOf(const std::string& pred) const {
  for (size_t i = 0; i < strata.size(); ++i)
    if (std::find(strata[i].begin(), strata[i].end(), pred) != strata[i].end())
      return static_cast<int>(i);
  return -1;
}

Stratification stratify(const std::vector<Rule>& rules) {
  // Dependency graph: conclusion -> hypothesis, with polarity.
  std::set<std::string> nodeSet;
  std::map<std::string, std::vector<std::string>> adj;
  std::vector<std::pair<std::string, std::string>> negEdges;
  for (const Rule& r : rules) {
    std::string h = r.head.pred.key();
    nodeSet.insert(h);
    for (const RuleHyp& hyp : r.hyps) {
      std::string d = hyp.atom.pred.key();
      nodeSet.insert(d);
      adj[h].push_back(d);
      if (hyp.negated) negEdges.emplace_back(h, d);
    }
  }
  for (auto& [n, succs] : adj) {
    std::sort(succs.begin(), succs.end());
    succs.erase(std::unique(succs.begin(), succs.end()), succs.end());
  }

  // Tarjan's algorithm. Components complete in dependency-first order, so
  // the emission order is already a bottom-up evaluation order.
  std::map<std::string, int> index, low, comp;
  std::vector<std::string> stack;
  std::set<std::string> onStack;
  std::vector<std::vector<std::string>> strata;
  int counter = 0;

  std::function<void(const std::string&)> visit = [&](const std::string& v) {
    index[v] = low[v] = counter++;
    stack.push_back(v);
    onStack.insert(v);
    auto it = adj.find(v);
    if (it != adj.end())
      for (const std::string& w : it->second) {
        if (!index.count(w)) {
          visit(w);
          low[v] = std::min(low[v], low[w]);
        } else if (onStack.count(w)) {
          low[v] = std::min(low[v], index[w]);
        }
      }
    if (low[v] == index[v]) {
      std::vector<std::string> scc;
      for (;;) {
        std::string w = std::move(stack.back());
        stack.pop_back();
        onStack.erase(w);
        bool done = w == v;
        comp[w] = static_cast<int>(strata.size());
        scc.push_back(std::move(w));
        if (done) break;
      }
      std::sort(scc.begin(), scc.end());
      strata.push_back(std::move(scc));
    }
  };
  for (const std::string& n : nodeSet)
    if (!index.count(n)) visit(n);

  Stratification out;
  out.strata = std::move(strata);
  for (const auto& [from, to] : negEdges)
    if (comp[from] == comp[to]) {
      out.ok = false;
      break;
    }
  return out;
}

}  // namespace rli
