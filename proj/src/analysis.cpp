#include "rli/analysis.hpp"

#include <map>
#include <set>

#include "rli/pretty.hpp"
#include "rli/rules.hpp"

namespace rli {

namespace {

/// Program-wide predicate tables: which globals-object fields and which
/// self fields (per declaring class) are base or derived predicates of
/// some rule set.
struct PredTables {
  std::set<std::string> globalBase, globalDerived;
  std::map<std::string, std::set<std::string>> selfBase, selfDerived;
  std::map<std::string, const ClassDecl*> classes;

  void addRuleSet(const RuleSetDecl& rs, const std::string& cls) {
    RuleSetInfo info = classify(rs);
    auto note = [&](const std::set<std::string>& keys, bool derived) {
      for (const std::string& key : keys) {
        const PredRef& pr = info.preds.at(key);
        if (pr.kind == PredRef::Kind::Field && pr.addr == kGlobalsAddr)
          (derived ? globalDerived : globalBase).insert(pr.name);
        else if (pr.kind == PredRef::Kind::SelfField)
          (derived ? selfDerived[cls] : selfBase[cls]).insert(pr.name);
      }
    };
    note(info.basePredVars, false);
    note(info.derivedPredVars, true);
  }

  /// Walks the inheritance chain of `cls` looking for `field` in the
  /// given per-class table.
  bool selfHas(const std::map<std::string, std::set<std::string>>& table,
               std::string cls, const std::string& field) const {
    for (int depth = 0; depth < 1000 && !cls.empty(); ++depth) {
      auto it = table.find(cls);
      if (it != table.end() && it->second.count(field)) return true;
      auto ci = classes.find(cls);
      if (ci == classes.end()) break;
      cls = ci->second->base;
    }
    return false;
  }
};

PredTables buildTables(const Program& p) {
  PredTables t;
  for (const ClassDecl& c : p.classes) t.classes[c.name] = &c;
  for (const RuleSetDecl& rs : p.rulesets) t.addRuleSet(rs, "");
  for (const ClassDecl& c : p.classes)
    for (const RuleSetDecl& rs : c.rulesets) t.addRuleSet(rs, c.name);
  return t;
}

class UpdateScanner {
public:
  UpdateScanner(const Program& p, AliasMode mode)
      : tables_(buildTables(p)), prog_(p) {
    report_.mode = mode;
  }

  UpdateSiteReport run() {
    walk(prog_.main, "", "main");
    for (const ClassDecl& c : prog_.classes)
      for (const MethodDecl& m : c.methods)
        if (!m.isFunction) walk(m.body, c.name, c.name + "." + m.name);
    return std::move(report_);
  }

private:
  void site(const ExprP& target, SrcLoc loc, const std::string& cls,
            const std::string& ctx) {
    UpdateSite u;
    u.loc = loc;
    u.context = ctx;
    if (target && target->kind == Expr::Kind::Field && target->obj) {
      const ExprP& obj = target->obj;
      if (obj->kind == Expr::Kind::Lit && obj->lit.isAddress() &&
          obj->lit.asAddress() == kGlobalsAddr) {
        u.target = target->name;
        u.kind = tables_.globalDerived.count(target->name)
                     ? UpdateKind::DerivedUpdateError
                 : tables_.globalBase.count(target->name)
                     ? UpdateKind::BaseUpdate
                     : UpdateKind::Unrelated;
      } else if (obj->kind == Expr::Kind::Param && obj->name == "self" &&
                 !cls.empty()) {
        u.target = "self." + target->name;
        u.kind = tables_.selfHas(tables_.selfDerived, cls, target->name)
                     ? UpdateKind::DerivedUpdateError
                 : tables_.selfHas(tables_.selfBase, cls, target->name)
                     ? UpdateKind::BaseUpdate
                     : UpdateKind::Unrelated;
      } else {
        // An update through an arbitrary object expression: aliasing
        // territory, left to the runtime guard.
        u.target = prettyExpr(target);
        u.kind = UpdateKind::Unrelated;
      }
    } else {
      u.target = target ? prettyExpr(target) : "<none>";
      u.kind = UpdateKind::Unrelated;
    }
    if (u.kind == UpdateKind::DerivedUpdateError &&
        report_.mode == AliasMode::NoAlias)
      addDiag(report_.diags, "E013",
              "update of derived predicate '" + u.target +
                  "' outside its rule set",
              loc);
    report_.sites.push_back(std::move(u));
  }

  void walk(const StmtP& s, const std::string& cls, const std::string& ctx) {
    if (!s) return;
    switch (s->kind) {
      case Stmt::Kind::Assign:
      case Stmt::Kind::AssignNew:
      case Stmt::Kind::Compre:
        site(s->target, s->loc, cls, ctx);
        break;
      case Stmt::Kind::MultiAssign:
        for (const ExprP& t : s->targets) site(t, s->loc, cls, ctx);
        break;
      case Stmt::Kind::Call:
        if (s->method == "add" || s->method == "del")
          site(s->recv, s->loc, cls, ctx);
        break;
      case Stmt::Kind::Infer:
        for (const ExprP& t : s->targets) site(t, s->loc, cls, ctx);
        break;
      case Stmt::Kind::Seq:
      case Stmt::Kind::If:
        walk(s->a, cls, ctx);
        walk(s->b, cls, ctx);
        break;
      case Stmt::Kind::For:
      case Stmt::Kind::ForInTuple:
      case Stmt::Kind::While:
      case Stmt::Kind::IfSome:
      case Stmt::Kind::WhileSome:
        walk(s->a, cls, ctx);
        break;
      case Stmt::Kind::Skip:
      case Stmt::Kind::Return:
        break;
    }
  }

  PredTables tables_;
  const Program& prog_;
  UpdateSiteReport report_;
};

const char* kindWord(UpdateKind k) {
  switch (k) {
    case UpdateKind::BaseUpdate:
      return "base update of";
    case UpdateKind::DerivedUpdateError:
      return "ILLEGAL derived update of";
    case UpdateKind::Unrelated:
      return "unrelated update of";
  }
  return "?";
}

}  // namespace

UpdateSiteReport checkUpdates(const Program& core, AliasMode mode) {
  return UpdateScanner(core, mode).run();
}

Diagnostics localInferCheck(const Program& core) {
  Diagnostics diags;
  std::map<std::string, const RuleSetDecl*> globalRs;
  for (const RuleSetDecl& rs : core.rulesets) globalRs[rs.name] = &rs;
  std::map<const RuleSetDecl*, RuleSetInfo> infoCache;
  auto infoOf = [&](const RuleSetDecl* rs) -> const RuleSetInfo& {
    auto it = infoCache.find(rs);
    if (it == infoCache.end())
      it = infoCache.emplace(rs, classify(*rs)).first;
    return it->second;
  };

  auto checkInfer = [&](const StmtP& s) {
    std::vector<const RuleSetDecl*> candidates;
    if (!s->recv) {
      auto it = globalRs.find(s->ruleset);
      if (it != globalRs.end()) candidates.push_back(it->second);
    } else {
      for (const ClassDecl& c : core.classes)
        for (const RuleSetDecl& rs : c.rulesets)
          if (rs.name == s->ruleset) candidates.push_back(&rs);
    }
    if (candidates.empty()) {
      addDiag(diags, "E014", "unknown rule set '" + s->ruleset + "'", s->loc);
      return;
    }
    if (s->targets.size() != s->queries.size())
      addDiag(diags, "E014",
              "infer has " + std::to_string(s->queries.size()) +
                  " queries but " + std::to_string(s->targets.size()) +
                  " targets",
              s->loc);
    for (const InferKwarg& kw : s->kwargs) {
      bool ok = false;
      for (const RuleSetDecl* rs : candidates)
        if (infoOf(rs).basePredParams.count("%" + kw.pred)) ok = true;
      if (!ok)
        addDiag(diags, "E014",
                "'" + kw.pred + "' is not a base predicate local to '" +
                    s->ruleset + "'",
                s->loc);
    }
    for (const InferQuery& q : s->queries) {
      bool ok = false;
      for (const RuleSetDecl* rs : candidates)
        if (infoOf(rs).derivedPredParams.count("%" + q.pred)) ok = true;
      if (!ok)
        addDiag(diags, "E014",
                "'" + q.pred + "' is not a derived predicate local to '" +
                    s->ruleset + "'",
                q.loc);
    }
  };

  // Walk all statements, including method bodies.
  std::vector<StmtP> work{core.main};
  for (const ClassDecl& c : core.classes)
    for (const MethodDecl& m : c.methods)
      if (!m.isFunction && m.body) work.push_back(m.body);
  while (!work.empty()) {
    StmtP s = work.back();
    work.pop_back();
    if (!s) continue;
    if (s->kind == Stmt::Kind::Infer) checkInfer(s);
    if (s->a) work.push_back(s->a);
    if (s->b) work.push_back(s->b);
  }
  return diags;
}

std::string explainUpdates(const UpdateSiteReport& report) {
  std::string out = "update sites (";
  out += report.mode == AliasMode::NoAlias ? "no-alias" : "alias-checked";
  out += " mode)\n";
  for (const UpdateSite& u : report.sites) {
    out += "  " + u.context + ": ";
    if (u.loc.valid()) out += "line " + std::to_string(u.loc.line) + ": ";
    out += std::string(kindWord(u.kind)) + " '" + u.target + "'\n";
  }
  if (report.sites.empty()) out += "  (none)\n";
  return out;
}

}  // namespace rli
