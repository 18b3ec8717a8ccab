#include "rli/bench.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>

#include "rli/desugar.hpp"
#include "rli/parser.hpp"
#include "rli/runtime.hpp"

#ifndef RLI_ASSET_DIR
#define RLI_ASSET_DIR "assets"
#endif

namespace rli {

namespace {

// ---------------------------------------------------------------- rng
// mt19937_64 output is pinned by the standard, while distributions and
// std::shuffle are not; sampling by rejection keeps generated inputs
// byte-identical across standard libraries.

std::uint64_t uniformBelow(std::mt19937_64& rng, std::uint64_t n) {
  const std::uint64_t limit = ~std::uint64_t{0} - ~std::uint64_t{0} % n;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % n;
}

template <typename T>
void shuffleVec(std::vector<T>& v, std::mt19937_64& rng) {
  for (std::size_t i = v.size(); i > 1; --i)
    std::swap(v[i - 1], v[uniformBelow(rng, i)]);
}

template <typename T>
T takeAt(std::vector<T>& v, std::size_t i) {
  T out = v[i];
  v[i] = v.back();
  v.pop_back();
  return out;
}

// ---------------------------------------------------------------- graphs

long long graphCapacity(const GraphSpec& s) {
  const long long n = s.vertices;
  return s.cyclic ? n * n : n * (n - 1) / 2;
}

}  // namespace

std::vector<std::pair<int, int>> genGraphEdges(const GraphSpec& spec) {
  if (spec.vertices <= 0) throw std::invalid_argument("vertices must be positive");
  if (spec.edges <= 0) throw std::invalid_argument("edges must be positive");
  const long long cap = graphCapacity(spec);
  if (spec.edges > cap)
    throw std::invalid_argument("graph spec asks for " +
                                std::to_string(spec.edges) +
                                " distinct edges but only " +
                                std::to_string(cap) + " exist");

  std::mt19937_64 rng(spec.seed);
  const std::uint64_t n = static_cast<std::uint64_t>(spec.vertices);
  std::vector<std::pair<int, int>> edges;
  edges.reserve(static_cast<std::size_t>(spec.edges));

  if (spec.edges * 2 >= cap && cap <= (1 << 22)) {
    // Dense request: enumerate the whole pair space and take a random
    // prefix, avoiding a long rejection tail.
    std::vector<std::pair<int, int>> all;
    all.reserve(static_cast<std::size_t>(cap));
    for (int u = 1; u <= spec.vertices; ++u)
      for (int v = 1; v <= spec.vertices; ++v) {
        if (spec.cyclic ? true : u < v) all.emplace_back(u, v);
      }
    shuffleVec(all, rng);
    edges.assign(all.begin(), all.begin() + static_cast<std::size_t>(spec.edges));
    return edges;
  }

  std::set<std::pair<int, int>> seen;
  while (edges.size() < static_cast<std::size_t>(spec.edges)) {
    int u = static_cast<int>(uniformBelow(rng, n)) + 1;
    int v = static_cast<int>(uniformBelow(rng, n)) + 1;
    if (!spec.cyclic) {
      if (u == v) continue;
      if (u > v) std::swap(u, v);
    }
    if (seen.insert({u, v}).second) edges.emplace_back(u, v);
  }
  return edges;
}

std::string genGraphFacts(const GraphSpec& spec, const std::string& pred) {
  std::string out;
  for (auto [u, v] : genGraphEdges(spec)) {
    out += pred;
    out += '(';
    out += std::to_string(u);
    out += ", ";
    out += std::to_string(v);
    out += ").\n";
  }
  return out;
}

// ---------------------------------------------------------------- families

Family genFamily(const FamilySpec& spec) {
  if (spec.people <= 0) throw std::invalid_argument("people must be positive");
  std::mt19937_64 rng(spec.seed);
  Family fam;

  // Person ids 1..people; the first generation has no parents, and each
  // later person draws one or two distinct parents from the previous
  // generation.
  const int people = spec.people;
  int rootCount = std::max(1, people / 8);
  std::vector<int> prevGen, curGen;
  for (int p = 1; p <= people; ++p) {
    if (p <= rootCount) {
      curGen.push_back(p);
      continue;
    }
    if (curGen.size() >= prevGen.size() * 2 + 2 || prevGen.empty()) {
      if (!curGen.empty()) {
        prevGen = curGen;
        curGen.clear();
      }
    }
    curGen.push_back(p);
    int first = prevGen[uniformBelow(rng, prevGen.size())];
    fam.parent.emplace_back(p, first);
    if (prevGen.size() > 1 && uniformBelow(rng, 2) == 0) {
      int second = first;
      while (second == first)
        second = prevGen[uniformBelow(rng, prevGen.size())];
      fam.parent.emplace_back(p, second);
    }
  }

  // Siblings: distinct people sharing a parent, both directions, no
  // duplicates.
  std::map<int, std::vector<int>> children;
  for (auto [c, p] : fam.parent) children[p].push_back(c);
  std::set<std::pair<int, int>> sib;
  for (auto& [p, kids] : children)
    for (int a : kids)
      for (int b : kids)
        if (a != b) sib.insert({a, b});
  fam.sibling.assign(sib.begin(), sib.end());
  return fam;
}

std::string genFamilyFacts(const FamilySpec& spec) {
  Family fam = genFamily(spec);
  std::string out;
  for (auto [c, p] : fam.parent)
    out += "parent(" + std::to_string(c) + ", " + std::to_string(p) + ").\n";
  for (auto [a, b] : fam.sibling)
    out += "sibling(" + std::to_string(a) + ", " + std::to_string(b) + ").\n";
  return out;
}

// ---------------------------------------------------------------- rbac

namespace {

long long scaledTotal(long long baseline, int users) {
  const double scale = static_cast<double>(users) / 5000.0;
  return std::max(1LL, std::llround(baseline * scale));
}

struct OpTotals {
  long long addUser, delUser, addRole, delRole, addUr, delUr, addRh, delRh;
};

OpTotals opTotals(const RbacWorkloadSpec& spec) {
  return {scaledTotal(50, spec.users), scaledTotal(50, spec.users),
          scaledTotal(5, spec.users),  scaledTotal(5, spec.users),
          scaledTotal(55, spec.users), scaledTotal(55, spec.users),
          scaledTotal(5, spec.users),  scaledTotal(5, spec.users)};
}

}  // namespace

long long rbacUpdateOpTotal(const RbacWorkloadSpec& spec) {
  OpTotals t = opTotals(spec);
  return t.addUser + t.delUser + t.addRole + t.delRole + t.addUr + t.delUr +
         t.addRh + t.delRh;
}

RbacWorkload rbacWorkload(const RbacWorkloadSpec& spec) {
  if (spec.users <= 0 || spec.roles <= 0)
    throw std::invalid_argument("users and roles must be positive");
  if (spec.urPairs < 0 || spec.rhPairs < 0 || spec.queries < 0)
    throw std::invalid_argument("pair and query counts must be nonnegative");
  if (spec.rhPairs > spec.roles - 1)
    throw std::invalid_argument(
        "a forest over " + std::to_string(spec.roles) +
        " roles holds at most " + std::to_string(spec.roles - 1) + " pairs");
  if (static_cast<long long>(spec.urPairs) >
      static_cast<long long>(spec.users) * 10)
    throw std::invalid_argument(
        "urPairs exceeds the 10-roles-per-user cap");

  std::mt19937_64 rng(spec.seed);
  RbacWorkload w;

  for (int u = 1; u <= spec.users; ++u) w.initUsers.push_back(u);
  for (int r = 1; r <= spec.roles; ++r) w.initRoles.push_back(r);

  // Initial hierarchy: a forest of height at most 5. Roles are placed in
  // a random order; each of the first rhPairs non-root placements picks a
  // parent of depth < 5 among the already placed roles.
  std::vector<int> order = w.initRoles;
  shuffleVec(order, rng);
  std::map<int, int> depth;
  std::vector<int> shallow;  // placed roles with depth < 5
  depth[order[0]] = 0;
  shallow.push_back(order[0]);
  for (int i = 1; i <= spec.rhPairs; ++i) {
    int child = order[i];
    int parent = shallow[uniformBelow(rng, shallow.size())];
    w.initRh.emplace_back(parent, child);
    depth[child] = depth[parent] + 1;
    if (depth[child] < 5) shallow.push_back(child);
  }
  for (std::size_t i = spec.rhPairs + 1; i < order.size(); ++i) {
    depth[order[i]] = 0;
    shallow.push_back(order[i]);
  }

  // Initial user-role pairs: distinct, at most 10 roles per user.
  std::set<std::pair<int, int>> urSeen;
  std::map<int, int> roleCount;
  while (w.initUr.size() < static_cast<std::size_t>(spec.urPairs)) {
    int u = static_cast<int>(uniformBelow(rng, spec.users)) + 1;
    int r = static_cast<int>(uniformBelow(rng, spec.roles)) + 1;
    if (roleCount[u] >= 10) continue;
    if (!urSeen.insert({u, r}).second) continue;
    ++roleCount[u];
    w.initUr.emplace_back(u, r);
  }

  // The update multiset, shuffled together with the queries.
  using K = RbacOp::Kind;
  OpTotals t = opTotals(spec);
  std::vector<K> kinds;
  auto rep = [&](K k, long long n) { kinds.insert(kinds.end(), n, k); };
  rep(K::AddUser, t.addUser);
  rep(K::DeleteUser, t.delUser);
  rep(K::AddRole, t.addRole);
  rep(K::DeleteRole, t.delRole);
  rep(K::AddUr, t.addUr);
  rep(K::DeleteUr, t.delUr);
  rep(K::AddRh, t.addRh);
  rep(K::DeleteRh, t.delRh);
  rep(K::Query, spec.queries);
  shuffleVec(kinds, rng);

  // Arguments are drawn against the evolving state; impossible draws
  // (an empty pool) fall back to the never-used id 0, making the
  // operation a harmless no-op.
  std::vector<int> users = w.initUsers;
  std::vector<int> roles = w.initRoles;
  std::vector<std::pair<int, int>> ur = w.initUr;
  std::vector<std::pair<int, int>> rh = w.initRh;
  std::set<std::pair<int, int>> urSet(ur.begin(), ur.end());
  std::set<std::pair<int, int>> rhSet(rh.begin(), rh.end());
  int nextUser = spec.users;
  int nextRole = spec.roles;

  for (K k : kinds) {
    RbacOp op;
    op.kind = k;
    switch (k) {
      case K::AddUser:
        op.a = ++nextUser;
        users.push_back(op.a);
        break;
      case K::DeleteUser:
        if (!users.empty()) {
          op.a = takeAt(users, uniformBelow(rng, users.size()));
          for (std::size_t i = ur.size(); i-- > 0;)
            if (ur[i].first == op.a) {
              urSet.erase(ur[i]);
              takeAt(ur, i);
            }
        }
        break;
      case K::AddRole:
        op.a = ++nextRole;
        roles.push_back(op.a);
        break;
      case K::DeleteRole:
        if (!roles.empty()) {
          op.a = takeAt(roles, uniformBelow(rng, roles.size()));
          for (std::size_t i = ur.size(); i-- > 0;)
            if (ur[i].second == op.a) {
              urSeen.erase(ur[i]);
              urSet.erase(ur[i]);
              takeAt(ur, i);
            }
          for (std::size_t i = rh.size(); i-- > 0;)
            if (rh[i].first == op.a || rh[i].second == op.a) {
              rhSet.erase(rh[i]);
              takeAt(rh, i);
            }
        }
        break;
      case K::AddUr: {
        bool placed = false;
        for (int tries = 0; tries < 64 && !users.empty() && !roles.empty();
             ++tries) {
          int u = users[uniformBelow(rng, users.size())];
          int r = roles[uniformBelow(rng, roles.size())];
          if (urSet.insert({u, r}).second) {
            ur.emplace_back(u, r);
            op.a = u;
            op.b = r;
            placed = true;
            break;
          }
        }
        if (!placed) op.a = op.b = 0;
        break;
      }
      case K::DeleteUr:
        if (!ur.empty()) {
          auto p = takeAt(ur, uniformBelow(rng, ur.size()));
          urSet.erase(p);
          op.a = p.first;
          op.b = p.second;
        }
        break;
      case K::AddRh: {
        bool placed = false;
        for (int tries = 0; tries < 64 && roles.size() > 1; ++tries) {
          int a = roles[uniformBelow(rng, roles.size())];
          int b = roles[uniformBelow(rng, roles.size())];
          if (a == b) continue;
          if (rhSet.insert({a, b}).second) {
            rh.emplace_back(a, b);
            op.a = a;
            op.b = b;
            placed = true;
            break;
          }
        }
        if (!placed) op.a = op.b = 0;
        break;
      }
      case K::DeleteRh:
        if (!rh.empty()) {
          auto p = takeAt(rh, uniformBelow(rng, rh.size()));
          rhSet.erase(p);
          op.a = p.first;
          op.b = p.second;
        }
        break;
      case K::Query:
        op.a = roles.empty() ? 0 : roles[uniformBelow(rng, roles.size())];
        break;
    }
    w.ops.push_back(op);
  }
  return w;
}

// ---------------------------------------------------------------- checksums

namespace {

std::uint64_t fnv1a64(const std::string& s) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

std::uint64_t valuesChecksum(const std::vector<Value>& elems) {
  std::uint64_t sum = 0x9e3779b97f4a7c15ULL * elems.size();
  for (const Value& v : elems) sum += fnv1a64(toText(v));
  return sum;
}

std::uint64_t relationChecksum(const Relation& rel) {
  std::vector<Value> elems;
  elems.reserve(rel.size());
  for (const Row& r : rel.rows)
    elems.push_back(r.size() == 1 ? r[0] : Value::tuple(r));
  return valuesChecksum(elems);
}

// ---------------------------------------------------------------- running

const std::vector<std::string>& benchNames() {
  static const std::vector<std::string> names = {
      "TC",  "TCrev",       "TCloop",      "SG",        "ModSG",
      "Win", "RBACnonloc",  "RBACallloc",  "RBACunion"};
  return names;
}

std::string defaultAssetDir() { return RLI_ASSET_DIR; }

namespace {

std::string benchFileStem(const std::string& name) {
  if (name == "TC") return "tc";
  if (name == "TCrev") return "tcrev";
  if (name == "TCloop") return "tcloop";
  if (name == "SG") return "sg";
  if (name == "ModSG") return "modsg";
  if (name == "Win") return "win";
  if (name == "RBACnonloc") return "rbac_nonloc";
  if (name == "RBACallloc") return "rbac_allloc";
  if (name == "RBACunion") return "rbac_union";
  return "";
}

std::string readFile(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

Relation relFromPairs(const std::vector<std::pair<int, int>>& pairs) {
  Relation rel;
  rel.arity = 2;
  for (auto [a, b] : pairs)
    rel.insert({Value::integer(a), Value::integer(b)});
  return rel;
}

Relation relFromInts(const std::vector<int>& xs) {
  Relation rel;
  rel.arity = 1;
  for (int x : xs) rel.insert({Value::integer(x)});
  return rel;
}

/// Main body appended to an access-control class asset: build the initial
/// population, replay the script, and accumulate every query answer as
/// (queryIndex, user) rows in `results`.
std::string rbacMainText(const std::string& className,
                         const RbacWorkload& w) {
  std::string m;
  m += "results := {};\n";
  m += "o := new " + className + ";\n";
  m += "o.Setup();\n";
  m += "for u in userInit { o.AddUser(u); }\n";
  m += "for r in roleInit { o.AddRole(r); }\n";
  m += "for (u, r) in urInit { o.AddUR(u, r); }\n";
  m += "for (a, d) in rhInit { o.AddRH(a, d); }\n";
  int queryIndex = 0;
  using K = RbacOp::Kind;
  for (const RbacOp& op : w.ops) {
    const std::string a = std::to_string(op.a);
    const std::string b = std::to_string(op.b);
    switch (op.kind) {
      case K::AddUser: m += "o.AddUser(" + a + ");\n"; break;
      case K::DeleteUser: m += "o.DeleteUser(" + a + ");\n"; break;
      case K::AddRole: m += "o.AddRole(" + a + ");\n"; break;
      case K::DeleteRole: m += "o.DeleteRole(" + a + ");\n"; break;
      case K::AddUr: m += "o.AddUR(" + a + ", " + b + ");\n"; break;
      case K::DeleteUr: m += "o.DeleteUR(" + a + ", " + b + ");\n"; break;
      case K::AddRh: m += "o.AddRH(" + a + ", " + b + ");\n"; break;
      case K::DeleteRh: m += "o.DeleteRH(" + a + ", " + b + ");\n"; break;
      case K::Query: {
        ++queryIndex;
        m += "o.AuthorizedUsers(" + a + ");\n";
        m += "for u in o.answer { results.add((" +
             std::to_string(queryIndex) + ", u)); }\n";
        break;
      }
    }
  }
  m += "out := results;\n";
  return m;
}

}  // namespace

std::string benchProgramPath(const std::string& name,
                             const std::string& assetDir) {
  std::string stem = benchFileStem(name);
  if (stem.empty()) return "";
  std::string dir = assetDir.empty() ? defaultAssetDir() : assetDir;
  return dir + "/bench/" + stem + ".rl";
}

BenchReport runBench(const BenchRequest& req) {
  BenchReport rep;
  rep.name = req.name;
  try {
    const std::string path = benchProgramPath(req.name, req.assetDir);
    if (path.empty())
      throw std::runtime_error("unknown benchmark '" + req.name + "'");
    std::string src = readFile(path);

    const bool isRbac = req.name.rfind("RBAC", 0) == 0;
    RbacWorkload workload;
    if (isRbac) {
      workload = rbacWorkload(req.rbac);
      src += "\n" + rbacMainText(benchFileStem(req.name) == "rbac_nonloc"
                                     ? "RBACnonloc"
                                     : benchFileStem(req.name) == "rbac_allloc"
                                           ? "RBACallloc"
                                           : "RBACunion",
                                 workload);
    }

    ParseResult parsed = parseProgram(src);
    if (!parsed.ok())
      throw std::runtime_error("static checks failed: " +
                               parsed.diags.front().format());
    FreshNamer fresh;
    Program core = desugarProgram(parsed.program, fresh);

    auto t0 = std::chrono::steady_clock::now();
    Machine machine(core);
    if (req.name == "TC" || req.name == "TCrev" || req.name == "TCloop") {
      machine.bindGlobal("edge", relFromPairs(genGraphEdges(req.graph)));
    } else if (req.name == "Win") {
      machine.bindGlobal("move", relFromPairs(genGraphEdges(req.graph)));
    } else if (req.name == "SG" || req.name == "ModSG") {
      Family fam = genFamily(req.family);
      machine.bindGlobal("parent", relFromPairs(fam.parent));
      machine.bindGlobal("sibling", relFromPairs(fam.sibling));
    } else {
      machine.bindGlobal("userInit", relFromInts(workload.initUsers));
      machine.bindGlobal("roleInit", relFromInts(workload.initRoles));
      machine.bindGlobal("urInit", relFromPairs(workload.initUr));
      machine.bindGlobal("rhInit", relFromPairs(workload.initRh));
    }
    Outcome out = machine.run();
    auto t1 = std::chrono::steady_clock::now();
    rep.wallSeconds = std::chrono::duration<double>(t1 - t0).count();
    rep.steps = machine.counters().steps;
    rep.maintenanceRuns = machine.counters().maintenanceRuns;
    rep.inferCalls = machine.counters().inferCalls;
    if (out.kind != Outcome::Kind::Done)
      throw std::runtime_error("benchmark did not finish: " + out.message);

    std::optional<Value> result = machine.globalField("out");
    if (!result || !result->isAddress())
      throw std::runtime_error("benchmark left no 'out' set");
    std::vector<Value> elems = machine.contentsOf(result->asAddress());
    rep.rows = elems.size();
    rep.checksum = valuesChecksum(elems);
    rep.ok = true;
  } catch (const std::exception& e) {
    rep.ok = false;
    rep.error = e.what();
  }
  return rep;
}

std::string formatReport(const BenchReport& r) {
  if (!r.ok) return "bench " + r.name + ": error: " + r.error;
  char checksum[32];
  std::snprintf(checksum, sizeof checksum, "%016llx",
                static_cast<unsigned long long>(r.checksum));
  char seconds[32];
  std::snprintf(seconds, sizeof seconds, "%.6f", r.wallSeconds);
  return "bench " + r.name + ": checksum=" + checksum +
         " rows=" + std::to_string(r.rows) + " time=" + seconds +
         "s steps=" + std::to_string(r.steps) +
         " maintenance=" + std::to_string(r.maintenanceRuns) +
         " infers=" + std::to_string(r.inferCalls);
}

bool applySpecSetting(BenchRequest& req, const std::string& key,
                      const std::string& value) {
  auto asInt = [&](long long& out) {
    try {
      std::size_t pos = 0;
      out = std::stoll(value, &pos);
      return pos == value.size();
    } catch (const std::exception&) {
      return false;
    }
  };
  long long n = 0;
  if (key == "vertices") {
    if (!asInt(n)) return false;
    req.graph.vertices = static_cast<int>(n);
  } else if (key == "edges") {
    if (!asInt(n)) return false;
    req.graph.edges = n;
  } else if (key == "cyclic") {
    if (value == "true" || value == "1") req.graph.cyclic = true;
    else if (value == "false" || value == "0") req.graph.cyclic = false;
    else return false;
  } else if (key == "seed") {
    if (!asInt(n)) return false;
    req.graph.seed = static_cast<std::uint64_t>(n);
    req.family.seed = static_cast<std::uint64_t>(n);
    req.rbac.seed = static_cast<std::uint64_t>(n);
  } else if (key == "people") {
    if (!asInt(n)) return false;
    req.family.people = static_cast<int>(n);
  } else if (key == "users") {
    if (!asInt(n)) return false;
    req.rbac.users = static_cast<int>(n);
  } else if (key == "roles") {
    if (!asInt(n)) return false;
    req.rbac.roles = static_cast<int>(n);
  } else if (key == "urPairs") {
    if (!asInt(n)) return false;
    req.rbac.urPairs = static_cast<int>(n);
  } else if (key == "rhPairs") {
    if (!asInt(n)) return false;
    req.rbac.rhPairs = static_cast<int>(n);
  } else if (key == "queries") {
    if (!asInt(n)) return false;
    req.rbac.queries = static_cast<int>(n);
  } else {
    return false;
  }
  return true;
}

}  // namespace rli
