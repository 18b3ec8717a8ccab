#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "rli/engine.hpp"
#include "rli/value.hpp"

namespace rli {

// ------------------------------------------------------------ inputs

/// Shape of a random directed graph for the closure and game benchmarks.
struct GraphSpec {
  int vertices = 1000;
  long long edges = 10000;
  bool cyclic = true;
  std::uint64_t seed = 1;
};

/// Uniformly sampled distinct edges over vertices 1..n. Cyclic graphs
/// draw from all ordered pairs (self-loops included); acyclic graphs
/// only emit (u, v) with u < v, so the result is always a DAG. The
/// sequence is a pure function of the spec. Throws std::invalid_argument
/// when more distinct edges are requested than the shape admits.
std::vector<std::pair<int, int>> genGraphEdges(const GraphSpec& spec);

/// The same edges rendered as fact-file text: one `pred(u, v).` line per
/// edge in generation order, byte-identical across runs of one spec.
std::string genGraphFacts(const GraphSpec& spec,
                          const std::string& pred = "edge");

/// Shape of a random family tree for the same-generation benchmarks.
struct FamilySpec {
  int people = 40;
  std::uint64_t seed = 1;
};

struct Family {
  std::vector<std::pair<int, int>> parent;   // (child, parent)
  std::vector<std::pair<int, int>> sibling;  // both directions
};

/// Generations of people where each non-root draws one or two parents
/// from the previous generation; siblings are distinct people sharing a
/// parent, listed in both orders. Deterministic per seed.
Family genFamily(const FamilySpec& spec);
std::string genFamilyFacts(const FamilySpec& spec);

/// Shape of an access-control workload: initial population sizes plus a
/// number of AuthorizedUsers queries mixed into the update script.
struct RbacWorkloadSpec {
  int users = 500;
  int roles = 50;
  int urPairs = 550;
  /// Initial hierarchy pairs; the initial hierarchy is a forest of height
  /// at most 5, so this must leave a root: rhPairs <= roles - 1.
  int rhPairs = 49;
  int queries = 50;
  std::uint64_t seed = 1;
};

struct RbacOp {
  enum class Kind {
    AddUser,
    DeleteUser,
    AddRole,
    DeleteRole,
    AddUr,
    DeleteUr,
    AddRh,
    DeleteRh,
    Query
  };
  Kind kind{};
  int a = 0;
  int b = 0;  // second argument of the pair operations
};

struct RbacWorkload {
  std::vector<int> initUsers;
  std::vector<int> initRoles;
  std::vector<std::pair<int, int>> initUr;  // (user, role)
  std::vector<std::pair<int, int>> initRh;  // (senior, junior)
  /// A uniformly random permutation of the fixed update multiset plus
  /// `queries` AuthorizedUsers calls; arguments are drawn against the
  /// state the script has built up to that point.
  std::vector<RbacOp> ops;
};

/// Number of update operations in every workload for `spec`: the baseline
/// totals at 5000 users (50/50 user add/delete, 5/5 role, 55/55 user-role
/// pair, 5/5 hierarchy pair) scaled by users/5000, rounded half away from
/// zero with a floor of one per operation.
long long rbacUpdateOpTotal(const RbacWorkloadSpec& spec);

/// Deterministic per seed; script length is rbacUpdateOpTotal + queries.
/// Throws std::invalid_argument on shapes that cannot be populated
/// (rhPairs > roles - 1, urPairs beyond the 10-roles-per-user cap, ...).
RbacWorkload rbacWorkload(const RbacWorkloadSpec& spec);

// ------------------------------------------------------------ running

/// The benchmark program names accepted by runBench.
const std::vector<std::string>& benchNames();

struct BenchRequest {
  std::string name = "TC";
  GraphSpec graph;             // TC, TCrev, TCloop, Win
  FamilySpec family;           // SG, ModSG
  RbacWorkloadSpec rbac;       // RBACnonloc, RBACallloc, RBACunion
  std::string assetDir;        // empty: compiled-in repo assets directory
};

struct BenchReport {
  std::string name;
  bool ok = false;
  std::string error;           // set when !ok
  std::uint64_t checksum = 0;  // order-independent, over the result set
  std::size_t rows = 0;        // result set size
  double wallSeconds = 0.0;    // machine construction + binding + run
  std::uint64_t steps = 0;
  std::uint64_t maintenanceRuns = 0;
  std::uint64_t inferCalls = 0;
};

/// Loads the named benchmark program from the asset directory, binds the
/// generated input relations, runs it, and reports a checksum of the
/// program's `out` set together with wall time and step counts.
BenchReport runBench(const BenchRequest& req);

/// One line: name, checksum, rows, time, steps (or the error).
std::string formatReport(const BenchReport& r);

/// Applies a `--spec key=value` setting (vertices, edges, cyclic, seed,
/// people, users, roles, urPairs, rhPairs, queries) to the request.
/// Returns false for unknown keys or unparsable values.
bool applySpecSetting(BenchRequest& req, const std::string& key,
                      const std::string& value);

// ------------------------------------------------------------ checksums

/// Sum of per-element hashes of the canonical element texts; independent
/// of element order and of how the set was built.
std::uint64_t valuesChecksum(const std::vector<Value>& elems);

/// Rows hash as the set elements they would populate: arity-1 rows as
/// bare elements, wider rows as tuples. Comparable with valuesChecksum
/// over a machine set holding the same contents.
std::uint64_t relationChecksum(const Relation& rel);

/// Compiled-in path of the repository's asset directory.
std::string defaultAssetDir();

/// Path of the program file that runBench loads for `name`.
std::string benchProgramPath(const std::string& name,
                             const std::string& assetDir = "");

}  // namespace rli
