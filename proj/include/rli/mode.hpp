#pragma once

namespace rli {

/// How update legality interacts with aliasing. NoAlias trusts that
/// distinct names denote distinct objects, so syntactic updates of derived
/// predicates are compile-time errors; AliasChecked accepts them statically
/// and relies on the runtime guard. Execution semantics are identical in
/// both modes — the guard itself always runs.
enum class AliasMode {
  NoAlias,
  AliasChecked,
};

}  // namespace rli
