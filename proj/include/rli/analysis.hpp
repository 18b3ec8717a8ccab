#pragma once

#include <string>
#include <vector>

#include "rli/ast.hpp"
#include "rli/diag.hpp"
#include "rli/mode.hpp"

namespace rli {

/// What a heap-update site touches: a base predicate of some rule set
/// (maintenance-relevant), a derived predicate (illegal to update
/// directly), or a field no rule set cares about.
enum class UpdateKind { BaseUpdate, DerivedUpdateError, Unrelated };

struct UpdateSite {
  SrcLoc loc;
  std::string target;   // field being updated, in display form
  std::string context;  // "main" or "Class.method"
  UpdateKind kind = UpdateKind::Unrelated;
};

/// Classification of every update site in a desugared program:
/// assignments, object creations, add/del calls, and infer targets.
struct UpdateSiteReport {
  AliasMode mode = AliasMode::NoAlias;
  std::vector<UpdateSite> sites;
  /// E013 diagnostics for derived-update sites. Populated only in
  /// no-alias mode; alias-checked mode defers to the runtime guard.
  Diagnostics diags;
};

/// Classifies update sites against the program's rule sets. Global-field
/// targets are matched program-wide; `self.f` targets against the rule
/// sets of the enclosing class and its ancestors. Updates through any
/// other object expression are aliasing territory and stay unrelated —
/// the runtime guard covers them when they are executed.
UpdateSiteReport checkUpdates(const Program& core, AliasMode mode);

/// Standalone validation of every infer reference in a desugared program:
/// the rule set must exist, keyword arguments must name base-predicate
/// locals, and queries derived locals. Matches the front end's E014.
Diagnostics localInferCheck(const Program& core);

/// Human-readable site listing for the explain-updates command.
std::string explainUpdates(const UpdateSiteReport& report);

}  // namespace rli
