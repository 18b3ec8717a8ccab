#pragma once

#include <map>
#include <string>
#include <vector>

#include "rli/diag.hpp"
#include "rli/value.hpp"

namespace rli {

/// Relations read from a fact file: predicate name to rows of equal length.
using FactMap = std::map<std::string, std::vector<Row>>;

/// Parses fact text: one `name(lit, ..., lit).` per line, `#` comments,
/// literals are integers or single-quoted strings. Mixed arities for one
/// name and malformed lines produce E010 diagnostics.
FactMap parseFacts(const std::string& src, Diagnostics& diags);

/// Renders a FactMap in the same line format, names sorted, rows in
/// canonical value order.
std::string formatFacts(const FactMap& facts);

}  // namespace rli
