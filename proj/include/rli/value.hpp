#pragma once

#include <cstdint>
#include <memory>
#include <set>
#include <string>
#include <vector>

namespace rli {

/// Heap address. Address 0 is the globals object, allocated at startup.
using Addr = uint32_t;
inline constexpr Addr kGlobalsAddr = 0;

/// Immutable runtime value: None, booleans, integers, strings, heap
/// addresses, and nested tuples. Tuples share their payload, so copies are
/// cheap. Mutable state (sets, sequences, objects) lives behind an Addr.
class Value {
public:
  enum class Kind : uint8_t { None, Bool, Int, Str, Tuple, Address };

  Value() : kind_(Kind::None) {}

  static Value none() { return Value(); }
  static Value boolean(bool b) {
    Value v;
    v.kind_ = Kind::Bool;
    v.b_ = b;
    return v;
  }
  static Value integer(int64_t i) {
    Value v;
    v.kind_ = Kind::Int;
    v.i_ = i;
    return v;
  }
  static Value str(std::string s) {
    Value v;
    v.kind_ = Kind::Str;
    v.s_ = std::make_shared<const std::string>(std::move(s));
    return v;
  }
  static Value tuple(std::vector<Value> elems) {
    Value v;
    v.kind_ = Kind::Tuple;
    v.t_ = std::make_shared<const std::vector<Value>>(std::move(elems));
    return v;
  }
  static Value address(Addr a) {
    Value v;
    v.kind_ = Kind::Address;
    v.a_ = a;
    return v;
  }

  Kind kind() const { return kind_; }
  bool isNone() const { return kind_ == Kind::None; }
  bool isBool() const { return kind_ == Kind::Bool; }
  bool isInt() const { return kind_ == Kind::Int; }
  bool isStr() const { return kind_ == Kind::Str; }
  bool isTuple() const { return kind_ == Kind::Tuple; }
  bool isAddress() const { return kind_ == Kind::Address; }

  bool asBool() const { return b_; }
  int64_t asInt() const { return i_; }
  const std::string& asStr() const { return *s_; }
  const std::vector<Value>& asTuple() const { return *t_; }
  Addr asAddress() const { return a_; }

  /// True if this value or any nested tuple component is a heap address.
  bool containsAddress() const {
    if (kind_ == Kind::Address) return true;
    if (kind_ == Kind::Tuple) {
      for (const Value& e : *t_)
        if (e.containsAddress()) return true;
    }
    return false;
  }

private:
  Kind kind_;
  bool b_ = false;
  int64_t i_ = 0;
  Addr a_ = 0;
  std::shared_ptr<const std::string> s_;
  std::shared_ptr<const std::vector<Value>> t_;
};

/// Three-way comparison in the canonical linearization order:
/// None < Bool < Int < Str < Tuple < Address, with the natural order inside
/// each kind and lexicographic order for tuples.
int compareValues(const Value& a, const Value& b);

inline bool operator==(const Value& a, const Value& b) {
  return compareValues(a, b) == 0;
}
inline bool operator!=(const Value& a, const Value& b) { return !(a == b); }

struct ValueLess {
  bool operator()(const Value& a, const Value& b) const {
    return compareValues(a, b) < 0;
  }
};

size_t hashValue(const Value& v);

struct ValueHash {
  size_t operator()(const Value& v) const { return hashValue(v); }
};
struct ValueEq {
  bool operator()(const Value& a, const Value& b) const { return a == b; }
};

/// Canonical text form: None, True, False, 42, 'str', (1, 2), (1,), ().
std::string toText(const Value& v);

/// Ordered set of values; iteration order is the canonical linearization.
using ValueSet = std::set<Value, ValueLess>;

/// One relation row. Rows have a fixed length (the predicate arity) and are
/// plain vectors rather than tuple Values so inner loops avoid allocation.
using Row = std::vector<Value>;

size_t hashRow(const Row& r);

/// Lexicographic by component, shorter rows first on a tie.
int compareRows(const Row& a, const Row& b);

struct RowHash {
  size_t operator()(const Row& r) const { return hashRow(r); }
};
struct RowLess {
  bool operator()(const Row& a, const Row& b) const {
    return compareRows(a, b) < 0;
  }
};
struct RowEq {
  bool operator()(const Row& a, const Row& b) const {
    if (a.size() != b.size()) return false;
    for (size_t i = 0; i < a.size(); ++i)
      if (a[i] != b[i]) return false;
    return true;
  }
};

std::string toText(const Row& r);

}  // namespace rli
