#include "rli/value.hpp"

#include <algorithm>
#include <sstream>

namespace rli {

int compareValues(const Value& a, const Value& b) {
  if (a.kind() != b.kind())
    return static_cast<int>(a.kind()) < static_cast<int>(b.kind()) ? -1 : 1;
  switch (a.kind()) {
    case Value::Kind::None:
      return 0;
    case Value::Kind::Bool:
      return (a.asBool() ? 1 : 0) - (b.asBool() ? 1 : 0);
    case Value::Kind::Int:
      return a.asInt() < b.asInt() ? -1 : a.asInt() > b.asInt() ? 1 : 0;
    case Value::Kind::Str:
      return a.asStr().compare(b.asStr());
    case Value::Kind::Tuple: {
      const auto& x = a.asTuple();
      const auto& y = b.asTuple();
      size_t n = std::min(x.size(), y.size());
      for (size_t i = 0; i < n; ++i) {
        int c = compareValues(x[i], y[i]);
        if (c != 0) return c;
      }
      return x.size() < y.size() ? -1 : x.size() > y.size() ? 1 : 0;
    }
    case Value::Kind::Address:
      return a.asAddress() < b.asAddress() ? -1
             : a.asAddress() > b.asAddress() ? 1
                                             : 0;
  }
  return 0;
}

namespace {

constexpr size_t kFnvOffset = 14695981039346656037ull;
constexpr size_t kFnvPrime = 1099511628211ull;

size_t fnvMix(size_t h, size_t x) {
  for (int i = 0; i < 8; ++i) {
    h ^= (x >> (i * 8)) & 0xff;
    h *= kFnvPrime;
  }
  return h;
}

}  // namespace

size_t hashValue(const Value& v) {
  size_t h = fnvMix(kFnvOffset, static_cast<size_t>(v.kind()) + 0x9e);
  switch (v.kind()) {
    case Value::Kind::None:
      break;
    case Value::Kind::Bool:
      h = fnvMix(h, v.asBool() ? 1 : 0);
      break;
    case Value::Kind::Int:
      h = fnvMix(h, static_cast<size_t>(v.asInt()));
      break;
    case Value::Kind::Str:
      h = fnvMix(h, std::hash<std::string>()(v.asStr()));
      break;
    case Value::Kind::Tuple:
      for (const Value& e : v.asTuple()) h = fnvMix(h, hashValue(e));
      h = fnvMix(h, v.asTuple().size());
      break;
    case Value::Kind::Address:
      h = fnvMix(h, v.asAddress());
      break;
  }
  return h;
}

size_t hashRow(const Row& r) {
  size_t h = kFnvOffset;
  for (const Value& v : r) h = fnvMix(h, hashValue(v));
  return fnvMix(h, r.size());
}

int compareRows(const Row& a, const Row& b) {
  size_t n = std::min(a.size(), b.size());
  for (size_t i = 0; i < n; ++i)
    if (int c = compareValues(a[i], b[i])) return c;
  return a.size() < b.size() ? -1 : a.size() > b.size() ? 1 : 0;
}

std::string toText(const Value& v) {
  switch (v.kind()) {
    case Value::Kind::None:
      return "None";
    case Value::Kind::Bool:
      return v.asBool() ? "True" : "False";
    case Value::Kind::Int:
      return std::to_string(v.asInt());
    case Value::Kind::Str: {
      std::string out = "'";
      for (char c : v.asStr()) {
        if (c == '\'' || c == '\\') out.push_back('\\');
        if (c == '\n') {
          out += "\\n";
          continue;
        }
        out.push_back(c);
      }
      out.push_back('\'');
      return out;
    }
    case Value::Kind::Tuple: {
      const auto& t = v.asTuple();
      std::string out = "(";
      for (size_t i = 0; i < t.size(); ++i) {
        if (i) out += ", ";
        out += toText(t[i]);
      }
      if (t.size() == 1) out += ",";
      out += ")";
      return out;
    }
    case Value::Kind::Address:
      return "@" + std::to_string(v.asAddress());
  }
  return "?";
}

std::string toText(const Row& r) {
  std::string out = "(";
  for (size_t i = 0; i < r.size(); ++i) {
    if (i) out += ", ";
    out += toText(r[i]);
  }
  if (r.size() == 1) out += ",";
  out += ")";
  return out;
}

}  // namespace rli
