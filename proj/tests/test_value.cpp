#include <doctest.h>

#include <algorithm>
#include <vector>

#include "rli/value.hpp"

using namespace rli;

TEST_CASE("canonical order ranks kinds none < bool < int < str < tuple < addr") {
  std::vector<Value> vs = {
      Value::address(3),
      Value::tuple({Value::integer(1)}),
      Value::str("a"),
      Value::integer(0),
      Value::boolean(false),
      Value::none(),
  };
  std::sort(vs.begin(), vs.end(), ValueLess{});
  CHECK(vs[0] == Value::none());
  CHECK(vs[1] == Value::boolean(false));
  CHECK(vs[2] == Value::integer(0));
  CHECK(vs[3] == Value::str("a"));
  CHECK(vs[4].kind() == Value::Kind::Tuple);
  CHECK(vs[5].kind() == Value::Kind::Address);
}

TEST_CASE("within-kind order is natural") {
  CHECK(compareValues(Value::boolean(false), Value::boolean(true)) < 0);
  CHECK(compareValues(Value::integer(-5), Value::integer(3)) < 0);
  CHECK(compareValues(Value::str("ab"), Value::str("b")) < 0);
  CHECK(compareValues(Value::address(1), Value::address(2)) < 0);
}

TEST_CASE("tuples compare lexicographically, length breaks ties") {
  Value t12 = Value::tuple({Value::integer(1), Value::integer(2)});
  Value t13 = Value::tuple({Value::integer(1), Value::integer(3)});
  Value t1 = Value::tuple({Value::integer(1)});
  Value t123 =
      Value::tuple({Value::integer(1), Value::integer(2), Value::integer(3)});
  CHECK(compareValues(t12, t13) < 0);
  CHECK(compareValues(t1, t12) < 0);
  CHECK(compareValues(t12, t123) < 0);
  CHECK(compareValues(t12, t12) == 0);
}

TEST_CASE("structural equality on immutables, identity on addresses") {
  CHECK(Value::tuple({Value::str("x")}) == Value::tuple({Value::str("x")}));
  CHECK(Value::address(7) == Value::address(7));
  CHECK(Value::address(7) != Value::address(8));
  CHECK(Value::integer(1) != Value::boolean(true));
}

TEST_CASE("hashing agrees with equality on a mixed sample") {
  std::vector<Value> sample = {
      Value::none(),
      Value::boolean(true),
      Value::integer(42),
      Value::str("hi"),
      Value::tuple({Value::integer(1), Value::str("a")}),
      Value::address(9),
      Value::tuple({}),
  };
  for (const Value& a : sample)
    for (const Value& b : sample) {
      if (a == b) CHECK(hashValue(a) == hashValue(b));
    }
}

TEST_CASE("containsAddress sees through nested tuples") {
  Value nested = Value::tuple(
      {Value::integer(1), Value::tuple({Value::address(4), Value::none()})});
  CHECK(nested.containsAddress());
  CHECK(!Value::tuple({Value::integer(1)}).containsAddress());
  CHECK(Value::address(0).containsAddress());
}

TEST_CASE("printing uses literal syntax") {
  CHECK(toText(Value::none()) == "None");
  CHECK(toText(Value::boolean(true)) == "True");
  CHECK(toText(Value::boolean(false)) == "False");
  CHECK(toText(Value::integer(-3)) == "-3");
  CHECK(toText(Value::str("a'b\\c")) == "'a\\'b\\\\c'");
  CHECK(toText(Value::tuple({Value::integer(1), Value::integer(2)})) ==
        "(1, 2)");
  CHECK(toText(Value::tuple({Value::integer(1)})) == "(1,)");
  CHECK(toText(Value::tuple({})) == "()");
  CHECK(toText(Value::address(5)) == "@5");
}

TEST_CASE("rows hash and compare componentwise") {
  Row a = {Value::integer(1), Value::str("x")};
  Row b = {Value::integer(1), Value::str("x")};
  Row c = {Value::integer(2), Value::str("x")};
  CHECK(RowEq{}(a, b));
  CHECK(!RowEq{}(a, c));
  CHECK(hashRow(a) == hashRow(b));
}
