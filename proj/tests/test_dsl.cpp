#include <doctest.h>

#include "oracles.hpp"
#include "softtype/dsl.hpp"
#include "softtype/error.hpp"

using namespace softtype;

namespace {

const IdentifierSet kIds({"start", "end", "addNum", "f.x"});
const TypeUniverse kTypes({"number", "string", "boolean"});

}  // namespace

TEST_CASE("and binds tighter than or, not tightest") {
  auto f = parseConstraints("start is number or end is string and not addNum is boolean", kIds, kTypes);
  REQUIRE(f.size() == 1);
  Constraint want = Constraint::is(0, 0) || (Constraint::is(1, 1) && !Constraint::is(2, 2));
  CHECK(f[0] == want);
}

TEST_CASE("parentheses, comments and several formulas") {
  auto f = parseConstraints(
      "# header\n(start is number or start is string) and f.x is boolean;  # trailing\n"
      "end is number;\n",
      kIds, kTypes);
  REQUIRE(f.size() == 2);
  CHECK(f[0] == ((Constraint::is(0, 0) || Constraint::is(0, 1)) && Constraint::is(3, 2)));
  CHECK(f[1] == Constraint::is(1, 0));
}

TEST_CASE("parse errors carry a location") {
  try {
    parseConstraints("start is number and\n  end is nothing", kIds, kTypes);
    FAIL("expected a parse error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 10);
  }
  CHECK_THROWS_AS(parseConstraints("start is", kIds, kTypes), ParseError);
  CHECK_THROWS_AS(parseConstraints("(start is number", kIds, kTypes), ParseError);
  CHECK_THROWS_AS(parseConstraints("who is number", kIds, kTypes), ParseError);
  CHECK(parseConstraints("# nothing\n", kIds, kTypes).empty());
  CHECK_THROWS_AS(parseConstraintsOpen("# nothing\n"), ParseError);
  CHECK_THROWS_AS(parseConstraints("start is number @", kIds, kTypes), ParseError);
}

TEST_CASE("open parse builds tables in order of appearance") {
  OpenParse p = parseConstraintsOpen("b is T2 or a is T1; a is T2");
  CHECK(p.ids.names() == std::vector<std::string>{"b", "a"});
  CHECK(p.universe.names() == std::vector<std::string>{"T2", "T1"});
  CHECK(p.formulas.size() == 2);
}

TEST_CASE("format then parse is the identity") {
  Rng rng(5);
  for (int i = 0; i < 2000; ++i) {
    Constraint e = oracle::randomFormula(rng, 4, 3, 5);
    std::string text = formatConstraint(e, kIds, kTypes);
    auto back = parseConstraints(text, kIds, kTypes);
    REQUIRE(back.size() == 1);
    REQUIRE(back[0] == e);
  }
}

TEST_CASE("formatting uses minimal parentheses") {
  Constraint e = (Constraint::is(0, 0) && Constraint::is(1, 0)) || Constraint::is(2, 1);
  CHECK(formatConstraint(e, kIds, kTypes) == "start is number and end is number or addNum is string");
  Constraint g = Constraint::is(0, 0) && (Constraint::is(1, 0) || Constraint::is(2, 1));
  CHECK(formatConstraint(g, kIds, kTypes) == "start is number and (end is number or addNum is string)");
  CHECK(formatConstraint(!g, kIds, kTypes) == "not (start is number and (end is number or addNum is string))");
}
