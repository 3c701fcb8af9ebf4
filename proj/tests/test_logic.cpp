#include <doctest.h>

#include <set>

#include "oracles.hpp"
#include "softtype/error.hpp"
#include "softtype/logic.hpp"

using namespace softtype;

namespace {

Constraint is(IdentIndex v, TypeIndex t) { return Constraint::is(v, t); }

}  // namespace

TEST_CASE("name tables reject empty and duplicate names") {
  CHECK_THROWS_AS(TypeUniverse(std::vector<std::string>{}), InvalidArgument);
  CHECK_THROWS_AS(TypeUniverse({"number", "number"}), InvalidArgument);
  CHECK_THROWS_AS(IdentifierSet({"x", ""}), InvalidArgument);
  TypeUniverse u({"number", "string"});
  CHECK(u.size() == 2);
  CHECK(u.find("string") == 1u);
  CHECK_FALSE(u.find("boolean").has_value());
}

TEST_CASE("satisfies on the addNum constraint") {
  // start=0, end=1; number=0, string=1
  Constraint e = (is(0, 0) && is(1, 0)) || (is(0, 1) && is(1, 1));
  CHECK(satisfies(TypeEnvironment({0, 0}, 2), e));
  CHECK(satisfies(TypeEnvironment({1, 1}, 2), e));
  CHECK_FALSE(satisfies(TypeEnvironment({0, 1}, 2), e));
}

TEST_CASE("negated satisfied atom is false") {
  CHECK_FALSE(satisfies(TypeEnvironment({0}, 1), !is(0, 0)));
}

TEST_CASE("out of range atoms are malformed") {
  CHECK_THROWS_AS(satisfies(TypeEnvironment({0}, 2), is(1, 0)), MalformedConstraint);
  CHECK_THROWS_AS(satisfies(TypeEnvironment({0}, 2), is(0, 2) || is(0, 0)), MalformedConstraint);
  CHECK_THROWS_AS(validate(is(0, 3), 1, 3), MalformedConstraint);
  CHECK_NOTHROW(validate(is(0, 2), 1, 3));
}

TEST_CASE("environments reject out of range types") {
  CHECK_THROWS_AS(TypeEnvironment({0, 3}, 3), InvalidArgument);
}

TEST_CASE("satisfies agrees with a truth table for V=2 T=2 depth 3") {
  Rng rng(11);
  for (int i = 0; i < 2000; ++i) {
    Constraint e = oracle::randomFormula(rng, 2, 2, 3);
    for (const auto& env : oracle::allEnvironments(2, 2)) {
      REQUIRE(satisfies(TypeEnvironment(env, 2), e) == oracle::holds(env, e));
    }
  }
}

TEST_CASE("double negation and excluded middle") {
  Rng rng(12);
  for (int i = 0; i < 500; ++i) {
    Constraint e = oracle::randomFormula(rng, 3, 3, 4);
    for (const auto& env : enumerateEnvironments(3, 3)) {
      bool s = satisfies(env, e);
      REQUIRE(s == satisfies(env, !!e));
      REQUIRE(s != satisfies(env, !e));
    }
  }
}

TEST_CASE("binary matrix is one-hot") {
  ProbabilityMatrix b = toBinaryMatrix(TypeEnvironment({1}, 3));
  CHECK(b.values() == Matrix{{0.0, 1.0, 0.0}});

  ProbabilityMatrix all_number = toBinaryMatrix(TypeEnvironment({0, 0, 0}, 3));
  for (std::size_t v = 0; v < 3; ++v) {
    CHECK(all_number(v, 0) == 1.0);
    CHECK(all_number(v, 1) == 0.0);
  }

  Rng rng(3);
  for (int i = 0; i < 100; ++i) {
    std::size_t v = 1 + rng.below(6), t = 1 + rng.below(5);
    std::vector<TypeIndex> a(v);
    for (auto& x : a) x = static_cast<TypeIndex>(rng.below(t));
    ProbabilityMatrix m = toBinaryMatrix(TypeEnvironment(a, t));
    for (std::size_t r = 0; r < v; ++r) {
      double s = 0.0;
      for (double x : m.row(r)) s += x;
      REQUIRE(s == 1.0);
    }
  }
}

TEST_CASE("binary matrix is injective") {
  std::set<std::vector<double>> seen;
  std::size_t n = 0;
  for (const auto& env : enumerateEnvironments(3, 3)) {
    auto d = toBinaryMatrix(env).values().data();
    seen.insert(std::vector<double>(d.begin(), d.end()));
    ++n;
  }
  CHECK(seen.size() == n);
}

TEST_CASE("environment enumeration") {
  CHECK(enumerateEnvironments(1, 2).count() == 2);
  std::size_t n = 0;
  for ([[maybe_unused]] const auto& env : enumerateEnvironments(2, 3)) ++n;
  CHECK(n == 9);

  std::set<std::vector<TypeIndex>> distinct;
  for (const auto& env : enumerateEnvironments(3, 3)) distinct.insert(env.assignment());
  CHECK(distinct.size() == 27);

  CHECK_THROWS_AS(enumerateEnvironments(7, 10), InvalidArgument);
  CHECK_THROWS_AS(enumerateEnvironments(3, 3, 26), InvalidArgument);
  CHECK_NOTHROW(enumerateEnvironments(3, 3, 27));
}

TEST_CASE("structural equality and sizes") {
  Constraint a = is(0, 1) && !is(1, 0);
  Constraint b = is(0, 1) && !is(1, 0);
  CHECK(a == b);
  CHECK_FALSE(a == (is(0, 1) || !is(1, 0)));
  CHECK(a.depth() == 2);
  CHECK(is(0, 0).depth() == 0);
  CHECK(a.nodeCount() == 4);
  CHECK(requiredIdents(a) == 2);
  CHECK(requiredTypes(a) == 2);
}

TEST_CASE("balanced conjunction keeps meaning and depth") {
  std::vector<Constraint> parts;
  for (IdentIndex v = 0; v < 16; ++v) parts.push_back(is(v, 0) || is(v, 1));
  Constraint all = conjoinAll(parts);
  CHECK(all.depth() <= 5);
  std::vector<TypeIndex> env(16, 1);
  CHECK(oracle::holds(env, all));
  env[9] = 2;
  CHECK_FALSE(oracle::holds(env, all));
  CHECK_THROWS_AS(conjoinAll({}), InvalidArgument);

  Constraint any = disjoinAll({is(0, 0), is(0, 1), is(0, 2)});
  CHECK(oracle::equivalent(any, is(0, 0) || (is(0, 1) || is(0, 2)), 1, 3));
}
