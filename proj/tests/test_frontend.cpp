#include <doctest.h>

#include <json.hpp>

#include "oracles.hpp"
#include "softtype/dsl.hpp"
#include "softtype/error.hpp"
#include "softtype/frontend.hpp"
#include "softtype/program_corpus.hpp"

using namespace softtype;

namespace {

ConstraintBundle bundleOf(const std::string& source) {
  return generateConstraints(stripAnnotations(parseProgram(source)), defaultUniverse());
}

// The formula over (ids, universe) parsed from text.
Constraint expect(const ConstraintBundle& b, const std::string& text) {
  return conjoinAll(parseConstraints(text, b.ids, b.universe));
}

bool sameMeaning(const ConstraintBundle& b, const std::string& text) {
  REQUIRE(b.constraint.has_value());
  return oracle::equivalent(*b.constraint, expect(b, text), b.ids.size(), b.universe.size());
}

}  // namespace

TEST_CASE("parse the running example") {
  Program p = parseProgram("function addNum(start, end) { return start + end; }");
  REQUIRE(p.functions.size() == 1);
  CHECK(p.functions[0].name == "addNum");
  CHECK(p.functions[0].params.size() == 2);
  CHECK(p.functions[0].body.size() == 1);
  CHECK(p.functions[0].body[0].kind == StmtKind::Return);
}

TEST_CASE("empty and comment-only files") {
  CHECK(parseProgram("").functions.empty());
  CHECK(parseProgram("  // nothing here\n\n").functions.empty());
}

TEST_CASE("syntax errors carry a location") {
  try {
    parseProgram("function f(x) {\n  return x;\n");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 1);
    CHECK(e.column() == 15);
  }
  try {
    parseProgram("function f(x) {\n  return x +;\n}");
    FAIL("expected an error");
  } catch (const ParseError& e) {
    CHECK(e.line() == 2);
    CHECK(e.column() == 13);
  }
  CHECK_THROWS_AS(parseProgram("function (x) {}"), ParseError);
  CHECK_THROWS_AS(parseProgram("function f(x) { return \"open; }"), ParseError);
}

TEST_CASE("stripping annotations") {
  const std::string gold = runningExampleSource();
  Program p = parseProgram(gold);
  Program bare = stripAnnotations(p);
  CHECK(stripAnnotations(bare) == bare);
  CHECK_FALSE(bare.functions[0].return_annotation.has_value());
  for (const auto& param : bare.functions[0].params) CHECK_FALSE(param.annotation.has_value());

  std::string text = stripSource(gold, p);
  CHECK(text == "function addNum(start, end) {\n  return start + end;\n}\n");
  Program reparsed = parseProgram(text);
  CHECK(stripSource(text, reparsed) == text);
  // gold annotations survive on the original AST
  CHECK(p.functions[0].params[0].annotation->type == "number");
}

TEST_CASE("running example constraint") {
  ConstraintBundle b = bundleOf(runningExampleSource());
  CHECK(b.ids.names() == std::vector<std::string>{"addNum", "start", "end"});
  CHECK(b.slots[0].kind == SlotKind::Fun);
  CHECK(b.slots[1].kind == SlotKind::Par);
  CHECK(sameMeaning(b,
                    "(start is number and end is number and addNum is number) or "
                    "(start is string and end is string and addNum is string)"));
}

TEST_CASE("numeric-only operator and literal return") {
  ConstraintBundle f = bundleOf("function f(x) { return x * 2; }");
  CHECK(sameMeaning(f, "x is number and f is number"));
  CHECK(satisfies(TypeEnvironment({0, 0}, 4), *f.constraint));

  ConstraintBundle g = bundleOf("function g() { return \"a\"; }");
  CHECK(sameMeaning(g, "g is string"));
}

TEST_CASE("more emission rules") {
  CHECK(sameMeaning(bundleOf("function f(s) { return s ++ \"!\"; }"), "s is string and f is string"));
  CHECK(sameMeaning(bundleOf("function f(b) { if (b) { 1; } return !b; }"), "b is boolean and f is boolean"));
  CHECK(sameMeaning(bundleOf("function f(a, b) { return a < b; }"),
                    "f is boolean and (a is number and b is number or a is string and b is string)"));
  CHECK(sameMeaning(bundleOf("function f(a, b) { return a == b; }"),
                    "f is boolean and (a is number and b is number or a is string and b is string or "
                    "a is boolean and b is boolean)"));
  CHECK(sameMeaning(bundleOf("function f(n) { let k = n; return k - 1; }"),
                    "f is number and k is number and n is number"));
  CHECK(sameMeaning(bundleOf("function g(a) { return a; }\nfunction f(x) { return g(x) * 2; }"),
                    "f is number and g is number and (g is number and a is number or g is string and "
                    "a is string or g is boolean and a is boolean) and (x is number and a is number or x is string "
                    "and a is string or x is boolean and a is boolean)"));
}

TEST_CASE("identifiers without uses get no atoms") {
  ConstraintBundle b = bundleOf("function f(used, idle) { return used + 1; }");
  CHECK(b.constrained == std::vector<bool>{true, true, false});
}

TEST_CASE("no constraint when nothing is emitted") {
  ConstraintBundle b = bundleOf("function f(a) { a; }");
  CHECK_FALSE(b.constraint.has_value());
  CHECK(bundleDsl(b).empty());
}

TEST_CASE("type errors and undeclared identifiers") {
  CHECK_THROWS_AS(bundleOf("function f(x) { return y; }"), TypeCheckError);
  CHECK_THROWS_AS(bundleOf("function f(x) { let x = 1; }"), ParseError);
  CHECK_THROWS_AS(bundleOf("function f(x) { let y = 1; let y = 2; }"), ParseError);
  CHECK_THROWS_AS(bundleOf("function f() { return \"a\" * 2; }"), TypeCheckError);
  CHECK_THROWS_AS(bundleOf("function f() { return nope(1); }"), TypeCheckError);
  CHECK_THROWS_AS(bundleOf("function g(a) { return a; }\nfunction f() { return g(1, 2); }"), TypeCheckError);
}

TEST_CASE("slot keys are qualified only when names clash") {
  ConstraintBundle b = bundleOf("function f(x, n) { return n; }\nfunction g(x) { return 1; }");
  CHECK(b.ids.names() == std::vector<std::string>{"f", "f.x", "n", "g", "g.x"});
}

TEST_CASE("bundles serialise to the constraint language and a sidecar") {
  ConstraintBundle b = bundleOf(runningExampleSource());
  auto back = parseConstraints(bundleDsl(b), b.ids, b.universe);
  CHECK(conjoinAll(back) == *b.constraint);

  auto j = nlohmann::json::parse(bundleSidecarJson(b));
  CHECK(j["version"] == 1);
  CHECK(j["types"].size() == 4);
  CHECK(j["identifiers"][1]["id"] == "start");
  CHECK(j["identifiers"][1]["kind"] == "PAR");
}

TEST_CASE("bundles are deterministic") {
  for (const auto& p : generateProgramCorpus(3, {.programs = 5})) {
    ConstraintBundle a = bundleOf(p.source), b = bundleOf(p.source);
    CHECK(bundleDsl(a) == bundleDsl(b));
    CHECK(a.ids == b.ids);
  }
}

TEST_CASE("reference checker") {
  CHECK_NOTHROW(typeCheck(parseProgram(runningExampleSource()), defaultUniverse()));
  CHECK_THROWS_AS(typeCheck(parseProgram("function f(x: number): string { return x; }"), defaultUniverse()),
                  TypeCheckError);
  CHECK_THROWS_AS(typeCheck(parseProgram("function f(x): number { return x; }"), defaultUniverse()),
                  TypeCheckError);
  CHECK_THROWS_AS(typeCheck(parseProgram("function f(x: any): any { return x; }"), defaultUniverse()),
                  TypeCheckError);
}

TEST_CASE("generated gold programs satisfy their constraints") {
  std::size_t total = 0;
  for (const auto& p : generateProgramCorpus(1)) {
    Program prog = parseProgram(p.source);
    CHECK_NOTHROW(typeCheck(prog, defaultUniverse()));
    ConstraintBundle b = generateConstraints(stripAnnotations(prog), defaultUniverse());
    CHECK(b.ids.size() == p.slot_count);
    TypeEnvironment gold = goldEnvironment(prog, b);
    if (b.constraint) REQUIRE(satisfies(gold, *b.constraint));
    total += p.slot_count;
  }
  CHECK(total > 300);
}

TEST_CASE("gold typing marks unusable annotations") {
  std::string src = "function f(a: number, b: any, c): date { return 1; }";
  Program p = parseProgram(src);
  ConstraintBundle b = generateConstraints(stripAnnotations(p), defaultUniverse());
  auto gold = goldTyping(p, b);
  REQUIRE(gold.size() == 4);
  CHECK_FALSE(gold[0].has_value());
  CHECK(gold[1] == TypeIndex{0});
  CHECK_FALSE(gold[2].has_value());
  CHECK_FALSE(gold[3].has_value());
  CHECK_THROWS(goldEnvironment(p, b));
}

TEST_CASE("annotation rewriting keeps the rest of the text") {
  std::string src = "// header\nfunction addNum(start,   end ) {\n  let total = start + end; // sum\n  return total;\n}\n";
  Program p = parseProgram(src);
  ConstraintBundle b = generateConstraints(p, defaultUniverse());
  std::string out = annotateSource(src, p, b, TypeEnvironment({0, 0, 0, 0}, 4));
  CHECK(out ==
        "// header\nfunction addNum(start: number,   end: number ): number {\n  let total: number = start + end; // sum\n"
        "  return total;\n}\n");

  // existing annotations are replaced in place
  Program q = parseProgram(out);
  std::string again = annotateSource(out, q, b, TypeEnvironment({1, 1, 1, 1}, 4));
  CHECK(again == "// header\nfunction addNum(start: string,   end: string ): string {\n  let total: string = start + end; // sum\n"
                 "  return total;\n}\n");
}
