#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "softtype/logic.hpp"

namespace softtype {

// Toy language (.tl):
//
//   program   := function*
//   function  := "function" IDENT "(" [param ("," param)*] ")" [":" TYPE] block
//   param     := IDENT [":" TYPE]
//   block     := "{" stmt* "}"
//   stmt      := "let" IDENT [":" TYPE] "=" expr ";"
//              | IDENT "=" expr ";"
//              | "return" expr ";"
//              | "if" "(" expr ")" block ["else" block]
//              | expr ";"
//   expr      := additive [("<"|">"|"<="|">="|"=="|"!=") additive]
//   additive  := term (("+"|"-"|"++") term)*
//   term      := unary (("*"|"/") unary)*
//   unary     := ("-"|"!") unary | primary
//   primary   := NUMBER | STRING | "true" | "false" | IDENT | IDENT "(" [expr ("," expr)*] ")" | "(" expr ")"
//
// "//" starts a line comment. Each function has a single scope; parameters
// and locals may not be redeclared.

struct SourceLoc {
  std::size_t line = 1;
  std::size_t column = 1;
  std::size_t offset = 0;

  friend bool operator==(const SourceLoc&, const SourceLoc&) = default;
};

// ": T" after a declaration. [begin, end) covers everything from the end of
// the declared name through the type name, so erasing it strips the annotation.
struct Annotation {
  std::string type;
  std::size_t begin = 0;
  std::size_t end = 0;

  friend bool operator==(const Annotation&, const Annotation&) = default;
};

enum class ExprKind { Number, String, Bool, Var, Call, Unary, Binary };

struct Expr {
  ExprKind kind = ExprKind::Number;
  // Literal text, variable or callee name, or operator spelling.
  std::string text;
  std::vector<Expr> args;
  SourceLoc loc;

  friend bool operator==(const Expr&, const Expr&) = default;
};

enum class StmtKind { Let, Assign, Return, If, ExprStmt };

struct Stmt {
  StmtKind kind = StmtKind::ExprStmt;
  std::string name;  // Let/Assign target
  std::size_t name_end = 0;
  std::optional<Annotation> annotation;
  Expr expr;  // initialiser, assigned value, returned value, condition
  std::vector<Stmt> then_body;
  std::vector<Stmt> else_body;
  SourceLoc loc;

  friend bool operator==(const Stmt&, const Stmt&) = default;
};

struct Param {
  std::string name;
  std::size_t name_end = 0;
  std::optional<Annotation> annotation;
  SourceLoc loc;

  friend bool operator==(const Param&, const Param&) = default;
};

struct Function {
  std::string name;
  std::vector<Param> params;
  // Offset just past the closing ')' of the parameter list.
  std::size_t params_end = 0;
  std::optional<Annotation> return_annotation;
  std::vector<Stmt> body;
  SourceLoc loc;

  friend bool operator==(const Function&, const Function&) = default;
};

struct Program {
  std::vector<Function> functions;

  friend bool operator==(const Program&, const Program&) = default;
};

Program parseProgram(std::string_view source);

// Same AST with every annotation removed. Offsets are left pointing into the
// original text.
Program stripAnnotations(const Program& program);

// Source text with every annotation erased; everything else is untouched.
std::string stripSource(std::string_view source, const Program& program);

enum class SlotKind { Fun, Meth, Par, Prop, Var };
std::string_view slotKindName(SlotKind kind);

// Names an annotation slot. `key` is unique within the program: the bare
// name when unambiguous, otherwise "function.name".
struct Slot {
  std::string key;
  std::string name;
  SlotKind kind;
  std::size_t function;  // index into Program::functions
};

// Slots in program order: each function's return slot, its parameters, then its locals.
std::vector<Slot> collectSlots(const Program& program);

struct ConstraintBundle {
  IdentifierSet ids;
  TypeUniverse universe;
  std::vector<Slot> slots;  // parallel to ids
  // Conjunction of all emissions; empty when nothing was emitted.
  std::optional<Constraint> constraint;
  // Identifiers mentioned by at least one atom.
  std::vector<bool> constrained;
  // Index of the abstain type ("any") in the universe, when present.
  std::optional<TypeIndex> abstain;
};

TypeUniverse defaultUniverse();

// Emits the logical constraints of an (unannotated) program. Annotations are ignored.
ConstraintBundle generateConstraints(const Program& program, const TypeUniverse& universe);

// Constraint as DSL text (empty when there is none) and the JSON sidecar
// describing identifier order, slot kinds and the universe.
std::string bundleDsl(const ConstraintBundle& bundle);
std::string bundleSidecarJson(const ConstraintBundle& bundle);

// Reference checker: every slot annotated with a non-abstain universe type and
// every expression well-typed under the operator table. Throws TypeCheckError.
void typeCheck(const Program& program, const TypeUniverse& universe);

// Gold types read from annotations, parallel to bundle.ids. Missing, abstain
// or out-of-universe annotations are nullopt.
std::vector<std::optional<TypeIndex>> goldTyping(const Program& program, const ConstraintBundle& bundle);

// The typing as a total environment; throws if any slot lacks a gold type.
TypeEnvironment goldEnvironment(const Program& program, const ConstraintBundle& bundle);

// Writes ": type" at every slot, replacing existing annotations and keeping all other text.
std::string annotateSource(std::string_view source, const Program& program, const ConstraintBundle& bundle,
                           const TypeEnvironment& env);

}  // namespace softtype
