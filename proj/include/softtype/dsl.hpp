#pragma once

#include <string>
#include <string_view>
#include <vector>

#include "softtype/logic.hpp"

namespace softtype {

// Text format for constraints:
//
//   formula  := disj
//   disj     := conj ("or" conj)*
//   conj     := unary ("and" unary)*
//   unary    := "not" unary | "(" formula ")" | IDENT "is" IDENT
//
// Several formulas may appear in one file, separated by ';'. '#' starts a
// comment running to end of line. Identifiers are [A-Za-z_$][A-Za-z0-9_$.]*.

// Resolves names against fixed tables; unknown names are a ParseError.
std::vector<Constraint> parseConstraints(std::string_view text, const IdentifierSet& ids,
                                         const TypeUniverse& universe);

// Builds the tables from names in order of first appearance.
struct OpenParse {
  IdentifierSet ids;
  TypeUniverse universe;
  std::vector<Constraint> formulas;
};
OpenParse parseConstraintsOpen(std::string_view text);

// Minimal parenthesisation; parsing the output yields a structurally equal tree.
std::string formatConstraint(const Constraint& e, const IdentifierSet& ids, const TypeUniverse& universe);

}  // namespace softtype
