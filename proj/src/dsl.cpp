#include "softtype/dsl.hpp"

#include <cctype>
#include <functional>
#include <optional>

#include "softtype/error.hpp"

namespace softtype {

namespace {

enum class Tok { Ident, Is, Not, And, Or, LParen, RParen, Semi, End };

struct Token {
  Tok kind;
  std::string text;
  std::size_t line;
  std::size_t column;
};

bool identStart(char c) { return std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$'; }
bool identChar(char c) { return identStart(c) || std::isdigit(static_cast<unsigned char>(c)) || c == '.'; }

std::vector<Token> tokenize(std::string_view text) {
  std::vector<Token> out;
  std::size_t line = 1, col = 1;
  std::size_t i = 0;
  auto advance = [&](std::size_t n) {
    for (std::size_t k = 0; k < n; ++k, ++i) {
      if (text[i] == '\n') {
        ++line;
        col = 1;
      } else {
        ++col;
      }
    }
  };
  while (i < text.size()) {
    char c = text[i];
    if (c == '#') {
      while (i < text.size() && text[i] != '\n') advance(1);
      continue;
    }
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    std::size_t l = line, cl = col;
    if (c == '(') {
      out.push_back({Tok::LParen, "(", l, cl});
      advance(1);
    } else if (c == ')') {
      out.push_back({Tok::RParen, ")", l, cl});
      advance(1);
    } else if (c == ';') {
      out.push_back({Tok::Semi, ";", l, cl});
      advance(1);
    } else if (identStart(c)) {
      std::size_t j = i;
      while (j < text.size() && identChar(text[j])) ++j;
      std::string word(text.substr(i, j - i));
      Tok kind = Tok::Ident;
      if (word == "is") kind = Tok::Is;
      else if (word == "not") kind = Tok::Not;
      else if (word == "and") kind = Tok::And;
      else if (word == "or") kind = Tok::Or;
      out.push_back({kind, std::move(word), l, cl});
      advance(j - i);
    } else {
      throw ParseError(std::string("unexpected character '") + c + "'", l, cl);
    }
  }
  out.push_back({Tok::End, "", line, col});
  return out;
}

using Resolver = std::function<std::size_t(const Token&)>;

class Parser {
public:
  Parser(std::vector<Token> tokens, Resolver ident, Resolver type)
      : toks_(std::move(tokens)), ident_(std::move(ident)), type_(std::move(type)) {}

  std::vector<Constraint> parseFile() {
    std::vector<Constraint> out;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::Semi) {
        ++pos_;
        continue;
      }
      out.push_back(parseDisj());
      if (peek().kind != Tok::Semi && peek().kind != Tok::End) fail("expected 'and', 'or', ';' or end of input");
    }
    return out;
  }

private:
  const Token& peek() const { return toks_[pos_]; }

  [[noreturn]] void fail(const std::string& msg) const {
    const auto& t = peek();
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : ", found '" + t.text + "'"), t.line, t.column);
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    return toks_[pos_++];
  }

  Constraint parseDisj() {
    Constraint e = parseConj();
    while (peek().kind == Tok::Or) {
      ++pos_;
      e = Constraint::disjunction(std::move(e), parseConj());
    }
    return e;
  }

  Constraint parseConj() {
    Constraint e = parseUnary();
    while (peek().kind == Tok::And) {
      ++pos_;
      e = Constraint::conjunction(std::move(e), parseUnary());
    }
    return e;
  }

  Constraint parseUnary() {
    switch (peek().kind) {
      case Tok::Not: ++pos_; return Constraint::negation(parseUnary());
      case Tok::LParen: {
        ++pos_;
        Constraint e = parseDisj();
        expect(Tok::RParen, "')'");
        return e;
      }
      case Tok::Ident: {
        const Token& id = toks_[pos_++];
        expect(Tok::Is, "'is'");
        const Token& ty = expect(Tok::Ident, "type name");
        return Constraint::is(ident_(id), type_(ty));
      }
      default: fail("expected atom, 'not' or '('");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
  Resolver ident_;
  Resolver type_;
};

int precedence(ConstraintKind k) {
  switch (k) {
    case ConstraintKind::Or: return 0;
    case ConstraintKind::And: return 1;
    default: return 2;
  }
}

void format(const Constraint& e, const IdentifierSet& ids, const TypeUniverse& universe, std::string& out) {
  auto sub = [&](const Constraint& c, bool parens) {
    if (parens) out += '(';
    format(c, ids, universe, out);
    if (parens) out += ')';
  };
  switch (e.kind()) {
    case ConstraintKind::Is:
      out += ids.name(e.ident());
      out += " is ";
      out += universe.name(e.type());
      return;
    case ConstraintKind::Not:
      out += "not ";
      sub(e.child(), precedence(e.child().kind()) < 2);
      return;
    default: {
      int p = precedence(e.kind());
      sub(e.left(), precedence(e.left().kind()) < p);
      out += e.kind() == ConstraintKind::And ? " and " : " or ";
      sub(e.right(), precedence(e.right().kind()) <= p);
    }
  }
}

}  // namespace

std::vector<Constraint> parseConstraints(std::string_view text, const IdentifierSet& ids,
                                         const TypeUniverse& universe) {
  auto resolve = [](const NameTable& table, const char* what) {
    return [&table, what](const Token& t) -> std::size_t {
      auto idx = table.find(t.text);
      if (!idx) throw ParseError(std::string("unknown ") + what + " '" + t.text + "'", t.line, t.column);
      return *idx;
    };
  };
  Parser parser(tokenize(text), resolve(ids, "identifier"), resolve(universe, "type"));
  return parser.parseFile();
}

OpenParse parseConstraintsOpen(std::string_view text) {
  std::vector<std::string> id_names, type_names;
  auto collect = [](std::vector<std::string>& names) {
    return [&names](const Token& t) -> std::size_t {
      for (std::size_t i = 0; i < names.size(); ++i) {
        if (names[i] == t.text) return i;
      }
      names.push_back(t.text);
      return names.size() - 1;
    };
  };
  Parser parser(tokenize(text), collect(id_names), collect(type_names));
  auto formulas = parser.parseFile();
  if (formulas.empty()) throw ParseError("no formulas", 1, 1);
  return OpenParse{IdentifierSet(std::move(id_names)), TypeUniverse(std::move(type_names)), std::move(formulas)};
}

std::string formatConstraint(const Constraint& e, const IdentifierSet& ids, const TypeUniverse& universe) {
  validate(e, ids.size(), universe.size());
  std::string out;
  format(e, ids, universe, out);
  return out;
}

}  // namespace softtype
