#include "softtype/frontend.hpp"

#include <algorithm>
#include <cctype>
#include <map>
#include <set>
#include <unordered_map>
#include <variant>

#include <json.hpp>

#include "softtype/dsl.hpp"
#include "softtype/error.hpp"

namespace softtype {

namespace {

// ---------------------------------------------------------------------------
// Lexer

enum class Tok {
  Ident,
  Number,
  String,
  KwFunction,
  KwLet,
  KwReturn,
  KwIf,
  KwElse,
  KwTrue,
  KwFalse,
  LParen,
  RParen,
  LBrace,
  RBrace,
  Comma,
  Semi,
  Colon,
  Assign,
  Op,  // + - * / ++ < > <= >= == != !
  End,
};

struct Token {
  Tok kind;
  std::string text;
  SourceLoc loc;
  std::size_t end;  // offset one past the token
};

class Lexer {
public:
  explicit Lexer(std::string_view src) : src_(src) {}

  std::vector<Token> run() {
    std::vector<Token> out;
    for (;;) {
      skipTrivia();
      SourceLoc start = here();
      if (pos_ >= src_.size()) {
        out.push_back({Tok::End, "", start, pos_});
        return out;
      }
      char c = src_[pos_];
      if (std::isalpha(static_cast<unsigned char>(c)) || c == '_' || c == '$') {
        std::size_t j = pos_;
        while (j < src_.size() && (std::isalnum(static_cast<unsigned char>(src_[j])) || src_[j] == '_' || src_[j] == '$')) ++j;
        std::string word(src_.substr(pos_, j - pos_));
        out.push_back({keyword(word), word, start, j});
        advanceTo(j);
      } else if (std::isdigit(static_cast<unsigned char>(c))) {
        std::size_t j = pos_;
        while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        if (j + 1 < src_.size() && src_[j] == '.' && std::isdigit(static_cast<unsigned char>(src_[j + 1]))) {
          ++j;
          while (j < src_.size() && std::isdigit(static_cast<unsigned char>(src_[j]))) ++j;
        }
        out.push_back({Tok::Number, std::string(src_.substr(pos_, j - pos_)), start, j});
        advanceTo(j);
      } else if (c == '"') {
        out.push_back(lexString(start));
      } else {
        out.push_back(lexPunct(start));
      }
    }
  }

private:
  static Tok keyword(const std::string& w) {
    static const std::unordered_map<std::string, Tok> kw = {
        {"function", Tok::KwFunction}, {"let", Tok::KwLet},   {"return", Tok::KwReturn}, {"if", Tok::KwIf},
        {"else", Tok::KwElse},         {"true", Tok::KwTrue}, {"false", Tok::KwFalse},
    };
    auto it = kw.find(w);
    return it == kw.end() ? Tok::Ident : it->second;
  }

  SourceLoc here() const { return {line_, col_, pos_}; }

  void advanceTo(std::size_t j) {
    while (pos_ < j) {
      if (src_[pos_] == '\n') {
        ++line_;
        col_ = 1;
      } else {
        ++col_;
      }
      ++pos_;
    }
  }

  void skipTrivia() {
    while (pos_ < src_.size()) {
      char c = src_[pos_];
      if (std::isspace(static_cast<unsigned char>(c))) {
        advanceTo(pos_ + 1);
      } else if (c == '/' && pos_ + 1 < src_.size() && src_[pos_ + 1] == '/') {
        std::size_t j = src_.find('\n', pos_);
        advanceTo(j == std::string_view::npos ? src_.size() : j);
      } else {
        return;
      }
    }
  }

  Token lexString(SourceLoc start) {
    std::size_t j = pos_ + 1;
    std::string value;
    while (j < src_.size() && src_[j] != '"') {
      if (src_[j] == '\n') throw ParseError("unterminated string literal", start.line, start.column);
      if (src_[j] == '\\' && j + 1 < src_.size()) {
        char e = src_[j + 1];
        value += e == 'n' ? '\n' : e == 't' ? '\t' : e;
        j += 2;
      } else {
        value += src_[j++];
      }
    }
    if (j >= src_.size()) throw ParseError("unterminated string literal", start.line, start.column);
    advanceTo(j + 1);
    return {Tok::String, value, start, j + 1};
  }

  Token lexPunct(SourceLoc start) {
    auto two = src_.substr(pos_, 2);
    for (std::string_view op : {"++", "<=", ">=", "==", "!="}) {
      if (two == op) {
        advanceTo(pos_ + 2);
        return {Tok::Op, std::string(op), start, pos_};
      }
    }
    char c = src_[pos_];
    Tok kind;
    switch (c) {
      case '(': kind = Tok::LParen; break;
      case ')': kind = Tok::RParen; break;
      case '{': kind = Tok::LBrace; break;
      case '}': kind = Tok::RBrace; break;
      case ',': kind = Tok::Comma; break;
      case ';': kind = Tok::Semi; break;
      case ':': kind = Tok::Colon; break;
      case '=': kind = Tok::Assign; break;
      case '+':
      case '-':
      case '*':
      case '/':
      case '<':
      case '>':
      case '!': kind = Tok::Op; break;
      default: throw ParseError(std::string("unexpected character '") + c + "'", start.line, start.column);
    }
    advanceTo(pos_ + 1);
    return {kind, std::string(1, c), start, pos_};
  }

  std::string_view src_;
  std::size_t pos_ = 0;
  std::size_t line_ = 1;
  std::size_t col_ = 1;
};

// ---------------------------------------------------------------------------
// Parser

class Parser {
public:
  explicit Parser(std::vector<Token> toks) : toks_(std::move(toks)) {}

  Program parse() {
    Program p;
    while (peek().kind != Tok::End) {
      if (peek().kind == Tok::RBrace) fail("unmatched '}'");
      p.functions.push_back(parseFunction());
    }
    return p;
  }

private:
  const Token& peek(std::size_t ahead = 0) const { return toks_[std::min(pos_ + ahead, toks_.size() - 1)]; }

  [[noreturn]] void fail(const std::string& msg) const { failAt(msg, peek()); }
  [[noreturn]] static void failAt(const std::string& msg, const Token& t) {
    throw ParseError(msg + (t.kind == Tok::End ? " at end of input" : ", found '" + t.text + "'"), t.loc.line,
                     t.loc.column);
  }

  bool accept(Tok kind, std::string_view text = {}) {
    if (peek().kind == kind && (text.empty() || peek().text == text)) {
      ++pos_;
      return true;
    }
    return false;
  }

  const Token& expect(Tok kind, const char* what) {
    if (peek().kind != kind) fail(std::string("expected ") + what);
    return toks_[pos_++];
  }

  std::optional<Annotation> parseAnnotation(std::size_t decl_end) {
    if (peek().kind != Tok::Colon) return std::nullopt;
    ++pos_;
    const Token& ty = expect(Tok::Ident, "type name");
    return Annotation{ty.text, decl_end, ty.end};
  }

  Function parseFunction() {
    const Token& kw = expect(Tok::KwFunction, "'function'");
    Function f;
    f.loc = kw.loc;
    f.name = expect(Tok::Ident, "function name").text;
    expect(Tok::LParen, "'('");
    if (peek().kind != Tok::RParen) {
      do {
        const Token& name = expect(Tok::Ident, "parameter name");
        Param p{name.text, name.end, std::nullopt, name.loc};
        p.annotation = parseAnnotation(name.end);
        f.params.push_back(std::move(p));
      } while (accept(Tok::Comma));
    }
    f.params_end = expect(Tok::RParen, "')'").end;
    f.return_annotation = parseAnnotation(f.params_end);
    f.body = parseBlock();
    return f;
  }

  std::vector<Stmt> parseBlock() {
    const Token& open = expect(Tok::LBrace, "'{'");
    std::vector<Stmt> body;
    while (peek().kind != Tok::RBrace) {
      if (peek().kind == Tok::End) failAt("unclosed '{'", open);
      body.push_back(parseStmt());
    }
    ++pos_;
    return body;
  }

  Stmt parseStmt() {
    Stmt s;
    s.loc = peek().loc;
    if (accept(Tok::KwLet)) {
      s.kind = StmtKind::Let;
      const Token& name = expect(Tok::Ident, "variable name");
      s.name = name.text;
      s.name_end = name.end;
      s.annotation = parseAnnotation(name.end);
      expect(Tok::Assign, "'='");
      s.expr = parseExpr();
      expect(Tok::Semi, "';'");
    } else if (accept(Tok::KwReturn)) {
      s.kind = StmtKind::Return;
      s.expr = parseExpr();
      expect(Tok::Semi, "';'");
    } else if (accept(Tok::KwIf)) {
      s.kind = StmtKind::If;
      expect(Tok::LParen, "'('");
      s.expr = parseExpr();
      expect(Tok::RParen, "')'");
      s.then_body = parseBlock();
      if (accept(Tok::KwElse)) s.else_body = parseBlock();
    } else if (peek().kind == Tok::Ident && peek(1).kind == Tok::Assign) {
      s.kind = StmtKind::Assign;
      const Token& name = toks_[pos_];
      s.name = name.text;
      s.name_end = name.end;
      pos_ += 2;
      s.expr = parseExpr();
      expect(Tok::Semi, "';'");
    } else {
      s.kind = StmtKind::ExprStmt;
      s.expr = parseExpr();
      expect(Tok::Semi, "';'");
    }
    return s;
  }

  static Expr binary(std::string op, Expr lhs, Expr rhs, SourceLoc loc) {
    Expr e;
    e.kind = ExprKind::Binary;
    e.text = std::move(op);
    e.loc = loc;
    e.args.push_back(std::move(lhs));
    e.args.push_back(std::move(rhs));
    return e;
  }

  bool peekOp(std::initializer_list<std::string_view> ops) const {
    if (peek().kind != Tok::Op) return false;
    return std::find(ops.begin(), ops.end(), peek().text) != ops.end();
  }

  Expr parseExpr() {
    Expr lhs = parseAdditive();
    if (peekOp({"<", ">", "<=", ">=", "==", "!="})) {
      const Token& op = toks_[pos_++];
      Expr rhs = parseAdditive();
      return binary(op.text, std::move(lhs), std::move(rhs), op.loc);
    }
    return lhs;
  }

  Expr parseAdditive() {
    Expr lhs = parseTerm();
    while (peekOp({"+", "-", "++"})) {
      const Token& op = toks_[pos_++];
      lhs = binary(op.text, std::move(lhs), parseTerm(), op.loc);
    }
    return lhs;
  }

  Expr parseTerm() {
    Expr lhs = parseUnary();
    while (peekOp({"*", "/"})) {
      const Token& op = toks_[pos_++];
      lhs = binary(op.text, std::move(lhs), parseUnary(), op.loc);
    }
    return lhs;
  }

  Expr parseUnary() {
    if (peekOp({"-", "!"})) {
      const Token& op = toks_[pos_++];
      Expr e;
      e.kind = ExprKind::Unary;
      e.text = op.text;
      e.loc = op.loc;
      e.args.push_back(parseUnary());
      return e;
    }
    return parsePrimary();
  }

  Expr parsePrimary() {
    const Token& t = peek();
    Expr e;
    e.loc = t.loc;
    switch (t.kind) {
      case Tok::Number: e.kind = ExprKind::Number; e.text = t.text; ++pos_; return e;
      case Tok::String: e.kind = ExprKind::String; e.text = t.text; ++pos_; return e;
      case Tok::KwTrue:
      case Tok::KwFalse: e.kind = ExprKind::Bool; e.text = t.text; ++pos_; return e;
      case Tok::LParen: {
        ++pos_;
        Expr inner = parseExpr();
        expect(Tok::RParen, "')'");
        return inner;
      }
      case Tok::Ident: {
        ++pos_;
        e.text = t.text;
        if (accept(Tok::LParen)) {
          e.kind = ExprKind::Call;
          if (peek().kind != Tok::RParen) {
            do {
              e.args.push_back(parseExpr());
            } while (accept(Tok::Comma));
          }
          expect(Tok::RParen, "')'");
        } else {
          e.kind = ExprKind::Var;
        }
        return e;
      }
      default: fail("expected expression");
    }
  }

  std::vector<Token> toks_;
  std::size_t pos_ = 0;
};

void stripStmts(std::vector<Stmt>& stmts) {
  for (auto& s : stmts) {
    s.annotation.reset();
    stripStmts(s.then_body);
    stripStmts(s.else_body);
  }
}

template <typename Fn>
void forEachLet(const std::vector<Stmt>& stmts, Fn&& fn) {
  for (const auto& s : stmts) {
    if (s.kind == StmtKind::Let) fn(s);
    forEachLet(s.then_body, fn);
    forEachLet(s.else_body, fn);
  }
}

template <typename Fn>
void forEachAnnotation(const Program& program, Fn&& fn) {
  for (const auto& f : program.functions) {
    if (f.return_annotation) fn(*f.return_annotation);
    for (const auto& p : f.params) {
      if (p.annotation) fn(*p.annotation);
    }
    forEachLet(f.body, [&](const Stmt& s) {
      if (s.annotation) fn(*s.annotation);
    });
  }
}

// ---------------------------------------------------------------------------
// Name resolution shared by the constraint generator and the type checker.

[[noreturn]] void typeError(const std::string& msg, const SourceLoc& loc) {
  throw TypeCheckError(msg, loc.line, loc.column);
}

struct Scopes {
  std::unordered_map<std::string, std::size_t> functions;   // name -> function index
  std::vector<std::size_t> function_slot;                    // function index -> slot index
  std::vector<std::unordered_map<std::string, std::size_t>> locals;  // per function: name -> slot
};

Scopes resolveScopes(const Program& program, const std::vector<Slot>& slots) {
  Scopes sc;
  sc.function_slot.resize(program.functions.size());
  sc.locals.resize(program.functions.size());
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    if (!sc.functions.emplace(program.functions[i].name, i).second) {
      typeError("duplicate function '" + program.functions[i].name + "'", program.functions[i].loc);
    }
  }
  for (std::size_t s = 0; s < slots.size(); ++s) {
    if (slots[s].kind == SlotKind::Fun) {
      sc.function_slot[slots[s].function] = s;
    } else {
      sc.locals[slots[s].function].emplace(slots[s].name, s);
    }
  }
  return sc;
}

// Walks a function body in order, tracking which locals are in scope.
class BodyWalker {
public:
  BodyWalker(const Program& program, const Scopes& scopes, std::size_t fn)
      : program_(program), scopes_(scopes), fn_(fn) {
    for (const auto& p : program.functions[fn].params) declared_.insert(p.name);
  }

  std::size_t variable(const std::string& name, const SourceLoc& loc) const {
    if (!declared_.count(name)) typeError("undeclared identifier '" + name + "'", loc);
    return scopes_.locals[fn_].at(name);
  }

  const Function& callee(const Expr& call) const {
    auto it = scopes_.functions.find(call.text);
    if (it == scopes_.functions.end()) typeError("call to undeclared function '" + call.text + "'", call.loc);
    const Function& f = program_.functions[it->second];
    if (f.params.size() != call.args.size()) {
      typeError("'" + call.text + "' expects " + std::to_string(f.params.size()) + " arguments", call.loc);
    }
    return f;
  }

  std::size_t calleeIndex(const Expr& call) const { return scopes_.functions.at(call.text); }

  void declare(const Stmt& let) { declared_.insert(let.name); }

  std::size_t functionSlot(std::size_t fn) const { return scopes_.function_slot[fn]; }
  std::size_t paramSlot(std::size_t fn, std::size_t i) const {
    return scopes_.locals[fn].at(program_.functions[fn].params[i].name);
  }

private:
  const Program& program_;
  const Scopes& scopes_;
  std::size_t fn_;
  std::set<std::string> declared_;
};

// ---------------------------------------------------------------------------
// Constraint generation

// A formula that may have folded to a constant.
using Formula = std::variant<bool, Constraint>;

bool isConst(const Formula& f, bool value) { return std::holds_alternative<bool>(f) && std::get<bool>(f) == value; }

Formula fAnd(const Formula& a, const Formula& b) {
  if (isConst(a, false) || isConst(b, false)) return false;
  if (isConst(a, true)) return b;
  if (isConst(b, true)) return a;
  return std::get<Constraint>(a) && std::get<Constraint>(b);
}

Formula fOr(const Formula& a, const Formula& b) {
  if (isConst(a, true) || isConst(b, true)) return true;
  if (isConst(a, false)) return b;
  if (isConst(b, false)) return a;
  return std::get<Constraint>(a) || std::get<Constraint>(b);
}

class Generator {
public:
  Generator(const Program& program, const TypeUniverse& universe, const std::vector<Slot>& slots)
      : program_(program), universe_(universe), scopes_(resolveScopes(program, slots)) {
    num_ = universe.find("number");
    str_ = universe.find("string");
    bool_ = universe.find("boolean");
    auto any = universe.find("any");
    for (TypeIndex t = 0; t < universe.size(); ++t) {
      if (!any || t != *any) slot_types_.push_back(t);
    }
  }

  std::vector<Constraint> run() {
    for (std::size_t fn = 0; fn < program_.functions.size(); ++fn) {
      BodyWalker walker(program_, scopes_, fn);
      walkStmts(program_.functions[fn].body, walker, fn);
    }
    return std::move(emitted_);
  }

private:
  // typeIs[t] is the formula "expression has type t", for every universe type.
  using TypeFormulas = std::vector<Formula>;

  TypeFormulas constant(std::optional<TypeIndex> type) const {
    TypeFormulas out(universe_.size(), false);
    if (type) out[*type] = true;
    return out;
  }

  TypeFormulas slotFormulas(std::size_t slot) const {
    TypeFormulas out(universe_.size(), false);
    for (TypeIndex t : slot_types_) out[t] = Constraint::is(slot, t);
    return out;
  }

  void emit(const Formula& f, const SourceLoc& loc) {
    if (isConst(f, true)) return;
    if (isConst(f, false)) typeError("expression can never be well-typed", loc);
    emitted_.push_back(std::get<Constraint>(f));
  }

  Formula equalOver(const TypeFormulas& a, const TypeFormulas& b, const std::vector<TypeIndex>& types) const {
    Formula out = false;
    for (TypeIndex t : types) out = fOr(out, fAnd(a[t], b[t]));
    return out;
  }

  std::vector<TypeIndex> present(std::initializer_list<std::optional<TypeIndex>> types) const {
    std::vector<TypeIndex> out;
    for (const auto& t : types) {
      if (t) out.push_back(*t);
    }
    return out;
  }

  Formula has(const TypeFormulas& f, std::optional<TypeIndex> t) const { return t ? f[*t] : Formula(false); }

  TypeFormulas walkExpr(const Expr& e, const BodyWalker& w) {
    switch (e.kind) {
      case ExprKind::Number: return constant(num_);
      case ExprKind::String: return constant(str_);
      case ExprKind::Bool: return constant(bool_);
      case ExprKind::Var: return slotFormulas(w.variable(e.text, e.loc));
      case ExprKind::Call: {
        w.callee(e);
        std::size_t callee = w.calleeIndex(e);
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          TypeFormulas arg = walkExpr(e.args[i], w);
          emit(equalOver(slotFormulas(w.paramSlot(callee, i)), arg, slot_types_), e.args[i].loc);
        }
        return slotFormulas(w.functionSlot(callee));
      }
      case ExprKind::Unary: {
        TypeFormulas arg = walkExpr(e.args[0], w);
        auto t = e.text == "-" ? num_ : bool_;
        emit(has(arg, t), e.loc);
        return constant(t);
      }
      case ExprKind::Binary: {
        TypeFormulas a = walkExpr(e.args[0], w);
        TypeFormulas b = walkExpr(e.args[1], w);
        const std::string& op = e.text;
        if (op == "+") {
          // number x number -> number, or string x string -> string
          auto types = present({num_, str_});
          emit(equalOver(a, b, types), e.loc);
          TypeFormulas out = constant(std::nullopt);
          for (TypeIndex t : types) out[t] = fAnd(a[t], b[t]);
          return out;
        }
        if (op == "++") {
          emit(fAnd(has(a, str_), has(b, str_)), e.loc);
          return constant(str_);
        }
        if (op == "-" || op == "*" || op == "/") {
          emit(fAnd(has(a, num_), has(b, num_)), e.loc);
          return constant(num_);
        }
        if (op == "==" || op == "!=") {
          emit(equalOver(a, b, slot_types_), e.loc);
        } else {
          emit(equalOver(a, b, present({num_, str_})), e.loc);
        }
        return constant(bool_);
      }
    }
    return constant(std::nullopt);
  }

  void walkStmts(const std::vector<Stmt>& stmts, BodyWalker& w, std::size_t fn) {
    for (const auto& s : stmts) {
      switch (s.kind) {
        case StmtKind::Let: {
          TypeFormulas value = walkExpr(s.expr, w);
          w.declare(s);
          emit(equalOver(slotFormulas(w.variable(s.name, s.loc)), value, slot_types_), s.loc);
          break;
        }
        case StmtKind::Assign: {
          TypeFormulas value = walkExpr(s.expr, w);
          emit(equalOver(slotFormulas(w.variable(s.name, s.loc)), value, slot_types_), s.loc);
          break;
        }
        case StmtKind::Return: {
          TypeFormulas value = walkExpr(s.expr, w);
          emit(equalOver(slotFormulas(w.functionSlot(fn)), value, slot_types_), s.loc);
          break;
        }
        case StmtKind::If: {
          TypeFormulas cond = walkExpr(s.expr, w);
          emit(has(cond, bool_), s.expr.loc);
          walkStmts(s.then_body, w, fn);
          walkStmts(s.else_body, w, fn);
          break;
        }
        case StmtKind::ExprStmt: walkExpr(s.expr, w); break;
      }
    }
  }

  const Program& program_;
  const TypeUniverse& universe_;
  Scopes scopes_;
  std::optional<TypeIndex> num_, str_, bool_;
  std::vector<TypeIndex> slot_types_;
  std::vector<Constraint> emitted_;
};

void markAtoms(const Constraint& e, std::vector<bool>& seen) {
  switch (e.kind()) {
    case ConstraintKind::Is: seen[e.ident()] = true; return;
    case ConstraintKind::Not: markAtoms(e.child(), seen); return;
    default:
      markAtoms(e.left(), seen);
      markAtoms(e.right(), seen);
  }
}

// ---------------------------------------------------------------------------
// Reference type checker

class Checker {
public:
  Checker(const Program& program, const TypeUniverse& universe, const std::vector<Slot>& slots)
      : program_(program), scopes_(resolveScopes(program, slots)), slot_types_(slots.size()) {
    auto any = universe.find("any");
    std::size_t s = 0;
    auto set = [&](const std::optional<Annotation>& a, const SourceLoc& loc, const std::string& what) {
      if (!a) typeError("missing annotation on " + what, loc);
      auto t = universe.find(a->type);
      if (!t || (any && *t == *any)) typeError("'" + a->type + "' is not a concrete universe type", loc);
      slot_types_[s++] = a->type;
    };
    for (const auto& f : program.functions) {
      set(f.return_annotation, f.loc, "function '" + f.name + "'");
      for (const auto& p : f.params) set(p.annotation, p.loc, "parameter '" + p.name + "'");
      forEachLet(f.body, [&](const Stmt& st) { set(st.annotation, st.loc, "variable '" + st.name + "'"); });
    }
  }

  void run() {
    for (std::size_t fn = 0; fn < program_.functions.size(); ++fn) {
      BodyWalker walker(program_, scopes_, fn);
      checkStmts(program_.functions[fn].body, walker, fn);
    }
  }

private:
  static void require(const std::string& actual, const std::string& expected, const SourceLoc& loc) {
    if (actual != expected) typeError("expected " + expected + ", found " + actual, loc);
  }

  std::string typeOf(const Expr& e, const BodyWalker& w) {
    switch (e.kind) {
      case ExprKind::Number: return "number";
      case ExprKind::String: return "string";
      case ExprKind::Bool: return "boolean";
      case ExprKind::Var: return slot_types_[w.variable(e.text, e.loc)];
      case ExprKind::Call: {
        w.callee(e);
        std::size_t callee = w.calleeIndex(e);
        for (std::size_t i = 0; i < e.args.size(); ++i) {
          require(typeOf(e.args[i], w), slot_types_[w.paramSlot(callee, i)], e.args[i].loc);
        }
        return slot_types_[w.functionSlot(callee)];
      }
      case ExprKind::Unary: {
        std::string t = e.text == "-" ? "number" : "boolean";
        require(typeOf(e.args[0], w), t, e.loc);
        return t;
      }
      case ExprKind::Binary: {
        std::string a = typeOf(e.args[0], w);
        std::string b = typeOf(e.args[1], w);
        const std::string& op = e.text;
        if (op == "+") {
          if (a != "number" && a != "string") typeError("'+' needs number or string operands", e.loc);
          require(b, a, e.loc);
          return a;
        }
        if (op == "++") {
          require(a, "string", e.loc);
          require(b, "string", e.loc);
          return "string";
        }
        if (op == "-" || op == "*" || op == "/") {
          require(a, "number", e.loc);
          require(b, "number", e.loc);
          return "number";
        }
        if (op != "==" && op != "!=" && a != "number" && a != "string") {
          typeError("'" + op + "' needs number or string operands", e.loc);
        }
        require(b, a, e.loc);
        return "boolean";
      }
    }
    return {};
  }

  void checkStmts(const std::vector<Stmt>& stmts, BodyWalker& w, std::size_t fn) {
    for (const auto& s : stmts) {
      switch (s.kind) {
        case StmtKind::Let: {
          std::string value = typeOf(s.expr, w);
          w.declare(s);
          require(value, slot_types_[w.variable(s.name, s.loc)], s.loc);
          break;
        }
        case StmtKind::Assign: require(typeOf(s.expr, w), slot_types_[w.variable(s.name, s.loc)], s.loc); break;
        case StmtKind::Return: require(typeOf(s.expr, w), slot_types_[w.functionSlot(fn)], s.loc); break;
        case StmtKind::If:
          require(typeOf(s.expr, w), "boolean", s.expr.loc);
          checkStmts(s.then_body, w, fn);
          checkStmts(s.else_body, w, fn);
          break;
        case StmtKind::ExprStmt: typeOf(s.expr, w); break;
      }
    }
  }

  const Program& program_;
  Scopes scopes_;
  std::vector<std::string> slot_types_;
};

template <typename Fn>
void forEachSlotAnnotation(const Program& program, Fn&& fn) {
  // Visits slots in collectSlots order with (insertion offset, annotation).
  for (const auto& f : program.functions) {
    fn(f.params_end, f.return_annotation);
    for (const auto& p : f.params) fn(p.name_end, p.annotation);
    forEachLet(f.body, [&](const Stmt& s) { fn(s.name_end, s.annotation); });
  }
}

}  // namespace

Program parseProgram(std::string_view source) { return Parser(Lexer(source).run()).parse(); }

Program stripAnnotations(const Program& program) {
  Program out = program;
  for (auto& f : out.functions) {
    f.return_annotation.reset();
    for (auto& p : f.params) p.annotation.reset();
    stripStmts(f.body);
  }
  return out;
}

std::string stripSource(std::string_view source, const Program& program) {
  std::vector<Annotation> spans;
  forEachAnnotation(program, [&](const Annotation& a) { spans.push_back(a); });
  std::sort(spans.begin(), spans.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
  std::string out;
  std::size_t cursor = 0;
  for (const auto& a : spans) {
    out.append(source.substr(cursor, a.begin - cursor));
    cursor = a.end;
  }
  out.append(source.substr(cursor));
  return out;
}

std::string_view slotKindName(SlotKind kind) {
  switch (kind) {
    case SlotKind::Fun: return "FUN";
    case SlotKind::Meth: return "METH";
    case SlotKind::Par: return "PAR";
    case SlotKind::Prop: return "PROP";
    case SlotKind::Var: return "VAR";
  }
  return "?";
}

std::vector<Slot> collectSlots(const Program& program) {
  std::vector<Slot> slots;
  for (std::size_t i = 0; i < program.functions.size(); ++i) {
    const auto& f = program.functions[i];
    slots.push_back({f.name, f.name, SlotKind::Fun, i});
    std::set<std::string> names;
    auto local = [&](const std::string& name, SlotKind kind, const SourceLoc& loc) {
      if (!names.insert(name).second) typeError("redeclaration of '" + name + "'", loc);
      slots.push_back({name, name, kind, i});
    };
    for (const auto& p : f.params) local(p.name, SlotKind::Par, p.loc);
    forEachLet(f.body, [&](const Stmt& s) { local(s.name, SlotKind::Var, s.loc); });
  }
  std::map<std::string, int> uses;
  for (const auto& s : slots) ++uses[s.name];
  for (auto& s : slots) {
    if (s.kind != SlotKind::Fun && uses[s.name] > 1) s.key = program.functions[s.function].name + "." + s.name;
  }
  return slots;
}

TypeUniverse defaultUniverse() { return TypeUniverse({"number", "string", "boolean", "any"}); }

ConstraintBundle generateConstraints(const Program& program, const TypeUniverse& universe) {
  ConstraintBundle bundle;
  bundle.slots = collectSlots(program);
  bundle.universe = universe;
  bundle.abstain = universe.find("any");
  if (bundle.slots.empty()) return bundle;

  std::vector<std::string> keys;
  for (const auto& s : bundle.slots) keys.push_back(s.key);
  bundle.ids = IdentifierSet(std::move(keys));

  auto emitted = Generator(program, universe, bundle.slots).run();
  bundle.constrained.assign(bundle.slots.size(), false);
  if (!emitted.empty()) {
    bundle.constraint = conjoinAll(emitted);
    markAtoms(*bundle.constraint, bundle.constrained);
  }
  return bundle;
}

std::string bundleDsl(const ConstraintBundle& bundle) {
  if (!bundle.constraint) return {};
  return formatConstraint(*bundle.constraint, bundle.ids, bundle.universe) + "\n";
}

std::string bundleSidecarJson(const ConstraintBundle& bundle) {
  nlohmann::ordered_json j;
  j["version"] = 1;
  j["types"] = bundle.universe.names();
  auto slots = nlohmann::ordered_json::array();
  for (const auto& s : bundle.slots) {
    slots.push_back({{"id", s.key}, {"name", s.name}, {"kind", slotKindName(s.kind)}});
  }
  j["identifiers"] = slots;
  return j.dump(2) + "\n";
}

void typeCheck(const Program& program, const TypeUniverse& universe) {
  auto slots = collectSlots(program);
  Checker(program, universe, slots).run();
}

std::vector<std::optional<TypeIndex>> goldTyping(const Program& program, const ConstraintBundle& bundle) {
  std::vector<std::optional<TypeIndex>> gold;
  forEachSlotAnnotation(program, [&](std::size_t, const std::optional<Annotation>& a) {
    std::optional<TypeIndex> t;
    if (a) t = bundle.universe.find(a->type);
    if (t && bundle.abstain && *t == *bundle.abstain) t.reset();
    gold.push_back(t);
  });
  if (gold.size() != bundle.slots.size()) throw InvalidArgument("program does not match the bundle");
  return gold;
}

TypeEnvironment goldEnvironment(const Program& program, const ConstraintBundle& bundle) {
  auto gold = goldTyping(program, bundle);
  std::vector<TypeIndex> out;
  for (std::size_t v = 0; v < gold.size(); ++v) {
    if (!gold[v]) throw InvalidArgument("slot '" + bundle.slots[v].key + "' has no gold type");
    out.push_back(*gold[v]);
  }
  return TypeEnvironment(std::move(out), bundle.universe.size());
}

std::string annotateSource(std::string_view source, const Program& program, const ConstraintBundle& bundle,
                           const TypeEnvironment& env) {
  if (env.size() != bundle.slots.size()) throw DimensionMismatch("environment does not match the bundle");
  struct Edit {
    std::size_t begin, end;
    std::string text;
  };
  std::vector<Edit> edits;
  forEachSlotAnnotation(program, [&](std::size_t at, const std::optional<Annotation>& a) {
    std::size_t v = edits.size();
    edits.push_back({a ? a->begin : at, a ? a->end : at, ": " + bundle.universe.name(env[v])});
  });
  std::sort(edits.begin(), edits.end(), [](const auto& a, const auto& b) { return a.begin < b.begin; });
  std::string out;
  std::size_t cursor = 0;
  for (const auto& e : edits) {
    out.append(source.substr(cursor, e.begin - cursor));
    out.append(e.text);
    cursor = e.end;
  }
  out.append(source.substr(cursor));
  return out;
}

}  // namespace softtype
