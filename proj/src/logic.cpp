#include "softtype/logic.hpp"

#include <algorithm>
#include <functional>

#include "softtype/error.hpp"

namespace softtype {

NameTable::NameTable(std::vector<std::string> names, std::string_view what) : names_(std::move(names)) {
  if (names_.empty()) throw InvalidArgument(std::string(what) + " must be nonempty");
  for (std::size_t i = 0; i < names_.size(); ++i) {
    if (names_[i].empty()) throw InvalidArgument(std::string(what) + ": empty name");
    if (!index_.emplace(names_[i], i).second) {
      throw InvalidArgument(std::string(what) + ": duplicate name '" + names_[i] + "'");
    }
  }
}

std::optional<std::size_t> NameTable::find(std::string_view name) const {
  auto it = index_.find(std::string(name));
  if (it == index_.end()) return std::nullopt;
  return it->second;
}

Constraint Constraint::is(IdentIndex ident, TypeIndex type) {
  return Constraint(std::make_shared<const Node>(Node{ConstraintKind::Is, ident, type, nullptr, nullptr}));
}

Constraint Constraint::negation(Constraint child) {
  return Constraint(std::make_shared<const Node>(Node{ConstraintKind::Not, 0, 0, std::move(child.node_), nullptr}));
}

Constraint Constraint::conjunction(Constraint left, Constraint right) {
  return Constraint(std::make_shared<const Node>(
      Node{ConstraintKind::And, 0, 0, std::move(left.node_), std::move(right.node_)}));
}

Constraint Constraint::disjunction(Constraint left, Constraint right) {
  return Constraint(std::make_shared<const Node>(
      Node{ConstraintKind::Or, 0, 0, std::move(left.node_), std::move(right.node_)}));
}

std::size_t Constraint::depth() const {
  switch (kind()) {
    case ConstraintKind::Is: return 0;
    case ConstraintKind::Not: return 1 + child().depth();
    default: return 1 + std::max(left().depth(), right().depth());
  }
}

std::size_t Constraint::nodeCount() const {
  switch (kind()) {
    case ConstraintKind::Is: return 1;
    case ConstraintKind::Not: return 1 + child().nodeCount();
    default: return 1 + left().nodeCount() + right().nodeCount();
  }
}

bool operator==(const Constraint& a, const Constraint& b) {
  if (a.node_ == b.node_) return true;
  if (a.kind() != b.kind()) return false;
  switch (a.kind()) {
    case ConstraintKind::Is: return a.ident() == b.ident() && a.type() == b.type();
    case ConstraintKind::Not: return a.child() == b.child();
    default: return a.left() == b.left() && a.right() == b.right();
  }
}

namespace {

Constraint combineBalanced(const std::vector<Constraint>& parts, std::size_t lo, std::size_t hi, bool conj) {
  if (hi - lo == 1) return parts[lo];
  std::size_t mid = lo + (hi - lo) / 2;
  auto l = combineBalanced(parts, lo, mid, conj);
  auto r = combineBalanced(parts, mid, hi, conj);
  return conj ? Constraint::conjunction(std::move(l), std::move(r)) : Constraint::disjunction(std::move(l), std::move(r));
}

}  // namespace

Constraint conjoinAll(const std::vector<Constraint>& parts) {
  if (parts.empty()) throw InvalidArgument("conjoinAll of an empty list");
  return combineBalanced(parts, 0, parts.size(), true);
}

Constraint disjoinAll(const std::vector<Constraint>& parts) {
  if (parts.empty()) throw InvalidArgument("disjoinAll of an empty list");
  return combineBalanced(parts, 0, parts.size(), false);
}

void validate(const Constraint& e, std::size_t num_idents, std::size_t num_types) {
  switch (e.kind()) {
    case ConstraintKind::Is:
      if (e.ident() >= num_idents || e.type() >= num_types) {
        throw MalformedConstraint("atom (" + std::to_string(e.ident()) + ", " + std::to_string(e.type()) +
                                  ") outside " + std::to_string(num_idents) + "x" + std::to_string(num_types));
      }
      return;
    case ConstraintKind::Not: validate(e.child(), num_idents, num_types); return;
    default:
      validate(e.left(), num_idents, num_types);
      validate(e.right(), num_idents, num_types);
  }
}

std::size_t requiredIdents(const Constraint& e) {
  switch (e.kind()) {
    case ConstraintKind::Is: return e.ident() + 1;
    case ConstraintKind::Not: return requiredIdents(e.child());
    default: return std::max(requiredIdents(e.left()), requiredIdents(e.right()));
  }
}

std::size_t requiredTypes(const Constraint& e) {
  switch (e.kind()) {
    case ConstraintKind::Is: return e.type() + 1;
    case ConstraintKind::Not: return requiredTypes(e.child());
    default: return std::max(requiredTypes(e.left()), requiredTypes(e.right()));
  }
}

TypeEnvironment::TypeEnvironment(std::vector<TypeIndex> assignment, std::size_t num_types)
    : assignment_(std::move(assignment)), num_types_(num_types) {
  for (TypeIndex t : assignment_) {
    if (t >= num_types_) throw InvalidArgument("environment assigns type index out of range");
  }
}

namespace {

bool satisfiesChecked(const TypeEnvironment& env, const Constraint& e) {
  switch (e.kind()) {
    case ConstraintKind::Is: return env[e.ident()] == e.type();
    case ConstraintKind::Not: return !satisfiesChecked(env, e.child());
    case ConstraintKind::And: return satisfiesChecked(env, e.left()) && satisfiesChecked(env, e.right());
    case ConstraintKind::Or: return satisfiesChecked(env, e.left()) || satisfiesChecked(env, e.right());
  }
  return false;
}

}  // namespace

bool satisfies(const TypeEnvironment& env, const Constraint& e) {
  validate(e, env.size(), env.numTypes());
  return satisfiesChecked(env, e);
}

ProbabilityMatrix toBinaryMatrix(const TypeEnvironment& env) {
  Matrix b(env.size(), env.numTypes());
  for (IdentIndex v = 0; v < env.size(); ++v) b(v, env[v]) = 1.0;
  return ProbabilityMatrix(std::move(b));
}

EnvironmentRange::EnvironmentRange(std::size_t num_idents, std::size_t num_types, std::uint64_t cap)
    : num_idents_(num_idents), num_types_(num_types), count_(1) {
  if (num_idents == 0 || num_types == 0) throw InvalidArgument("enumeration needs V >= 1 and T >= 1");
  for (std::size_t i = 0; i < num_idents; ++i) {
    if (count_ > cap / num_types) {
      throw InvalidArgument("T^V exceeds the enumeration cap of " + std::to_string(cap));
    }
    count_ *= num_types;
  }
}

EnvironmentRange::iterator::iterator(std::size_t num_idents, std::size_t num_types)
    : current_(std::vector<TypeIndex>(num_idents, 0), num_types),
      digits_(num_idents, 0),
      num_types_(num_types),
      done_(false) {}

EnvironmentRange::iterator& EnvironmentRange::iterator::operator++() {
  for (std::size_t i = digits_.size(); i-- > 0;) {
    if (++digits_[i] < num_types_) {
      current_ = TypeEnvironment(digits_, num_types_);
      return *this;
    }
    digits_[i] = 0;
  }
  done_ = true;
  return *this;
}

}  // namespace softtype
