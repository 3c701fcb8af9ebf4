#pragma once

#include <cstddef>
#include <cstdint>
#include <iterator>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "softtype/matrix.hpp"

namespace softtype {

using IdentIndex = std::size_t;
using TypeIndex = std::size_t;

// Ordered, duplicate-free list of names. Position is the canonical index.
class NameTable {
public:
  NameTable() = default;
  NameTable(std::vector<std::string> names, std::string_view what);

  std::size_t size() const noexcept { return names_.size(); }
  const std::string& name(std::size_t i) const { return names_.at(i); }
  const std::vector<std::string>& names() const noexcept { return names_; }
  std::optional<std::size_t> find(std::string_view name) const;

  friend bool operator==(const NameTable& a, const NameTable& b) { return a.names_ == b.names_; }

private:
  std::vector<std::string> names_;
  std::unordered_map<std::string, std::size_t> index_;
};

class TypeUniverse : public NameTable {
public:
  TypeUniverse() = default;
  explicit TypeUniverse(std::vector<std::string> names) : NameTable(std::move(names), "type universe") {}
};

class IdentifierSet : public NameTable {
public:
  IdentifierSet() = default;
  explicit IdentifierSet(std::vector<std::string> names) : NameTable(std::move(names), "identifier set") {}
};

enum class ConstraintKind : std::uint8_t { Is, Not, And, Or };

// Immutable propositional formula over atoms "identifier v is type t".
// Nodes are shared, so copies are cheap and subtrees may be reused.
class Constraint {
public:
  static Constraint is(IdentIndex ident, TypeIndex type);
  static Constraint negation(Constraint child);
  static Constraint conjunction(Constraint left, Constraint right);
  static Constraint disjunction(Constraint left, Constraint right);

  ConstraintKind kind() const noexcept { return node_->kind; }
  // Only meaningful for Is nodes.
  IdentIndex ident() const noexcept { return node_->ident; }
  TypeIndex type() const noexcept { return node_->type; }
  // Not uses child(); And/Or use left()/right().
  Constraint child() const { return Constraint(node_->left); }
  Constraint left() const { return Constraint(node_->left); }
  Constraint right() const { return Constraint(node_->right); }

  std::size_t depth() const;
  std::size_t nodeCount() const;

  // Identity of the underlying node, stable for the lifetime of the tree.
  const void* id() const noexcept { return node_.get(); }

  friend Constraint operator!(Constraint c) { return negation(std::move(c)); }
  friend Constraint operator&&(Constraint a, Constraint b) { return conjunction(std::move(a), std::move(b)); }
  friend Constraint operator||(Constraint a, Constraint b) { return disjunction(std::move(a), std::move(b)); }

  // Structural equality.
  friend bool operator==(const Constraint& a, const Constraint& b);

private:
  struct Node {
    ConstraintKind kind;
    IdentIndex ident = 0;
    TypeIndex type = 0;
    std::shared_ptr<const Node> left;
    std::shared_ptr<const Node> right;
  };

  explicit Constraint(std::shared_ptr<const Node> node) : node_(std::move(node)) {}

  std::shared_ptr<const Node> node_;
};

// Balanced conjunction/disjunction of a nonempty list; keeps depth logarithmic.
Constraint conjoinAll(const std::vector<Constraint>& parts);
Constraint disjoinAll(const std::vector<Constraint>& parts);

// Throws MalformedConstraint if an atom refers outside [0,V) x [0,T).
void validate(const Constraint& e, std::size_t num_idents, std::size_t num_types);

// Largest identifier/type index used by e, plus one.
std::size_t requiredIdents(const Constraint& e);
std::size_t requiredTypes(const Constraint& e);

// Total assignment of a type to every identifier.
class TypeEnvironment {
public:
  TypeEnvironment() = default;
  TypeEnvironment(std::vector<TypeIndex> assignment, std::size_t num_types);

  std::size_t size() const noexcept { return assignment_.size(); }
  std::size_t numTypes() const noexcept { return num_types_; }
  TypeIndex operator[](IdentIndex v) const { return assignment_.at(v); }
  const std::vector<TypeIndex>& assignment() const noexcept { return assignment_; }

  friend bool operator==(const TypeEnvironment&, const TypeEnvironment&) = default;
  friend auto operator<=>(const TypeEnvironment&, const TypeEnvironment&) = default;

private:
  std::vector<TypeIndex> assignment_;
  std::size_t num_types_ = 0;
};

// Classical satisfaction, Gamma |= E.
bool satisfies(const TypeEnvironment& env, const Constraint& e);

// One-hot V x T encoding of an environment.
ProbabilityMatrix toBinaryMatrix(const TypeEnvironment& env);

// All T^V environments in odometer order (identifier 0 varies slowest).
class EnvironmentRange {
public:
  static constexpr std::uint64_t kDefaultCap = 1'000'000;

  EnvironmentRange(std::size_t num_idents, std::size_t num_types, std::uint64_t cap = kDefaultCap);

  class iterator {
  public:
    using value_type = TypeEnvironment;
    using difference_type = std::ptrdiff_t;
    using reference = const TypeEnvironment&;
    using pointer = const TypeEnvironment*;
    using iterator_category = std::input_iterator_tag;

    iterator() = default;
    reference operator*() const { return current_; }
    pointer operator->() const { return &current_; }
    iterator& operator++();
    void operator++(int) { ++*this; }
    friend bool operator==(const iterator& a, const iterator& b) { return a.done_ == b.done_; }

  private:
    friend class EnvironmentRange;
    iterator(std::size_t num_idents, std::size_t num_types);

    TypeEnvironment current_;
    std::vector<TypeIndex> digits_;
    std::size_t num_types_ = 0;
    bool done_ = true;
  };

  iterator begin() const { return iterator(num_idents_, num_types_); }
  iterator end() const { return iterator(); }
  std::uint64_t count() const noexcept { return count_; }

private:
  std::size_t num_idents_;
  std::size_t num_types_;
  std::uint64_t count_;
};

inline EnvironmentRange enumerateEnvironments(std::size_t num_idents, std::size_t num_types,
                                              std::uint64_t cap = EnvironmentRange::kDefaultCap) {
  return EnvironmentRange(num_idents, num_types, cap);
}

}  // namespace softtype
