#pragma once

#include <cstdint>
#include <span>
#include <utility>
#include <vector>

#include "softtype/logic.hpp"
#include "softtype/matrix.hpp"

namespace softtype {

// Fuzzy conjunction used by the relaxed semantics. Only the product t-norm
// is implemented.
enum class TNorm { Product };

// A constraint compiled to a DAG with structurally equal subformulas merged.
// Nodes are topologically ordered: children precede parents, the root is last.
class ConstraintDag {
public:
  struct Node {
    ConstraintKind kind;
    // Is: (ident, type). Not: (child, unused). And/Or: (left, right).
    std::uint32_t a;
    std::uint32_t b;
  };

  explicit ConstraintDag(const Constraint& e);

  const std::vector<Node>& nodes() const noexcept { return nodes_; }
  std::size_t size() const noexcept { return nodes_.size(); }
  std::size_t root() const noexcept { return nodes_.size() - 1; }
  std::size_t requiredIdents() const noexcept { return required_idents_; }
  std::size_t requiredTypes() const noexcept { return required_types_; }
  // Throws DimensionMismatch unless every atom fits a rows x cols matrix.
  void checkDimensions(std::size_t rows, std::size_t cols) const;

  // Probability-space forward pass; node values are written to `values`.
  double forwardProb(const Matrix& p, std::vector<double>& values) const;
  // Accumulates seed * d(root)/d(p) into grad, using values from forwardProb.
  void backwardProb(std::span<const double> values, double seed, Matrix& grad) const;

  // Log-space forward pass over log-probabilities.
  double forwardLog(const Matrix& log_p, std::vector<double>& values) const;
  // Accumulates seed * d(log root)/d(log p) into grad, using values from forwardLog.
  void backwardLog(std::span<const double> values, double seed, Matrix& grad) const;

private:
  std::vector<Node> nodes_;
  std::size_t required_idents_ = 0;
  std::size_t required_types_ = 0;
};

double evalProb(const ProbabilityMatrix& p, const Constraint& e, TNorm norm = TNorm::Product);
double evalLog(const LogProbMatrix& l, const Constraint& e);

// (value of not(e1 and e2), value of (not e1) or (not e2)).
std::pair<double, double> checkDuality(const ProbabilityMatrix& p, const Constraint& e1, const Constraint& e2);
// (value of not(e1 or e2), value of (not e1) and (not e2)).
std::pair<double, double> checkDualityOr(const ProbabilityMatrix& p, const Constraint& e1, const Constraint& e2);

}  // namespace softtype
