#include "softtype/relax.hpp"

#include <cmath>
#include <map>
#include <tuple>
#include <unordered_map>

#include "softtype/error.hpp"
#include "softtype/logmath.hpp"

namespace softtype {

namespace {

class DagBuilder {
public:
  explicit DagBuilder(std::vector<ConstraintDag::Node>& nodes) : nodes_(nodes) {}

  std::uint32_t add(const Constraint& e) {
    if (auto it = seen_.find(e.id()); it != seen_.end()) return it->second;
    ConstraintDag::Node node{};
    node.kind = e.kind();
    switch (e.kind()) {
      case ConstraintKind::Is:
        node.a = static_cast<std::uint32_t>(e.ident());
        node.b = static_cast<std::uint32_t>(e.type());
        break;
      case ConstraintKind::Not: node.a = add(e.child()); break;
      default:
        node.a = add(e.left());
        node.b = add(e.right());
    }
    auto key = std::make_tuple(node.kind, node.a, node.b);
    auto [it, inserted] = interned_.emplace(key, static_cast<std::uint32_t>(nodes_.size()));
    if (inserted) nodes_.push_back(node);
    seen_.emplace(e.id(), it->second);
    return it->second;
  }

private:
  std::vector<ConstraintDag::Node>& nodes_;
  std::map<std::tuple<ConstraintKind, std::uint32_t, std::uint32_t>, std::uint32_t> interned_;
  std::unordered_map<const void*, std::uint32_t> seen_;
};

}  // namespace

ConstraintDag::ConstraintDag(const Constraint& e) {
  DagBuilder(nodes_).add(e);
  for (const auto& n : nodes_) {
    if (n.kind == ConstraintKind::Is) {
      required_idents_ = std::max<std::size_t>(required_idents_, n.a + 1);
      required_types_ = std::max<std::size_t>(required_types_, n.b + 1);
    }
  }
}

void ConstraintDag::checkDimensions(std::size_t rows, std::size_t cols) const {
  if (required_idents_ > rows || required_types_ > cols) {
    throw DimensionMismatch("constraint needs at least " + std::to_string(required_idents_) + "x" +
                            std::to_string(required_types_) + ", matrix is " + std::to_string(rows) + "x" +
                            std::to_string(cols));
  }
}

double ConstraintDag::forwardProb(const Matrix& p, std::vector<double>& values) const {
  values.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case ConstraintKind::Is: values[i] = p(n.a, n.b); break;
      case ConstraintKind::Not: values[i] = 1.0 - values[n.a]; break;
      case ConstraintKind::And: values[i] = values[n.a] * values[n.b]; break;
      case ConstraintKind::Or: {
        double x = values[n.a], y = values[n.b];
        values[i] = x + y - x * y;
        break;
      }
    }
  }
  return values.back();
}

void ConstraintDag::backwardProb(std::span<const double> values, double seed, Matrix& grad) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  adj.back() = seed;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const Node& n = nodes_[i];
    double g = adj[i];
    if (g == 0.0) continue;
    switch (n.kind) {
      case ConstraintKind::Is: grad(n.a, n.b) += g; break;
      case ConstraintKind::Not: adj[n.a] -= g; break;
      case ConstraintKind::And:
        adj[n.a] += g * values[n.b];
        adj[n.b] += g * values[n.a];
        break;
      case ConstraintKind::Or:
        adj[n.a] += g * (1.0 - values[n.b]);
        adj[n.b] += g * (1.0 - values[n.a]);
        break;
    }
  }
}

double ConstraintDag::forwardLog(const Matrix& log_p, std::vector<double>& values) const {
  values.resize(nodes_.size());
  for (std::size_t i = 0; i < nodes_.size(); ++i) {
    const Node& n = nodes_[i];
    switch (n.kind) {
      case ConstraintKind::Is: values[i] = log_p(n.a, n.b); break;
      case ConstraintKind::Not: values[i] = log1mexp(values[n.a]); break;
      case ConstraintKind::And: values[i] = values[n.a] + values[n.b]; break;
      case ConstraintKind::Or: {
        // p(a or b) = p(a) + p(b) * (1 - p(a))
        double x = values[n.a], y = values[n.b];
        values[i] = logAddExp(x, y + log1mexp(x));
        break;
      }
    }
  }
  return values.back();
}

void ConstraintDag::backwardLog(std::span<const double> values, double seed, Matrix& grad) const {
  std::vector<double> adj(nodes_.size(), 0.0);
  adj.back() = seed;
  for (std::size_t i = nodes_.size(); i-- > 0;) {
    const Node& n = nodes_[i];
    double g = adj[i];
    if (g == 0.0) continue;
    switch (n.kind) {
      case ConstraintKind::Is: grad(n.a, n.b) += g; break;
      case ConstraintKind::Not:
        // d/dx log(1 - e^x) = -e^x / (1 - e^x)
        adj[n.a] -= g * std::exp(values[n.a] - values[i]);
        break;
      case ConstraintKind::And:
        adj[n.a] += g;
        adj[n.b] += g;
        break;
      case ConstraintKind::Or: {
        // d/da log(pa + pb - pa pb) = pa (1 - pb) / p_or
        double x = values[n.a], y = values[n.b], z = values[i];
        adj[n.a] += g * std::exp(x + log1mexp(y) - z);
        adj[n.b] += g * std::exp(y + log1mexp(x) - z);
        break;
      }
    }
  }
}

double evalProb(const ProbabilityMatrix& p, const Constraint& e, TNorm) {
  ConstraintDag dag(e);
  dag.checkDimensions(p.rows(), p.cols());
  std::vector<double> values;
  return dag.forwardProb(p.values(), values);
}

double evalLog(const LogProbMatrix& l, const Constraint& e) {
  ConstraintDag dag(e);
  dag.checkDimensions(l.rows(), l.cols());
  std::vector<double> values;
  return dag.forwardLog(l.values(), values);
}

std::pair<double, double> checkDuality(const ProbabilityMatrix& p, const Constraint& e1, const Constraint& e2) {
  return {evalProb(p, !(e1 && e2)), evalProb(p, !e1 || !e2)};
}

std::pair<double, double> checkDualityOr(const ProbabilityMatrix& p, const Constraint& e1, const Constraint& e2) {
  return {evalProb(p, !(e1 || e2)), evalProb(p, !e1 && !e2)};
}

}  // namespace softtype
