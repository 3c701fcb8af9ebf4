#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "softtype/logic.hpp"
#include "softtype/matrix.hpp"
#include "softtype/relax.hpp"

namespace softtype {

enum class LambdaMode { FixedPenalty, DualAscent };

// Linear: -lambda * ([P](E) - 1). Log: -lambda * log [P](E), evaluated in log
// space; same minimisers, but the gradient does not vanish when [P](E) is tiny.
enum class Penalty { Linear, Log };

struct OptimiserConfig {
  double learning_rate = 0.05;
  double rmsprop_decay = 0.9;
  double epsilon = 1e-8;
  std::size_t max_iterations = 5000;
  // Applies to both the constraint residual 1 - [P](E) and the gradient norm.
  double convergence_threshold = 1e-4;
  // Once the residual is below threshold, the step size is multiplied by
  // this factor whenever the objective rises, so RMSprop settles instead of
  // oscillating around the fit minimum. 1 disables it.
  double settle_decay = 0.5;
  double initial_lambda = 10.0;
  LambdaMode lambda_mode = LambdaMode::FixedPenalty;
  double dual_ascent_step = 1.0;
  std::uint64_t seed = 0;
  // Evaluate the constraint term through the log-space evaluator.
  bool log_space = false;
  Penalty penalty = Penalty::Log;
  bool record_trace = false;

  // Throws InvalidArgument on out-of-range fields.
  void validate() const;
};

// Unconstrained pre-softmax scores, one row per identifier.
class RelaxedAssignment {
public:
  RelaxedAssignment() = default;
  explicit RelaxedAssignment(Matrix scores);

  const Matrix& scores() const noexcept { return scores_; }
  ProbabilityMatrix probabilities() const;

private:
  Matrix scores_;
};

struct TracePoint {
  std::size_t iteration;
  double objective;
  double constraint_value;
  double lambda;
  double gradient_norm;

  friend bool operator==(const TracePoint&, const TracePoint&) = default;
};

struct SolveReport {
  ProbabilityMatrix solution;
  double objective = 0.0;
  double constraint_value = 0.0;
  double lambda = 0.0;
  double gradient_norm = 0.0;
  std::size_t iterations = 0;
  bool converged = false;
  std::vector<TracePoint> trace;
};

std::vector<double> softmaxRow(std::span<const double> y);
ProbabilityMatrix softmaxRows(const Matrix& y);

// The penalised objective
//   sum_v |softmax(y_v) - mu_v|^2 - lambda * ([softmax(Y)](E) - 1)
// with the fit term dropped when no natural matrix is given.
class Objective {
public:
  Objective(const NaturalConstraintMatrix* natural, const Constraint& e, std::size_t num_idents,
            std::size_t num_types, bool log_space = false, Penalty penalty = Penalty::Linear);

  struct Value {
    double objective;
    double fit;
    double constraint_value;
  };

  Value evaluate(const Matrix& y, double lambda) const;
  // Returns the value and overwrites grad with d(objective)/dY.
  Value evaluate(const Matrix& y, double lambda, Matrix& grad) const;

  std::size_t numIdents() const noexcept { return num_idents_; }
  std::size_t numTypes() const noexcept { return num_types_; }

private:
  const NaturalConstraintMatrix* natural_;
  ConstraintDag dag_;
  std::size_t num_idents_;
  std::size_t num_types_;
  bool log_space_;
  Penalty penalty_;
};

double objective(const RelaxedAssignment& y, double lambda, const NaturalConstraintMatrix& m, const Constraint& e);
Matrix gradient(const RelaxedAssignment& y, double lambda, const NaturalConstraintMatrix& m, const Constraint& e);

SolveReport solve(const NaturalConstraintMatrix& m, const Constraint& e, const OptimiserConfig& cfg);
SolveReport solveLogicalOnly(const Constraint& e, std::size_t num_idents, std::size_t num_types,
                             const OptimiserConfig& cfg);

// Per-row argmax, ties to the lowest type index.
TypeEnvironment discretise(const ProbabilityMatrix& p);

}  // namespace softtype
