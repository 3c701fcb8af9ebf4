#include "softtype/optim.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "softtype/error.hpp"
#include "softtype/rng.hpp"

namespace softtype {

void OptimiserConfig::validate() const {
  if (!(learning_rate > 0.0)) throw InvalidArgument("learning rate must be positive");
  if (!(rmsprop_decay > 0.0 && rmsprop_decay < 1.0)) throw InvalidArgument("rmsprop decay must lie in (0,1)");
  if (!(epsilon > 0.0)) throw InvalidArgument("epsilon must be positive");
  if (max_iterations == 0) throw InvalidArgument("max iterations must be positive");
  if (!(convergence_threshold > 0.0)) throw InvalidArgument("convergence threshold must be positive");
  if (!(settle_decay > 0.0 && settle_decay <= 1.0)) throw InvalidArgument("settle decay must lie in (0,1]");
  if (!(initial_lambda > 0.0)) throw InvalidArgument("initial lambda must be positive");
  if (!(dual_ascent_step > 0.0)) throw InvalidArgument("dual ascent step must be positive");
}

RelaxedAssignment::RelaxedAssignment(Matrix scores) : scores_(std::move(scores)) {
  for (double x : scores_.data()) {
    if (!std::isfinite(x)) throw DomainError("relaxed assignment has a non-finite score");
  }
}

ProbabilityMatrix RelaxedAssignment::probabilities() const { return softmaxRows(scores_); }

namespace {

void softmaxInto(std::span<const double> y, std::span<double> out) {
  double mx = *std::max_element(y.begin(), y.end());
  double sum = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) {
    out[i] = std::exp(y[i] - mx);
    sum += out[i];
  }
  for (double& x : out) x /= sum;
}

Matrix softmaxMatrix(const Matrix& y) {
  Matrix p(y.rows(), y.cols());
  for (std::size_t v = 0; v < y.rows(); ++v) softmaxInto(y.row(v), p.row(v));
  return p;
}

Matrix logSoftmaxMatrix(const Matrix& y) {
  Matrix l(y.rows(), y.cols());
  for (std::size_t v = 0; v < y.rows(); ++v) {
    auto row = y.row(v);
    double mx = *std::max_element(row.begin(), row.end());
    double sum = 0.0;
    for (double x : row) sum += std::exp(x - mx);
    double lse = mx + std::log(sum);
    for (std::size_t t = 0; t < y.cols(); ++t) l(v, t) = row[t] - lse;
  }
  return l;
}

}  // namespace

std::vector<double> softmaxRow(std::span<const double> y) {
  if (y.empty()) throw InvalidArgument("softmax of an empty row");
  std::vector<double> out(y.size());
  softmaxInto(y, out);
  return out;
}

ProbabilityMatrix softmaxRows(const Matrix& y) { return ProbabilityMatrix(softmaxMatrix(y)); }

Objective::Objective(const NaturalConstraintMatrix* natural, const Constraint& e, std::size_t num_idents,
                     std::size_t num_types, bool log_space, Penalty penalty)
    : natural_(natural),
      dag_(e),
      num_idents_(num_idents),
      num_types_(num_types),
      log_space_(log_space || penalty == Penalty::Log),
      penalty_(penalty) {
  if (num_idents == 0 || num_types == 0) throw DimensionMismatch("empty problem");
  if (natural_ && (natural_->rows() != num_idents || natural_->cols() != num_types)) {
    throw DimensionMismatch("natural matrix does not match the problem dimensions");
  }
  dag_.checkDimensions(num_idents, num_types);
}

Objective::Value Objective::evaluate(const Matrix& y, double lambda) const {
  Matrix scratch(y.rows(), y.cols());
  return evaluate(y, lambda, scratch);
}

Objective::Value Objective::evaluate(const Matrix& y, double lambda, Matrix& grad) const {
  if (y.rows() != num_idents_ || y.cols() != num_types_) {
    throw DimensionMismatch("relaxed assignment does not match the problem dimensions");
  }
  Matrix p = softmaxMatrix(y);
  std::vector<double> values;
  // dObjective/dP, later pulled back through the softmax.
  Matrix dp(num_idents_, num_types_);
  double fit = 0.0;
  if (natural_) {
    for (std::size_t v = 0; v < num_idents_; ++v) {
      for (std::size_t t = 0; t < num_types_; ++t) {
        double d = p(v, t) - (*natural_)(v, t);
        fit += d * d;
        dp(v, t) = 2.0 * d;
      }
    }
  }

  double c = 0.0;
  double penalty = 0.0;
  grad = Matrix(num_idents_, num_types_);
  if (log_space_) {
    Matrix log_p = logSoftmaxMatrix(y);
    double log_c = dag_.forwardLog(log_p, values);
    c = std::exp(log_c);
    // d(-lambda c)/d(log p) = -lambda c * d(log c)/d(log p); log p_k = y_k - lse(y).
    double seed = penalty_ == Penalty::Log ? -lambda : -lambda * c;
    penalty = penalty_ == Penalty::Log ? -lambda * log_c : -lambda * (c - 1.0);
    Matrix dlog(num_idents_, num_types_);
    dag_.backwardLog(values, seed, dlog);
    for (std::size_t v = 0; v < num_idents_; ++v) {
      double total = 0.0;
      for (std::size_t t = 0; t < num_types_; ++t) total += dlog(v, t);
      for (std::size_t t = 0; t < num_types_; ++t) grad(v, t) = dlog(v, t) - p(v, t) * total;
    }
  } else {
    c = dag_.forwardProb(p, values);
    penalty = -lambda * (c - 1.0);
    dag_.backwardProb(values, -lambda, dp);
  }

  // Softmax pullback: dy_j = p_j (g_j - sum_k p_k g_k).
  for (std::size_t v = 0; v < num_idents_; ++v) {
    double inner = 0.0;
    for (std::size_t t = 0; t < num_types_; ++t) inner += p(v, t) * dp(v, t);
    for (std::size_t t = 0; t < num_types_; ++t) grad(v, t) += p(v, t) * (dp(v, t) - inner);
  }
  return {fit + penalty, fit, c};
}

double objective(const RelaxedAssignment& y, double lambda, const NaturalConstraintMatrix& m, const Constraint& e) {
  Objective obj(&m, e, m.rows(), m.cols());
  return obj.evaluate(y.scores(), lambda).objective;
}

Matrix gradient(const RelaxedAssignment& y, double lambda, const NaturalConstraintMatrix& m, const Constraint& e) {
  Objective obj(&m, e, m.rows(), m.cols());
  Matrix grad;
  obj.evaluate(y.scores(), lambda, grad);
  return grad;
}

namespace {

double norm2(const Matrix& m) {
  double s = 0.0;
  for (double x : m.data()) s += x * x;
  return std::sqrt(s);
}

SolveReport runRmsprop(const Objective& obj, const OptimiserConfig& cfg) {
  cfg.validate();
  Rng rng(cfg.seed);
  Matrix y(obj.numIdents(), obj.numTypes());
  for (double& x : y.data()) x = rng.uniform(-0.01, 0.01);

  Matrix mean_sq(obj.numIdents(), obj.numTypes());
  Matrix grad;
  double lambda = cfg.initial_lambda;
  SolveReport report;

  Objective::Value val{};
  double gnorm = 0.0;
  double lr = cfg.learning_rate;
  double previous = std::numeric_limits<double>::infinity();
  std::size_t it = 0;
  for (;; ++it) {
    val = obj.evaluate(y, lambda, grad);
    gnorm = norm2(grad);
    if (!std::isfinite(val.objective) || !std::isfinite(gnorm)) break;
    double residual = 1.0 - val.constraint_value;
    if (cfg.record_trace) report.trace.push_back({it, val.objective, val.constraint_value, lambda, gnorm});
    if (residual < cfg.convergence_threshold && gnorm < cfg.convergence_threshold) {
      report.converged = true;
      break;
    }
    if (it == cfg.max_iterations) break;
    if (residual < cfg.convergence_threshold && val.objective > previous) lr *= cfg.settle_decay;
    previous = val.objective;

    auto g = grad.data();
    auto ms = mean_sq.data();
    auto ys = y.data();
    for (std::size_t i = 0; i < g.size(); ++i) {
      ms[i] = cfg.rmsprop_decay * ms[i] + (1.0 - cfg.rmsprop_decay) * g[i] * g[i];
      ys[i] -= lr * g[i] / (std::sqrt(ms[i]) + cfg.epsilon);
    }
    if (cfg.lambda_mode == LambdaMode::DualAscent) lambda += cfg.dual_ascent_step * residual;
  }

  report.solution = softmaxRows(y);
  report.objective = val.objective;
  report.constraint_value = val.constraint_value;
  report.lambda = lambda;
  report.gradient_norm = gnorm;
  report.iterations = it;
  return report;
}

}  // namespace

SolveReport solve(const NaturalConstraintMatrix& m, const Constraint& e, const OptimiserConfig& cfg) {
  Objective obj(&m, e, m.rows(), m.cols(), cfg.log_space, cfg.penalty);
  return runRmsprop(obj, cfg);
}

SolveReport solveLogicalOnly(const Constraint& e, std::size_t num_idents, std::size_t num_types,
                             const OptimiserConfig& cfg) {
  Objective obj(nullptr, e, num_idents, num_types, cfg.log_space, cfg.penalty);
  return runRmsprop(obj, cfg);
}

TypeEnvironment discretise(const ProbabilityMatrix& p) {
  std::vector<TypeIndex> out(p.rows());
  for (std::size_t v = 0; v < p.rows(); ++v) {
    auto row = p.row(v);
    out[v] = static_cast<TypeIndex>(std::max_element(row.begin(), row.end()) - row.begin());
  }
  return TypeEnvironment(std::move(out), p.cols());
}

}  // namespace softtype
