#include <doctest.h>

#include <cmath>
#include <set>

#include "oracles.hpp"
#include "softtype/error.hpp"
#include "softtype/optim.hpp"

using namespace softtype;

namespace {

Constraint is(IdentIndex v, TypeIndex t) { return Constraint::is(v, t); }

// start=0, end=1, addNum=2 over {number, string, any}
Constraint addNumConstraint() {
  return ((is(0, 0) && is(1, 0)) || (is(0, 1) && is(1, 1))) &&
         ((is(2, 0) && is(0, 0) && is(1, 0)) || (is(2, 1) && is(0, 1) && is(1, 1)));
}

Matrix corner(TypeIndex t, std::size_t v, std::size_t nt, double scale = 30.0) {
  Matrix y(v, nt);
  for (std::size_t i = 0; i < v; ++i) y(i, t) = scale;
  return y;
}

double rowDistance(const ProbabilityMatrix& a, const NaturalConstraintMatrix& b) {
  double worst = 0.0;
  for (std::size_t v = 0; v < a.rows(); ++v) {
    for (std::size_t t = 0; t < a.cols(); ++t) worst = std::max(worst, std::abs(a(v, t) - b(v, t)));
  }
  return worst;
}

}  // namespace

TEST_CASE("softmax") {
  auto u = softmaxRow(std::vector<double>{0, 0, 0});
  for (double x : u) CHECK(x == doctest::Approx(1.0 / 3).epsilon(1e-12));

  std::vector<double> a{0.3, -1.2, 2.0}, shifted{100.3, 98.8, 102.0};
  auto pa = softmaxRow(a), ps = softmaxRow(shifted);
  for (std::size_t i = 0; i < 3; ++i) CHECK(std::abs(pa[i] - ps[i]) < 1e-12);

  auto p = softmaxRow(std::vector<double>{1, 2, 3});
  long double z = std::exp(1.0L) + std::exp(2.0L) + std::exp(3.0L);
  for (int i = 0; i < 3; ++i) CHECK(std::abs(p[i] - static_cast<double>(std::exp(1.0L + i) / z)) < 1e-12);

  auto big = softmaxRow(std::vector<double>{1000, 0, -1000});
  CHECK(big[0] == 1.0);
  CHECK_THROWS_AS(softmaxRow(std::vector<double>{}), InvalidArgument);
  CHECK_THROWS_AS(RelaxedAssignment(Matrix{{0.0, NAN}}), DomainError);
}

TEST_CASE("objective examples") {
  NaturalConstraintMatrix m(Matrix{{0.7, 0.3}, {0.2, 0.8}});
  Constraint e = is(0, 0) || is(1, 1);

  // lambda = 0: pure squared error
  RelaxedAssignment y(Matrix{{0.5, -0.5}, {0.0, 1.0}});
  double fit = 0.0;
  for (std::size_t v = 0; v < 2; ++v) {
    auto p = softmaxRow(y.scores().row(v));
    for (std::size_t t = 0; t < 2; ++t) fit += (p[t] - m(v, t)) * (p[t] - m(v, t));
  }
  CHECK(std::abs(objective(y, 0.0, m, e) - fit) < 1e-12);

  // both terms vanish at a satisfying corner that equals M
  NaturalConstraintMatrix hot(Matrix{{1.0, 0.0}, {0.0, 1.0}});
  RelaxedAssignment at(Matrix{{40.0, 0.0}, {0.0, 40.0}});
  CHECK(std::abs(objective(at, 100.0, hot, e)) < 1e-12);

  CHECK_THROWS_AS(objective(y, 1.0, m, is(2, 0)), DimensionMismatch);
}

TEST_CASE("number corner beats string corner when M leans to number") {
  NaturalConstraintMatrix m(Matrix{{0.6, 0.3, 0.1}, {0.5, 0.4, 0.1}, {0.7, 0.2, 0.1}});
  double at_number = objective(RelaxedAssignment(corner(0, 3, 3)), 100.0, m, addNumConstraint());
  double at_string = objective(RelaxedAssignment(corner(1, 3, 3)), 100.0, m, addNumConstraint());
  CHECK(at_number < at_string);
}

TEST_CASE("uniform M with zero lambda is stationary at zero scores") {
  NaturalConstraintMatrix m(Matrix{{0.25, 0.25, 0.25, 0.25}, {0.25, 0.25, 0.25, 0.25}});
  Matrix g = gradient(RelaxedAssignment(Matrix(2, 4)), 0.0, m, is(0, 1) && is(1, 2));
  for (double x : g.data()) CHECK(std::abs(x) < 1e-8);
}

TEST_CASE("gradients match central differences") {
  Rng rng(31);
  for (int i = 0; i < 60; ++i) {
    std::size_t v = 1 + rng.below(5), t = 2 + rng.below(4);
    Constraint e = oracle::randomFormula(rng, v, t, 5);
    NaturalConstraintMatrix m(oracle::randomInterior(rng, v, t).values());
    double lambda = rng.uniform(0.0, 100.0);
    Matrix y(v, t);
    for (double& x : y.data()) x = rng.uniform(-2.0, 2.0);

    for (Penalty pen : {Penalty::Linear, Penalty::Log}) {
      for (bool log_space : {false, true}) {
        Objective obj(&m, e, v, t, log_space, pen);
        Matrix grad;
        obj.evaluate(y, lambda, grad);
        auto f = [&](const std::vector<double>& z) {
          Matrix yy(v, t);
          std::copy(z.begin(), z.end(), yy.data().begin());
          return obj.evaluate(yy, lambda).objective;
        };
        std::vector<double> x(y.data().begin(), y.data().end());
        auto fd = oracle::centralDifference(f, x, 1e-5);
        std::vector<double> g(grad.data().begin(), grad.data().end());
        REQUIRE(oracle::maxRelativeError(g, fd, 1e-3) < 1e-4);
      }
    }
  }
}

TEST_CASE("constraint gradient at a satisfying corner is finite") {
  NaturalConstraintMatrix m(Matrix{{0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}, {0.5, 0.5, 0.0}});
  Matrix g = gradient(RelaxedAssignment(corner(0, 3, 3, 700.0)), 100.0, m, addNumConstraint());
  for (double x : g.data()) CHECK(std::isfinite(x));
}

TEST_CASE("single atom and unsatisfiable logical runs") {
  OptimiserConfig cfg;
  SolveReport r = solveLogicalOnly(is(0, 0), 1, 2, cfg);
  CHECK(r.converged);
  CHECK(r.solution(0, 0) >= 0.99);

  for (Penalty pen : {Penalty::Linear, Penalty::Log}) {
    cfg.penalty = pen;
    SolveReport bad = solveLogicalOnly(is(0, 0) && is(0, 1), 1, 2, cfg);
    CHECK_FALSE(bad.converged);
    CHECK(bad.constraint_value <= 0.25 + 1e-12);
  }
}

TEST_CASE("addNum logical run picks one shared type") {
  std::set<TypeIndex> winners;
  for (std::uint64_t seed = 0; seed < 12; ++seed) {
    OptimiserConfig cfg;
    cfg.seed = seed;
    SolveReport r = solveLogicalOnly(addNumConstraint(), 3, 3, cfg);
    REQUIRE(r.converged);
    REQUIRE(r.constraint_value >= 0.99);
    TypeEnvironment env = discretise(r.solution);
    REQUIRE(env[0] == env[1]);
    REQUIRE(env[1] == env[2]);
    REQUIRE(env[0] != 2);
    for (std::size_t v = 0; v < 3; ++v) REQUIRE(r.solution(v, env[v]) > 0.99);
    winners.insert(env[0]);
  }
  // which type wins depends on the seed
  CHECK(winners.size() == 2);
}

TEST_CASE("addNum combined run follows the natural matrix") {
  NaturalConstraintMatrix m(Matrix{{0.6, 0.3, 0.1}, {0.5, 0.4, 0.1}, {0.45, 0.35, 0.2}});
  for (Penalty pen : {Penalty::Linear, Penalty::Log}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      OptimiserConfig cfg;
      cfg.penalty = pen;
      cfg.seed = seed;
      SolveReport r = solve(m, addNumConstraint(), cfg);
      CHECK(r.converged);
      CHECK(discretise(r.solution) == TypeEnvironment({0, 0, 0}, 3));
    }
  }
}

TEST_CASE("combined run overrides a misleading name when the constraint decides") {
  // x is forced to string; M prefers number for it.
  NaturalConstraintMatrix m(Matrix{{0.8, 0.1, 0.1}, {0.2, 0.7, 0.1}});
  SolveReport r = solve(m, is(0, 1) && (is(1, 1) || is(1, 0)), {});
  CHECK(r.converged);
  CHECK(discretise(r.solution) == TypeEnvironment({1, 1}, 3));
}

TEST_CASE("tautology leaves M in place as lambda vanishes") {
  NaturalConstraintMatrix m(Matrix{{0.3, 0.7}, {0.55, 0.45}});
  Constraint taut = is(0, 0) || !is(0, 0);
  OptimiserConfig cfg;
  cfg.initial_lambda = 1e-9;
  cfg.penalty = Penalty::Linear;
  cfg.learning_rate = 0.002;
  SolveReport r = solve(m, taut, cfg);
  CHECK(rowDistance(r.solution, m) < 2e-3);
  CHECK_FALSE(r.converged);
}

TEST_CASE("tautology with a peaked M is satisfied at the matching corner") {
  // [P](x is t1 or not x is t1) = 1 - p(1-p): only corners reach 1.
  NaturalConstraintMatrix m(Matrix{{0.9, 0.1}});
  SolveReport r = solve(m, is(0, 0) || !is(0, 0), {});
  CHECK(r.converged);
  CHECK(1.0 - r.constraint_value < 1e-4);
  CHECK(discretise(r.solution)[0] == 0);
}

TEST_CASE("converged runs satisfy the residual bound") {
  Rng rng(33);
  int converged = 0;
  for (int i = 0; i < 40; ++i) {
    std::size_t v = 1 + rng.below(4), t = 2 + rng.below(3);
    Constraint e = oracle::randomFormula(rng, v, t, 4);
    NaturalConstraintMatrix m(oracle::randomInterior(rng, v, t).values());
    OptimiserConfig cfg;
    cfg.seed = static_cast<std::uint64_t>(i);
    SolveReport r = solve(m, e, cfg);
    CHECK(r.constraint_value >= 0.0);
    CHECK(r.constraint_value <= 1.0);
    if (r.converged) {
      ++converged;
      CHECK(1.0 - r.constraint_value < cfg.convergence_threshold);
      CHECK(r.gradient_norm < cfg.convergence_threshold);
    }
  }
  CHECK(converged > 0);
}

TEST_CASE("dual ascent grows lambda while the residual is positive") {
  NaturalConstraintMatrix m(Matrix{{0.9, 0.1}, {0.9, 0.1}});
  OptimiserConfig cfg;
  cfg.lambda_mode = LambdaMode::DualAscent;
  cfg.initial_lambda = 0.5;
  cfg.record_trace = true;
  SolveReport r = solve(m, is(0, 1) && is(1, 1), cfg);
  CHECK(r.converged);
  CHECK(r.lambda > 0.5);
  for (std::size_t k = 1; k < r.trace.size(); ++k) CHECK(r.trace[k].lambda >= r.trace[k - 1].lambda);
  CHECK(discretise(r.solution) == TypeEnvironment({1, 1}, 2));
}

TEST_CASE("solves are deterministic for a fixed seed") {
  NaturalConstraintMatrix m(Matrix{{0.4, 0.6, 0.0}, {0.5, 0.25, 0.25}, {0.3, 0.3, 0.4}});
  OptimiserConfig cfg;
  cfg.seed = 99;
  cfg.record_trace = true;
  SolveReport a = solve(m, addNumConstraint(), cfg), b = solve(m, addNumConstraint(), cfg);
  CHECK(a.trace == b.trace);
  CHECK(a.solution == b.solution);
  CHECK(a.iterations == b.iterations);
}

TEST_CASE("discretise") {
  CHECK(discretise(toBinaryMatrix(TypeEnvironment({2, 0, 1}, 3))) == TypeEnvironment({2, 0, 1}, 3));
  CHECK(discretise(ProbabilityMatrix(Matrix{{0.2, 0.5, 0.3}}))[0] == 1);
  CHECK(discretise(ProbabilityMatrix(Matrix{{0.5, 0.5, 0.0}}))[0] == 0);

  Rng rng(34);
  for (int i = 0; i < 100; ++i) {
    Matrix y(3, 4);
    for (double& x : y.data()) x = rng.uniform(-3, 3);
    Matrix shifted = y;
    for (std::size_t v = 0; v < 3; ++v) {
      double c = rng.uniform(-50, 50);
      for (double& x : shifted.row(v)) x += c;
    }
    REQUIRE(discretise(softmaxRows(y)) == discretise(softmaxRows(shifted)));
  }
}

TEST_CASE("softmax rows are probability matrices") {
  Rng rng(35);
  for (int i = 0; i < 100; ++i) {
    Matrix y(4, 5);
    for (double& x : y.data()) x = rng.uniform(-300, 300);
    CHECK_NOTHROW(softmaxRows(y));
  }
}

TEST_CASE("config validation") {
  OptimiserConfig cfg;
  CHECK_NOTHROW(cfg.validate());
  cfg.rmsprop_decay = 1.0;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
  cfg = {};
  cfg.initial_lambda = 0.0;
  CHECK_THROWS_AS(solve(NaturalConstraintMatrix(Matrix{{1.0}}), is(0, 0), cfg), InvalidArgument);
  cfg = {};
  cfg.learning_rate = -1;
  CHECK_THROWS_AS(cfg.validate(), InvalidArgument);
}
