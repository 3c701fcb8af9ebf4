#include <doctest.h>

#include <cmath>
#include <limits>

#include "oracles.hpp"
#include "softtype/error.hpp"
#include "softtype/logmath.hpp"
#include "softtype/relax.hpp"

using namespace softtype;

namespace {

Constraint is(IdentIndex v, TypeIndex t) { return Constraint::is(v, t); }

ProbabilityMatrix halves() { return ProbabilityMatrix(Matrix{{0.5, 0.5}, {0.5, 0.5}}); }

}  // namespace

TEST_CASE("product t-norm arithmetic") {
  CHECK(evalProb(halves(), is(0, 0) && is(1, 0)) == doctest::Approx(0.25).epsilon(1e-15));
  CHECK(evalProb(halves(), is(0, 0) || is(1, 0)) == doctest::Approx(0.75).epsilon(1e-15));
  CHECK(evalProb(halves(), !is(0, 0)) == 0.5);
}

TEST_CASE("evalProb matches the tree oracle") {
  Rng rng(21);
  for (int i = 0; i < 2000; ++i) {
    std::size_t v = 1 + rng.below(4), t = 1 + rng.below(4);
    Constraint e = oracle::randomFormula(rng, v, t, 6);
    ProbabilityMatrix p = oracle::randomInterior(rng, v, t);
    double got = evalProb(p, e);
    REQUIRE(got == doctest::Approx(oracle::prob(p.values(), e)).epsilon(1e-12));
    REQUIRE(got >= 0.0);
    REQUIRE(got <= 1.0);
  }
}

TEST_CASE("binary matrices give exactly 0 or 1") {
  Rng rng(22);
  for (int i = 0; i < 300; ++i) {
    Constraint e = oracle::randomFormula(rng, 2, 3, 4);
    for (const auto& env : enumerateEnvironments(2, 3)) {
      double x = evalProb(toBinaryMatrix(env), e);
      REQUIRE((x == 0.0 || x == 1.0));
      REQUIRE((x == 1.0) == satisfies(env, e));
    }
  }
}

TEST_CASE("dimension mismatch") {
  CHECK_THROWS_AS(evalProb(halves(), is(2, 0)), DimensionMismatch);
  CHECK_THROWS_AS(evalProb(halves(), is(0, 2)), DimensionMismatch);
  CHECK_THROWS_AS(evalLog(LogProbMatrix::fromProbabilities(halves()), is(0, 5)), DimensionMismatch);
}

TEST_CASE("duality examples") {
  ProbabilityMatrix uniform(Matrix{{0.5, 0.5}});
  auto [a, b] = checkDuality(uniform, is(0, 0), is(0, 0));
  CHECK(a == doctest::Approx(0.75));
  CHECK(b == doctest::Approx(0.75));

  ProbabilityMatrix hot = toBinaryMatrix(TypeEnvironment({1, 0}, 2));
  auto [c, d] = checkDuality(hot, is(0, 1), is(1, 1));
  CHECK(c == d);
  CHECK((c == 0.0 || c == 1.0));

  Rng rng(23);
  for (int i = 0; i < 1000; ++i) {
    ProbabilityMatrix p = oracle::randomInterior(rng, 3, 3);
    Constraint e1 = oracle::randomFormula(rng, 3, 3, 3), e2 = oracle::randomFormula(rng, 3, 3, 3);
    auto [x, y] = checkDuality(p, e1, e2);
    REQUIRE(std::abs(x - y) < 1e-12);
    auto [u, w] = checkDualityOr(p, e1, e2);
    REQUIRE(std::abs(u - w) < 1e-12);
  }
}

TEST_CASE("log1mexp and logAddExp") {
  for (double x : {-1e-12, -1e-5, -0.3, -std::log(2.0), -1.0, -20.0, -700.0}) {
    double want = std::log(1.0 - std::exp(x));
    if (x > -1e-3) want = std::log(-x) + std::log1p(x / 2);  // series: 1-e^x ~ -x(1 + x/2)
    CHECK(log1mexp(x) == doctest::Approx(want).epsilon(1e-9));
  }
  CHECK(log1mexp(0.0) == -std::numeric_limits<double>::infinity());
  const double ninf = -std::numeric_limits<double>::infinity();
  CHECK(logAddExp(ninf, ninf) == ninf);
  CHECK(logAddExp(ninf, -2.0) == -2.0);
  CHECK(logAddExp(std::log(0.25), std::log(0.5)) == doctest::Approx(std::log(0.75)).epsilon(1e-15));
}

TEST_CASE("log-space evaluator") {
  LogProbMatrix l = LogProbMatrix::fromProbabilities(halves());
  CHECK(evalLog(l, is(0, 0) && is(1, 0)) == doctest::Approx(std::log(0.25)).epsilon(1e-9));

  LogProbMatrix hot = LogProbMatrix::fromProbabilities(toBinaryMatrix(TypeEnvironment({0, 1}, 2)));
  CHECK(evalLog(hot, is(0, 0) && (is(1, 1) || is(1, 0))) == 0.0);
  CHECK(evalLog(hot, is(0, 1)) == -std::numeric_limits<double>::infinity());

  Rng rng(24);
  for (int i = 0; i < 1000; ++i) {
    ProbabilityMatrix p = oracle::randomInterior(rng, 3, 3, 4.0);
    Constraint e = oracle::randomFormula(rng, 3, 3, 5);
    double prob = evalProb(p, e);
    double lg = evalLog(LogProbMatrix::fromProbabilities(p), e);
    REQUIRE(!std::isnan(lg));
    if (prob > 1e-8) REQUIRE(std::abs(lg - std::log(prob)) < 1e-6);
  }
}

TEST_CASE("log matrices reject positive entries") {
  CHECK_THROWS_AS(LogProbMatrix(Matrix{{0.1, -3.0}}), DomainError);
  CHECK_THROWS_AS(LogProbMatrix(Matrix{{std::log(0.5), std::log(0.4)}}), DomainError);
  CHECK_THROWS_AS(ProbabilityMatrix(Matrix{{0.7, 0.7}}), DomainError);
  CHECK_THROWS_AS(ProbabilityMatrix(Matrix{{1.5, -0.5}}), DomainError);
}

TEST_CASE("shared subformulas are merged") {
  Constraint a = is(0, 0) || is(1, 0);
  Constraint e = (a && is(2, 1)) || (a && is(2, 2));
  ConstraintDag dag(e);
  // atoms x0t0, x1t0, x2t1, x2t2; or; two ands; root
  CHECK(dag.size() == 8);
  CHECK(dag.root() == dag.size() - 1);
}

TEST_CASE("DAG reverse mode matches finite differences") {
  Rng rng(25);
  for (int i = 0; i < 200; ++i) {
    std::size_t v = 1 + rng.below(3), t = 2 + rng.below(2);
    Constraint e = oracle::randomFormula(rng, v, t, 5);
    ProbabilityMatrix p = oracle::randomInterior(rng, v, t);
    ConstraintDag dag(e);
    dag.checkDimensions(v, t);

    std::vector<double> values;
    dag.forwardProb(p.values(), values);
    Matrix grad(v, t);
    dag.backwardProb(values, 1.0, grad);

    auto d = p.values().data();
    std::vector<double> x(d.begin(), d.end());
    auto f = [&](const std::vector<double>& z) {
      Matrix m(v, t);
      std::copy(z.begin(), z.end(), m.data().begin());
      return oracle::prob(m, e);
    };
    auto fd = oracle::centralDifference(f, x, 1e-6);
    auto g = grad.data();
    REQUIRE(oracle::maxRelativeError(std::vector<double>(g.begin(), g.end()), fd, 1e-6) < 1e-5);

    Matrix log_p(v, t), glog(v, t);
    for (std::size_t k = 0; k < x.size(); ++k) log_p.data()[k] = std::log(x[k]);
    dag.forwardLog(log_p, values);
    dag.backwardLog(values, 1.0, glog);
    auto flog = [&](const std::vector<double>& z) {
      Matrix m(v, t);
      for (std::size_t k = 0; k < z.size(); ++k) m.data()[k] = std::exp(z[k]);
      return std::log(oracle::prob(m, e));
    };
    std::vector<double> lx(log_p.data().begin(), log_p.data().end());
    if (oracle::prob(p.values(), e) < 1e-6) continue;
    auto fdl = oracle::centralDifference(flog, lx, 1e-6);
    auto gl = glog.data();
    REQUIRE(oracle::maxRelativeError(std::vector<double>(gl.begin(), gl.end()), fdl, 1e-5) < 1e-4);
  }
}
