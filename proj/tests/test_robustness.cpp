#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <random>
#include <sstream>
#include <thread>

#include "stlsmooth/robustness.hpp"
#include "support/oracle.hpp"
#include "support/random_formula.hpp"

using namespace stlsmooth;

namespace {

Formula lin(std::vector<double> c, double offset) { return Formula::pred(Predicate(std::move(c), offset)); }
Signal column(std::vector<double> v) {
  std::vector<std::vector<double>> rows;
  for (double x : v) rows.push_back({x});
  return Signal::from_rows(rows);
}

}  // namespace

TEST(Signal, Validation) {
  EXPECT_THROW(Signal(RowMatrix(0, 2)), std::invalid_argument);
  EXPECT_THROW(Signal::from_rows({{1.0, 2.0}, {3.0}}), std::invalid_argument);
  EXPECT_THROW(Signal::from_rows({{NAN}}), std::invalid_argument);
  const Signal y = Signal::from_rows({{1, 2}, {3, 4}, {5, 6}});
  EXPECT_EQ(y.length(), 3u);
  EXPECT_EQ(y.last_step(), 2u);
  EXPECT_EQ(y.dim(), 2u);
  EXPECT_EQ(y(2, 1), 6.0);
}

TEST(Signal, CsvRoundTripIsExact) {
  std::mt19937_64 rng(1);
  const Signal y = gen::random_signal(rng, 7, 3);
  const auto path = (std::filesystem::temp_directory_path() / "stlsmooth_signal_rt.csv").string();
  write_signal_csv(path, y);
  EXPECT_EQ(read_signal_csv(path), y);
  std::filesystem::remove(path);
}

TEST(Signal, CsvErrorsNameTheProblem) {
  auto read = [](const std::string& text) {
    std::istringstream in(text);
    return read_matrix_csv(in, "y");
  };
  EXPECT_NO_THROW(read("t,y0\n0,1\n1,2\n"));
  EXPECT_THROW(read("t,x0\n0,1\n"), std::runtime_error);
  EXPECT_THROW(read("t,y0\n0,abc\n"), std::runtime_error);
  EXPECT_THROW(read("t,y0\n1,1\n"), std::runtime_error);
  EXPECT_THROW(read("t,y0,y1\n0,1\n"), std::runtime_error);
  EXPECT_THROW(read("t,y0\n"), std::runtime_error);
}

TEST(Eval, ExactExamples) {
  const auto pos = lin({1}, 0);
  EXPECT_DOUBLE_EQ(eval(Formula::always({0, 2}, pos), column({1, 2, 0.5}), 0, SemanticsConfig::exact()), 0.5);
  EXPECT_DOUBLE_EQ(eval(Formula::eventually({0, 2}, lin({1}, 1)), column({0, 2, 0}), 0, SemanticsConfig::exact()),
                   1.0);
}

TEST(Eval, SmoothTiedCaseUnderApproximates) {
  const Formula phi = Formula::always({0, 1}, lin({1}, 0));
  const Signal y = column({0, 0});
  EXPECT_NEAR(eval(phi, y, 0, SemanticsConfig::ef(1, 1)), -std::log(2.0), 1e-15);
  EXPECT_EQ(eval(phi, y, 0, SemanticsConfig::exact()), 0.0);
}

TEST(Eval, UntilMatchesBruteForceRecursion) {
  // (y0 >= 0) U[0,2] (y0 - 1 >= 0) on y = 2, 0.5, 3.
  const Formula phi = Formula::until({0, 2}, lin({1}, 0), lin({1}, 1));
  const Signal y = column({2, 0.5, 3});
  const double v = eval(phi, y, 0, SemanticsConfig::exact());
  EXPECT_DOUBLE_EQ(v, oracle::exact(phi, y, 0));
  if (!kClassicUntil) {
    // t'=0: min(2, 1) = 1; t'=1: min(0.5, min(1,-0.5)) = -0.5; t'=2: min(3, -0.5) = -0.5.
    EXPECT_DOUBLE_EQ(v, 1.0);
  }
}

TEST(Eval, EvaluatesAtLaterTimes) {
  const Formula phi = Formula::eventually({1, 2}, lin({1}, 0));
  const Signal y = column({5, -1, -2, 4, -3});
  EXPECT_DOUBLE_EQ(eval(phi, y, 0, SemanticsConfig::exact()), -1.0);
  EXPECT_DOUBLE_EQ(eval(phi, y, 2, SemanticsConfig::exact()), 4.0);
  EXPECT_THROW(eval(phi, y, 3, SemanticsConfig::exact()), std::invalid_argument);
}

TEST(Eval, Errors) {
  const Formula g = Formula::always({0, 3}, lin({1}, 0));
  EXPECT_THROW(eval(g, column({1, 2}), 0, SemanticsConfig::exact()), std::invalid_argument);
  const Formula not_nnf = Formula::negate(g);
  EXPECT_NO_THROW(eval(not_nnf, column({1, 2, 3, 4}), 0, SemanticsConfig::exact()));
  EXPECT_THROW(eval(not_nnf, column({1, 2, 3, 4}), 0, SemanticsConfig::ef(1, 1)), std::invalid_argument);
  EXPECT_THROW(eval(lin({1, 1}, 0), column({1}), 0, SemanticsConfig::exact()), std::invalid_argument);
  EXPECT_THROW(eval(g, column({1, 2, 3, 4}), 0, SemanticsConfig::agm()), NotImplementedError);
  EXPECT_THROW(eval(g, column({1, 2, 3, 4}), 0, SemanticsConfig::ef(0, 1)), std::invalid_argument);
  EXPECT_THROW(eval(g, column({1, 2, 3, 4}), 0, SemanticsConfig::ef(1, -1)), std::invalid_argument);
  EXPECT_THROW(eval(g, column({1, 2, 3, 4}), 0, SemanticsConfig::lse(0)), std::invalid_argument);
}

TEST(Eval, ZeroWidthIntervalReducesToChild) {
  const Formula phi = Formula::always({2, 2}, lin({1}, 0));
  const Signal y = column({1, 2, -3});
  for (auto cfg : {SemanticsConfig::exact(), SemanticsConfig::ef(1, 1), SemanticsConfig::lse(1)}) {
    EXPECT_DOUBLE_EQ(eval(phi, y, 0, cfg), -3.0);
  }
}

TEST(Eval, NonlinearPredicate) {
  auto np = std::make_shared<NonlinearPredicate>();
  np->label = "unit disk";
  np->value = [](std::span<const double> y) { return 1.0 - y[0] * y[0] - y[1] * y[1]; };
  np->gradient = [](std::span<const double> y, std::span<double> g) {
    g[0] = -2 * y[0];
    g[1] = -2 * y[1];
  };
  const Formula phi = Formula::eventually({0, 1}, Formula::pred(Predicate(np)));
  const Signal y = Signal::from_rows({{1, 1}, {0.5, 0}});
  EXPECT_DOUBLE_EQ(eval(phi, y, 0, SemanticsConfig::exact()), 0.75);
}

TEST(Eval, OpCounterCountsScalarArguments) {
  const Formula g = Formula::always({0, 7}, lin({1}, 0));
  const Signal y = column(std::vector<double>(8, 1.0));
  OpCounter c;
  eval(g, y, 0, SemanticsConfig::ef(1, 1), &c);
  EXPECT_EQ(c.calls, 1u);
  EXPECT_EQ(c.scalar_args, 8u);
}

TEST(Eval, NaryExactAndEqualsBinaryFold) {
  std::mt19937_64 rng(8);
  const auto a = lin({1, 0}, 0.1), b = lin({0, 1}, -0.3), c = lin({1, 1}, 0.2);
  const Formula flat = Formula::conj({a, b, c});
  // Binary nesting is not representable through the flattening factory, so
  // fold the exact values by hand.
  for (int i = 0; i < 50; ++i) {
    const Signal y = gen::random_signal(rng, 1, 2);
    const double fold = std::min(std::min(eval(a, y, 0, SemanticsConfig::exact()), eval(b, y, 0, SemanticsConfig::exact())),
                                 eval(c, y, 0, SemanticsConfig::exact()));
    EXPECT_EQ(eval(flat, y, 0, SemanticsConfig::exact()), fold);
  }
}

// Cross-checks against the reference recursion, plus soundness.

TEST(EvalProperties, ExactMatchesOracle) {
  std::mt19937_64 rng(21);
  gen::Options o;
  o.nnf = false;
  for (int i = 0; i < 400; ++i) {
    const Formula phi = gen::random_formula(rng, o);
    const std::size_t h = horizon(phi);
    const Signal y = gen::random_signal(rng, h + 3, o.p);
    for (std::size_t t = 0; t <= 2; ++t) {
      EXPECT_NEAR(eval(phi, y, t, SemanticsConfig::exact()), oracle::exact(phi, y, t), 1e-12) << to_string(phi);
    }
  }
}

TEST(EvalProperties, SmoothMatchesOracle) {
  std::mt19937_64 rng(22);
  for (int i = 0; i < 300; ++i) {
    const Formula phi = gen::random_formula(rng);
    const Signal y = gen::random_signal(rng, horizon(phi) + 1, 2);
    for (auto cfg : {SemanticsConfig::ef(0.5, 2.0), SemanticsConfig::ef(3.0, 0.0), SemanticsConfig::lse(1.5)}) {
      EXPECT_NEAR(eval(phi, y, 0, cfg), oracle::smooth(phi, y, 0, cfg), 1e-9) << to_string(phi);
    }
  }
}

TEST(EvalProperties, EfIsSoundAndLseUpperBoundsMaxOnlyFormulas) {
  std::mt19937_64 rng(23);
  for (int i = 0; i < 300; ++i) {
    const Formula phi = gen::random_formula(rng);
    const Signal y = gen::random_signal(rng, horizon(phi) + 1, 2);
    const double exact = eval(phi, y, 0, SemanticsConfig::exact());
    for (double k : {0.5, 2.0, 10.0}) {
      const double ef = eval(phi, y, 0, SemanticsConfig::ef(k, k));
      EXPECT_LE(ef, exact + 1e-9);
      if (ef > 0) EXPECT_GT(exact, 0.0);
    }
  }
  // Disjunctions and eventualities only: LSE can only overshoot.
  const Formula f = Formula::eventually({0, 3}, Formula::disj({lin({1, 0}, 0), lin({0, 1}, 0)}));
  for (int i = 0; i < 100; ++i) {
    const Signal y = gen::random_signal(rng, 4, 2);
    EXPECT_GE(eval(f, y, 0, SemanticsConfig::lse(2.0)), eval(f, y, 0, SemanticsConfig::exact()) - 1e-12);
  }
}

TEST(EvalProperties, ConcurrentEvaluationIsSafe) {
  std::mt19937_64 rng(24);
  std::vector<Formula> phis;
  std::vector<Signal> ys;
  for (int i = 0; i < 40; ++i) {
    phis.push_back(gen::random_formula(rng));
    ys.push_back(gen::random_signal(rng, horizon(phis.back()) + 1, 2));
  }
  std::vector<double> serial(phis.size()), parallel(phis.size());
  for (std::size_t i = 0; i < phis.size(); ++i) serial[i] = eval(phis[i], ys[i], 0, SemanticsConfig::ef(2, 2));
  {
    std::vector<std::jthread> pool;
    for (std::size_t w = 0; w < 4; ++w) {
      pool.emplace_back([&, w] {
        for (std::size_t i = w; i < phis.size(); i += 4) parallel[i] = eval(phis[i], ys[i], 0, SemanticsConfig::ef(2, 2));
      });
    }
  }
  EXPECT_EQ(serial, parallel);
}
