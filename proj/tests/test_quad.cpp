#include <gtest/gtest.h>

#include <cmath>
#include <functional>
#include <numbers>
#include <random>

#include "hetnet/functionals.hpp"
#include "hetnet/pointproc.hpp"
#include "hetnet/quad.hpp"

using namespace hetnet;
constexpr double kPi = std::numbers::pi;

TEST(Quad, Polynomial) {
  const QuadResult r = integrate_1d([](double x) { return x * x; }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 1.0 / 3.0, 1e-14);
}

TEST(Quad, Sine) {
  const QuadResult r = integrate_1d([](double x) { return std::sin(x); }, 0.0, kPi);
  EXPECT_NEAR(r.value, 2.0, 1e-12);
}

TEST(Quad, MaternRadialMass) {
  const auto f = OffspringDensity::matern(1.0);
  const QuadResult r = integrate_1d([&](double r) { return 2.0 * kPi * r * f.radial(r); }, 0.0, 1.0);
  EXPECT_NEAR(r.value, 1.0, 1e-12);
}

TEST(Quad, GaussianRadialMass) {
  const QuadResult r = integrate_semi_infinite([](double r) { return 2.0 * kPi * r * std::exp(-kPi * r * r); }, 0.0);
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(Quad, GammaTwo) {
  const QuadResult r = integrate_semi_infinite([](double r) { return r * std::exp(-r); }, 0.0);
  EXPECT_NEAR(r.value, 1.0, 1e-9);
}

TEST(Quad, QuarticTail) {
  const QuadResult r = integrate_semi_infinite([](double r) { return 1.0 / (1.0 + r * r * r * r); }, 0.0);
  EXPECT_NEAR(r.value, 1.110721, 1e-6);
  EXPECT_NEAR(r.value, kPi / (2.0 * std::sqrt(2.0)), 1e-9);
}

TEST(Quad, EqualBoundsGiveZero) {
  const QuadResult r = integrate_1d([](double) { return 1.0; }, 2.0, 2.0);
  EXPECT_EQ(r.value, 0.0);
  EXPECT_EQ(r.error, 0.0);
}

TEST(Quad, RejectsReversedOrInfiniteBounds) {
  EXPECT_THROW(integrate_1d([](double) { return 1.0; }, 1.0, 0.0), Error);
  EXPECT_THROW(integrate_1d([](double) { return 1.0; }, 0.0, INFINITY), Error);
}

TEST(Quad, RejectsBadSpec) {
  QuadratureSpec s;
  s.rel_tol = 1e-13;
  EXPECT_THROW(integrate_1d([](double) { return 1.0; }, 0.0, 1.0, s), Error);
  s = {};
  s.max_subdivisions = 0;
  EXPECT_THROW(integrate_1d([](double) { return 1.0; }, 0.0, 1.0, s), Error);
}

TEST(Quad, BudgetExhaustedCarriesBestEstimate) {
  QuadratureSpec s;
  s.rel_tol = 1e-12;
  s.max_subdivisions = 3;
  try {
    integrate_1d([](double x) { return 1.0 / std::sqrt(x); }, 0.0, 1.0, s);
    FAIL() << "expected QuadratureError";
  } catch (const QuadratureError& e) {
    EXPECT_EQ(e.code(), ErrorCode::kQuadrature);
    EXPECT_GT(e.best().value, 1.0);
    EXPECT_LT(e.best().value, 2.0);
    EXPECT_GT(e.best().error, 0.0);
  }
}

TEST(Quad, BreakpointsHandleJump) {
  const double bp[] = {0.3};
  const QuadResult r = integrate_1d([](double x) { return x < 0.3 ? 1.0 : 2.0; }, 0.0, 1.0, {}, bp);
  EXPECT_NEAR(r.value, 0.3 + 1.4, 1e-13);
}

struct KnownIntegral {
  const char* name;
  std::function<double(double)> f;
  double a;
  double b;  // infinity: semi-infinite
  double exact;
};

TEST(Quad, ErrorEstimateBoundsTrueErrorOnSuite) {
  const double inf = std::numeric_limits<double>::infinity();
  const std::vector<KnownIntegral> suite = {
      {"x^2", [](double x) { return x * x; }, 0, 1, 1.0 / 3.0},
      {"sin", [](double x) { return std::sin(x); }, 0, kPi, 2.0},
      {"exp", [](double x) { return std::exp(x); }, 0, 1, std::exp(1.0) - 1.0},
      {"1/(1+x^2)", [](double x) { return 1.0 / (1.0 + x * x); }, 0, 1, kPi / 4.0},
      {"log", [](double x) { return std::log(x); }, 0, 1, -1.0},
      {"sqrt", [](double x) { return std::sqrt(x); }, 0, 1, 2.0 / 3.0},
      {"1/sqrt", [](double x) { return 1.0 / std::sqrt(x); }, 0, 1, 2.0},
      {"cos^2", [](double x) { return std::cos(x) * std::cos(x); }, 0, kPi, kPi / 2.0},
      {"x e^-x", [](double x) { return x * std::exp(-x); }, 0, inf, 1.0},
      {"e^-x^2", [](double x) { return std::exp(-x * x); }, 0, inf, std::sqrt(kPi) / 2.0},
      {"1/(1+x^4)", [](double x) { return 1.0 / (1.0 + x * x * x * x); }, 0, inf, kPi / (2.0 * std::sqrt(2.0))},
      {"1/(1+x^2)^2", [](double x) { return 1.0 / ((1.0 + x * x) * (1.0 + x * x)); }, 0, inf, kPi / 4.0},
      {"x^3 e^-x", [](double x) { return x * x * x * std::exp(-x); }, 0, inf, 6.0},
      {"1/x^2", [](double x) { return 1.0 / (x * x); }, 1, inf, 1.0},
      {"abs", [](double x) { return std::abs(x - 0.37); }, 0, 1, (0.37 * 0.37 + 0.63 * 0.63) / 2.0},
      {"x^9", [](double x) { return std::pow(x, 9); }, 0, 2, 102.4},
      {"sin^2(10x)", [](double x) { return std::sin(10 * x) * std::sin(10 * x); }, 0, kPi, kPi / 2.0},
      {"e^-3x", [](double x) { return std::exp(-3.0 * x); }, 0, inf, 1.0 / 3.0},
      {"2pi r e^-pi r^2", [](double r) { return 2.0 * kPi * r * std::exp(-kPi * r * r); }, 0, inf, 1.0},
      {"r/(1+r^2)^2.5", [](double r) { return r / std::pow(1.0 + r * r, 2.5); }, 0, inf, 1.0 / 3.0},
  };
  ASSERT_EQ(suite.size(), 20u);
  for (const auto& k : suite) {
    const QuadResult r = std::isinf(k.b) ? integrate_semi_infinite(k.f, k.a) : integrate_1d(k.f, k.a, k.b);
    EXPECT_GE(r.error, std::abs(r.value - k.exact)) << k.name;
    EXPECT_LE(std::abs(r.value - k.exact), 1e-6 * std::abs(k.exact)) << k.name;
  }
}

TEST(Quad, LogarithmicTailFailsLoudly) {
  // 1/(x(1 + log^2 x)) decays too slowly for the rational tail map; the mass
  // piles up against t = 1. The integrator must throw, not return a value.
  EXPECT_THROW(integrate_semi_infinite([](double x) { return 1.0 / (x * (1.0 + std::log(x) * std::log(x))); }, 1.0),
               QuadratureError);
}

TEST(Quad, Linearity) {
  auto f = [](double x) { return std::exp(-x) * std::cos(3 * x); };
  auto g = [](double x) { return 1.0 / (1.0 + x); };
  const double a = 2.5, b = -1.25;
  const QuadResult rf = integrate_1d(f, 0.0, 4.0);
  const QuadResult rg = integrate_1d(g, 0.0, 4.0);
  const QuadResult rh = integrate_1d([&](double x) { return a * f(x) + b * g(x); }, 0.0, 4.0);
  const double tol = std::abs(a) * rf.error + std::abs(b) * rg.error + rh.error + 1e-12;
  EXPECT_NEAR(rh.value, a * rf.value + b * rg.value, tol);
}

TEST(Quad, SemiInfiniteSplitInvariance) {
  auto f = [](double r) { return r / std::pow(1.0 + r * r, 2.5); };
  const QuadResult whole = integrate_semi_infinite(f, 0.0);
  for (double split : {0.1, 1.0, 7.0, 50.0}) {
    const QuadResult head = integrate_1d(f, 0.0, split);
    const QuadResult tail = integrate_semi_infinite(f, split);
    EXPECT_NEAR(head.value + tail.value, whole.value, 2.0 * 1e-6 * whole.value) << split;
  }
}

TEST(Quad, ScaledTailMatchesUnscaled) {
  auto f = [](double r) { return 2.0 * kPi * r * std::exp(-r * r / 1e6); };  // mass at r ~ 1000
  const QuadResult r1 = integrate_semi_infinite(f, 0.0, {}, 1000.0);
  EXPECT_NEAR(r1.value, kPi * 1e6, 1e-6 * kPi * 1e6);
}

TEST(Quad, NestedPropagatesInnerError) {
  auto inner = [](double y) -> QuadResult {
    return integrate_1d([y](double x) { return std::exp(-x * y); }, 0.0, 1.0);
  };
  const QuadResult r = integrate_1d(inner, 1.0, 2.0);
  // int_1^2 (1 - e^-y)/y dy = Ein(2) - Ein(1), to 25 digits
  const double exact = 0.52266375687248616;
  EXPECT_NEAR(r.value, exact, 1e-10);
  EXPECT_GT(r.error, 0.0);
}

TEST(Quad, NdUnitDiscArea) {
  const QuadResult r = integrate_nd<2>([](const std::array<double, 2>& p) { return p[0]; },
                                       {Bound{0.0, 1.0}, Bound{0.0, 2.0 * kPi}});
  EXPECT_NEAR(r.value, kPi, 1e-10);
}

TEST(Quad, NdThomasNormalization) {
  const auto f = OffspringDensity::thomas(2.5);
  const double inf = std::numeric_limits<double>::infinity();
  const QuadResult r = integrate_nd<2>([&](const std::array<double, 2>& p) { return f(Point{p[0], p[1]}); },
                                       {Bound{0.0, inf}, Bound{0.0, inf}});
  EXPECT_NEAR(4.0 * r.value, 1.0, 1e-6);  // one quadrant by symmetry
}

TEST(Quad, NdThreeDimensionalBox) {
  const QuadResult r = integrate_nd<3>(
      [](const std::array<double, 3>& p) { return p[0] * p[1] * p[2]; },
      {Bound{0.0, 1.0}, Bound{0.0, 2.0}, Bound{0.0, 3.0}});
  EXPECT_NEAR(r.value, 0.5 * 2.0 * 4.5, 1e-10);
}

TEST(Quad, ClusterInnerIntegralMatchesMonteCarlo) {
  // int (1 - v(r_x, |y|)) f(y - z) dy for a Matern cluster, against plain
  // Monte Carlo over offspring positions.
  const auto f = OffspringDensity::matern(7.0);
  const SirKernel v{2.5, 1.0, 3.0, 3.7};
  const double rx = 4.0, d = 9.0;
  const QuadResult j = cluster_complement(v, rx, f, d, {});
  const QuadResult j2 = integrate_nd<2>(
      [&](const std::array<double, 2>& p) {
        const Point y{p[0] * std::cos(p[1]), p[0] * std::sin(p[1])};
        return p[0] * v.complement(rx, y.norm()) * f(y - Point{d, 0.0});
      },
      {Bound{2.0, 16.0}, Bound{0.0, 2.0 * kPi}}, QuadratureSpec{1e-8});
  EXPECT_NEAR(j.value, j2.value, 1e-6);

  Engine rng(11);
  const int n = 1000000;
  double s = 0.0, s2 = 0.0;
  for (int i = 0; i < n; ++i) {
    const Point y = Point{d, 0.0} + f.sample_offset(rng);
    const double c = v.complement(rx, y.norm());
    s += c;
    s2 += c * c;
  }
  const double mean = s / n;
  const double se = std::sqrt((s2 / n - mean * mean) / n);
  EXPECT_NEAR(j.value, mean, 3.0 * se);
}
