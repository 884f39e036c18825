#include <gtest/gtest.h>

#include <cmath>
#include <limits>
#include <numbers>

#include "hetnet/simcov.hpp"

using namespace hetnet;
constexpr double kPi = std::numbers::pi;

namespace {

Scenario single_tier(double beta = 2.0, double lambda = 1e-4) {
  Scenario s;
  s.tiers = {{1, PppProcess{lambda}, 1.0, beta}};
  return s;
}

/// Realization with explicit points on tier 1 only.
TypicalUserRealization fixed_points(std::vector<Point> pts) {
  TypicalUserRealization r;
  r.tiers.push_back(PointSet{std::move(pts), {}});
  return r;
}

Fading unit_fading(const TypicalUserRealization& r) {
  Fading f;
  for (const PointSet& ps : r.tiers) f.tiers.emplace_back(ps.size(), 1.0);
  f.phi0.assign(r.phi0.size(), 1.0);
  return f;
}

// Single-tier max-SIR coverage for beta > 1 and alpha = 4: 1 / (C(4) sqrt(beta)).
double single_tier_closed_form(double beta) { return 2.0 / (kPi * std::sqrt(beta)); }

}  // namespace

TEST(SirAt, LoneBsHasInfiniteSir) {
  const Scenario s = single_tier();
  const auto r = fixed_points({{3.0, 4.0}});
  EXPECT_TRUE(std::isinf(sir_at(r, s, {1, 0}, unit_fading(r))));
  EXPECT_TRUE(is_covered(r, s, unit_fading(r)));
}

TEST(SirAt, SymmetricPairHasUnitSir) {
  const Scenario s = single_tier();
  const auto r = fixed_points({{10.0, 0.0}, {0.0, -10.0}});
  EXPECT_DOUBLE_EQ(sir_at(r, s, {1, 0}, unit_fading(r)), 1.0);
  EXPECT_FALSE(is_covered(r, s, unit_fading(r)));  // 1 > 2 fails
}

TEST(SirAt, HandComputedExample) {
  // Serving at distance 1, interferer at 2, alpha = 4: SIR = 2^4 = 16.
  const Scenario s = single_tier(16.0);
  const auto r = fixed_points({{1.0, 0.0}, {-2.0, 0.0}});
  EXPECT_DOUBLE_EQ(sir_at(r, s, {1, 0}, unit_fading(r)), 16.0);
  // Coverage is strict: SIR == beta is not covered.
  EXPECT_FALSE(is_covered(r, s, unit_fading(r)));
  const Scenario looser = single_tier(15.99);
  EXPECT_TRUE(is_covered(r, looser, unit_fading(r)));
}

TEST(SirAt, FadingAndPowerEnterLinearly) {
  Scenario s;
  s.tiers = {{1, PppProcess{1e-5}, 10.0, 2.0}, {2, PppProcess{1e-4}, 1.0, 2.0}};
  TypicalUserRealization r;
  r.tiers = {PointSet{{{2.0, 0.0}}, {}}, PointSet{{{0.0, 1.0}}, {}}};
  Fading f = unit_fading(r);
  f.tiers[0][0] = 0.5;
  f.tiers[1][0] = 3.0;
  // tier 1: 10 * 0.5 / 16 ; tier 2: 1 * 3 / 1
  EXPECT_DOUBLE_EQ(sir_at(r, s, {1, 0}, f), (5.0 / 16.0) / 3.0);
  EXPECT_DOUBLE_EQ(sir_at(r, s, {2, 0}, f), 3.0 / (5.0 / 16.0));
  EXPECT_DOUBLE_EQ(sir_at(r, s, {2, 0}, f, 1.0), 3.0 / (5.0 / 16.0 + 1.0));
}

TEST(SirAt, Phi0ServesAndInterferes) {
  Scenario s = preset(2);
  TypicalUserRealization r;
  r.tiers = {PointSet{}, PointSet{{{0.0, 4.0}}, {}}};
  r.phi0 = PointSet{{{2.0, 0.0}}, {{2.0, 0.0}}};
  r.z0 = Point{2.0, 0.0};
  const Fading f = unit_fading(r);
  EXPECT_DOUBLE_EQ(sir_at(r, s, {0, 0}, f), 16.0);
  EXPECT_DOUBLE_EQ(sir_at(r, s, {2, 0}, f), 1.0 / 16.0);
  EXPECT_TRUE(is_covered(r, s, f));
}

TEST(SirAt, DegenerateAndBadReferences) {
  const Scenario s = single_tier();
  const auto r = fixed_points({{0.0, 0.0}, {1.0, 0.0}});
  EXPECT_THROW(sir_at(r, s, {1, 0}, unit_fading(r)), Error);
  try {
    is_covered(r, s, unit_fading(r));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::kDegenerateGeometry);
  }
  EXPECT_THROW(sir_at(r, s, {1, 5}, unit_fading(r)), Error);
  EXPECT_THROW(sir_at(r, s, {9, 0}, unit_fading(r)), Error);
}

TEST(IsCovered, EmptyNetworkIsNotCovered) {
  const Scenario s = single_tier();
  const auto r = fixed_points({});
  EXPECT_FALSE(is_covered(r, s, unit_fading(r)));
}

TEST(IsCovered, VanishingThresholdAlwaysCovers) {
  const Scenario s = single_tier(1e-12);
  Engine rng(5);
  for (int t = 0; t < 200; ++t) {
    const auto r = realize(s, 300.0, rng);
    if (r.tiers[0].empty()) continue;
    EXPECT_TRUE(is_covered(r, s, rng));
  }
}

TEST(IsCovered, DrawnFadingMatchesInlineFading) {
  const Scenario s = preset(3);
  for (int t = 0; t < 200; ++t) {
    Engine a = substream(9, t);
    const auto r = realize(s, 500.0, a);
    Engine b = a;
    const Fading f = draw_fading(r, a);
    EXPECT_EQ(is_covered(r, s, f), is_covered(r, s, b));
  }
}

TEST(EstimateCoverage, RejectsZeroTrials) {
  SimulationOptions o;
  o.trials = 0;
  EXPECT_THROW(estimate_coverage(single_tier(), o), Error);
}

TEST(EstimateCoverage, SingleTierMatchesClosedForm) {
  const Scenario s = single_tier(2.0);
  SimulationOptions o;
  o.trials = 40000;
  o.seed = 12;
  o.workers = 4;
  const CoverageEstimate e = estimate_coverage(s, o);
  EXPECT_NEAR(single_tier_closed_form(2.0), 0.45016, 5e-6);
  EXPECT_NEAR(e.p_hat, single_tier_closed_form(2.0), 3.0 * e.std_error);
  EXPECT_NEAR(e.ci_hi - e.ci_lo, 2.0 * 1.96 * e.std_error, 1e-15);
}

TEST(EstimateCoverage, WorkerCountDoesNotChangeResult) {
  const Scenario s = preset(4);
  SimulationOptions o;
  o.trials = 3000;
  o.seed = 77;
  o.window_radius = 3000.0;
  o.workers = 1;
  const CoverageEstimate one = estimate_coverage(s, o);
  o.workers = 5;
  const CoverageEstimate five = estimate_coverage(s, o);
  EXPECT_EQ(one.covered, five.covered);
  o.seed = 78;
  EXPECT_NE(estimate_coverage(s, o).covered, one.covered);
}

TEST(EstimateCoverage, MonotoneInThreshold) {
  // Same seed means common random numbers; coverage can only drop.
  const Scenario base = preset(1);
  SimulationOptions o;
  o.trials = 4000;
  o.seed = 3;
  o.window_radius = 3000.0;
  std::uint64_t prev = o.trials + 1;
  for (double beta : {0.5, 1.0, 2.0, 4.0, 8.0}) {
    Scenario s = base;
    for (auto& t : s.tiers) t.threshold = beta;
    const auto e = estimate_coverage(s, o);
    EXPECT_LE(e.covered, prev) << beta;
    prev = e.covered;
  }
}

TEST(EstimateCoverage, InvariantToCommonPowerScale) {
  Scenario s = preset(3);
  SimulationOptions o;
  o.trials = 2000;
  o.seed = 4;
  o.window_radius = 3000.0;
  const auto e1 = estimate_coverage(s, o);
  for (auto& t : s.tiers) t.power *= 37.0;
  const auto e2 = estimate_coverage(s, o);
  EXPECT_NEAR(e1.p_hat, e2.p_hat, 2.0 / o.trials);  // floating-point ties only
}

TEST(EstimateCoverage, InvariantToDistanceScaling) {
  // Scaling lengths by c and densities by 1/c^2 leaves the SIR law unchanged.
  // With c a power of two and the same seed, every trial maps onto itself up
  // to rounding in the far-field term.
  const double c = 1024.0;
  PresetParams p;
  PresetParams q = p;
  q.lambda_m /= c * c;
  q.lambda_s /= c * c;
  q.r_d *= c;
  SimulationOptions o;
  o.trials = 4000;
  o.seed = 21;
  o.window_radius = 3000.0;
  const auto a = estimate_coverage(preset(3, p), o);
  o.window_radius *= c;
  const auto b = estimate_coverage(preset(3, q), o);
  EXPECT_LE(std::abs(static_cast<double>(a.covered) - static_cast<double>(b.covered)), 2.0);
}

TEST(EstimateCoverage, StandardErrorScalesAsInverseRoot) {
  const Scenario s = single_tier();
  SimulationOptions o;
  o.window_radius = 300.0;
  o.trials = 1000;
  const double se1 = estimate_coverage(s, o).std_error;
  o.trials = 16000;
  const double se16 = estimate_coverage(s, o).std_error;
  EXPECT_NEAR(se1 / se16, 4.0, 0.4);
}

TEST(EstimateCoverage, FastPathMatchesRealizePath) {
  // The production trial loop skips materializing points; check that it has
  // the law of is_covered(realize(...)).
  const Scenario s = preset(3);
  const double window = 2000.0;
  const int n = 20000;
  std::uint64_t slow = 0;
  for (int t = 0; t < n; ++t) {
    Engine rng = substream(100, t);
    const auto r = realize(s, window, rng);
    if (is_covered(r, s, rng)) ++slow;
  }
  SimulationOptions o;
  o.trials = n;
  o.seed = 101;
  o.window_radius = window;
  o.far_field_correction = false;
  const auto fast = estimate_coverage(s, o);
  const double ps = static_cast<double>(slow) / n;
  const double se = std::sqrt(ps * (1 - ps) / n + fast.std_error * fast.std_error);
  EXPECT_LT(std::abs(ps - fast.p_hat), 3.0 * se);
}

TEST(EstimateCoverage, FarFieldCorrectionShrinksWindowBias) {
  // With a small window the missing interference inflates coverage; the
  // mean-field term removes most of that bias.
  const Scenario s = single_tier(2.0);
  SimulationOptions o;
  o.trials = 40000;
  o.seed = 8;
  o.window_radius = 1.5 / std::sqrt(kPi * 1e-4);
  o.far_field_correction = false;
  const double raw = estimate_coverage(s, o).p_hat;
  o.far_field_correction = true;
  const double corrected = estimate_coverage(s, o).p_hat;
  const double truth = single_tier_closed_form(2.0);
  EXPECT_LT(std::abs(corrected - truth), std::abs(raw - truth));
}
