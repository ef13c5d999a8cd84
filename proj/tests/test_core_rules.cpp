#include <blockaxioms/blockaxioms.hpp>
#include <gtest/gtest.h>

#include <random>

using namespace blockaxioms;

namespace {

Rational R(std::int64_t n, std::int64_t d = 1) { return Rational(n, d); }

std::vector<Rational> exact(const Allocation& x) {
  std::vector<Rational> out;
  for (const auto& v : x) out.push_back(v.exact());
  return out;
}

}  // namespace

TEST(Configuration, RejectsEmptyAndNonPositive) {
  EXPECT_THROW(Configuration(std::vector<HashRate>{}), std::invalid_argument);
  EXPECT_THROW(Configuration({2, 0}), std::invalid_argument);
  EXPECT_THROW(parse_configuration("3,-1"), std::invalid_argument);
  EXPECT_THROW(parse_configuration("3,x"), std::invalid_argument);
}

TEST(Configuration, TotalsAndParsing) {
  auto h = parse_configuration("5,3,2");
  EXPECT_EQ(h.total(), 10);
  EXPECT_EQ(h.size(), 3u);
  EXPECT_EQ(h.to_string(), "(5,3,2)");
  Configuration big({1'000'000'000, 1});
  EXPECT_EQ(big.total(), 1'000'000'001);
}

TEST(Rules, KnownValues) {
  EXPECT_EQ(exact(AllocationRule::proportional().evaluate(Configuration({2, 1, 1}))),
            (std::vector<Rational>{R(1, 2), R(1, 4), R(1, 4)}));
  EXPECT_EQ(exact(AllocationRule::all_zero().evaluate(Configuration({7}))), (std::vector<Rational>{R(0)}));
  EXPECT_EQ(exact(AllocationRule::half_threshold().evaluate(Configuration({3, 1}))),
            (std::vector<Rational>{R(3, 4), R(0)}));
  EXPECT_EQ(exact(AllocationRule::squares().evaluate(Configuration({2, 1}))), (std::vector<Rational>{R(4, 5), R(1, 5)}));
}

TEST(Rules, HalfThresholdTieStaysProportional) {
  EXPECT_EQ(exact(AllocationRule::half_threshold().evaluate(Configuration({2, 1, 1}))),
            (std::vector<Rational>{R(1, 2), R(1, 4), R(1, 4)}));
  EXPECT_EQ(exact(AllocationRule::half_threshold().evaluate(Configuration({1, 1}))), (std::vector<Rational>{R(1, 2), R(1, 2)}));
}

TEST(Rules, SquareRootsAreInexact) {
  auto x = AllocationRule::square_roots().evaluate(Configuration({4, 1}));
  EXPECT_FALSE(x.is_exact());
  EXPECT_NEAR(x[0].value(), 2.0 / 3.0, 1e-15);
}

TEST(Rules, GeneralizedProportional) {
  auto rule = parse_rule("genprop:const:0.5");
  EXPECT_EQ(rule.name(), "genprop:const:1/2");
  EXPECT_EQ(exact(rule.evaluate(Configuration({3, 1}))), (std::vector<Rational>{R(3, 8), R(1, 8)}));
  auto step = parse_rule("genprop:step:4:1/2:1");
  EXPECT_EQ(exact(step.evaluate(Configuration({2, 1}))), (std::vector<Rational>{R(1, 3), R(1, 6)}));
  EXPECT_EQ(exact(step.evaluate(Configuration({2, 2}))), (std::vector<Rational>{R(1, 2), R(1, 2)}));
}

TEST(Rules, UndefinedScalingIsDomainError) {
  auto rule = parse_rule("genprop:table:1=0,2=1/2");
  EXPECT_NO_THROW(rule.evaluate(Configuration({1, 1})));
  EXPECT_FALSE(rule.defined_at(Configuration({2, 1})));
  EXPECT_THROW(rule.evaluate(Configuration({2, 1})), std::domain_error);
}

TEST(Rules, ScalingMustBeNondecreasingAndInUnitInterval) {
  EXPECT_THROW(parse_scaling("table:1=1/2,2=1/3"), std::invalid_argument);
  EXPECT_THROW(parse_scaling("const:3/2"), std::invalid_argument);
  EXPECT_THROW(parse_scaling("step:2:1:1/2"), std::invalid_argument);
  EXPECT_THROW(parse_rule("nonsense"), std::invalid_argument);
}

TEST(Rules, RampScaling) {
  auto c = parse_scaling("ramp:4");
  EXPECT_EQ(c(2), R(1, 2));
  EXPECT_EQ(c(9), R(1));
}

TEST(Rules, LengthNonNegativityAndProportionalBudget) {
  for (const auto& entry : catalog())
    for (const auto& h : Universe{4, 8}.enumerate()) {
      auto x = entry.rule.evaluate(h);
      ASSERT_EQ(x.size(), h.size());
      for (const auto& v : x) ASSERT_GE(v.value(), 0.0);
    }
  for (const auto& h : Universe{4, 8}.enumerate()) EXPECT_EQ(AllocationRule::proportional().evaluate(h).sum().exact(), R(1));
}

TEST(Rules, ProportionalScaleInvariance) {
  for (const auto& h : Universe{3, 6}.enumerate())
    for (HashRate k = 1; k <= 5; ++k)
      EXPECT_EQ(exact(AllocationRule::proportional().evaluate(h.scaled(k))), exact(AllocationRule::proportional().evaluate(h)));
}

TEST(DrawReward, WinnerTakeAll) {
  auto rule = AllocationRule::proportional();
  for (std::uint64_t seed = 0; seed < 50; ++seed) {
    auto r = draw_reward(rule, Configuration({1, 1}), seed);
    EXPECT_TRUE((r == std::vector<double>{1, 0}) || (r == std::vector<double>{0, 1}));
    EXPECT_EQ(r, draw_reward(rule, Configuration({1, 1}), seed));
  }
}

TEST(DrawReward, DeterministicPaysAllocation) {
  auto rule = AllocationRule::proportional(Semantics::Deterministic);
  EXPECT_EQ(draw_reward(rule, Configuration({1, 1}), 123), (std::vector<double>{0.5, 0.5}));
}

TEST(DrawReward, OverfullLotteryRejected) {
  auto bad = AllocationRule::custom("overpay", [](const Configuration& h) {
    return Allocation(std::vector<Scalar>(h.size(), Scalar(1)));
  });
  EXPECT_THROW(draw_reward(bad, Configuration({1, 1}), 0), InvalidLottery);
}

TEST(DrawReward, MonteCarloMeanMatchesEvaluate) {
  const auto rule = AllocationRule::proportional();
  const Configuration h({3, 1});
  const int N = 100000;
  std::vector<double> mean(2, 0.0);
  for (int s = 0; s < N; ++s) {
    auto r = draw_reward(rule, h, static_cast<std::uint64_t>(s) * 7919 + 1);
    mean[0] += r[0] / N;
    mean[1] += r[1] / N;
  }
  EXPECT_NEAR(mean[0], 0.75, 0.01);
  EXPECT_NEAR(mean[1], 0.25, 0.01);
  const double bound = 3 * std::sqrt(0.75 * 0.25 / N);
  EXPECT_NEAR(mean[0], 0.75, bound);
}

TEST(DrawReward, NobodyPaidWithResidualProbability) {
  auto rule = parse_rule("genprop:const:1/2");
  int nobody = 0;
  const int N = 20000;
  for (int s = 0; s < N; ++s) {
    auto r = draw_reward(rule, Configuration({1, 1}), static_cast<std::uint64_t>(s));
    if (r[0] == 0 && r[1] == 0) ++nobody;
  }
  EXPECT_NEAR(nobody / double(N), 0.5, 3 * std::sqrt(0.25 / N));
}

TEST(Catalog, Claims) {
  auto cat = catalog();
  ASSERT_EQ(cat.size(), 7u);
  auto find = [&](const std::string& label) {
    for (const auto& e : cat)
      if (e.label == label) return e;
    throw std::runtime_error("missing " + label);
  };
  EXPECT_FALSE(find("ProportionalToSquares").claims.at(Axiom::A4c));
  for (Axiom a : {Axiom::A1, Axiom::A2a, Axiom::A3, Axiom::A4a}) EXPECT_TRUE(find("Proportional").claims.at(a));
  EXPECT_TRUE(find("HalfThreshold").claims.at(Axiom::A4c));
  EXPECT_FALSE(find("HalfThreshold").claims.at(Axiom::A4b));
  EXPECT_FALSE(find("ProportionalToSquareRoots").claims.at(Axiom::A3));
}

TEST(Catalog, ImpliedClaimsClosure) {
  auto closed = implied_claims({{Axiom::A2a, true}, {Axiom::A4a, true}});
  EXPECT_TRUE(closed.at(Axiom::A2b));
  EXPECT_TRUE(closed.at(Axiom::A4b));
  EXPECT_TRUE(closed.at(Axiom::A4c));
  auto failing = implied_claims({{Axiom::A4c, false}});
  EXPECT_FALSE(failing.at(Axiom::A4b));
  EXPECT_FALSE(failing.at(Axiom::A4a));
}

TEST(Scalar, RationalParsingAndFormatting) {
  EXPECT_EQ(parse_rational("0.5"), R(1, 2));
  EXPECT_EQ(parse_rational("3/6"), R(1, 2));
  EXPECT_EQ(parse_rational("-1.25"), R(-5, 4));
  EXPECT_EQ(format_rational(R(6, 4)), "3/2");
  EXPECT_THROW(parse_rational("1/0"), std::invalid_argument);
  EXPECT_THROW(parse_rational("abc"), std::invalid_argument);
}

TEST(Scalar, StrictComparisonTolerance) {
  EXPECT_EQ(compare(Scalar::inexact(0.5 + 1e-12), Scalar(R(1, 2))), 0);
  EXPECT_GT(compare(Scalar::inexact(0.5 + 1e-8), Scalar(R(1, 2))), 0);
  EXPECT_GT(compare(Scalar(R(1, 2) + R(1, 1'000'000'000'000)), Scalar(R(1, 2))), 0);
}

TEST(RuleTable, SymmetricByConstruction) {
  RuleTable t(Universe{2, 2}, 2);
  t.set(Configuration({1}), {2});
  EXPECT_THROW(t.set(Configuration({1, 1}), {2, 0}), std::invalid_argument);
  EXPECT_THROW(t.set(Configuration({1, 2}), {1, 1}), std::invalid_argument);
  t.set(Configuration({1, 1}), {1, 1});
  EXPECT_TRUE(t.defines(Configuration({1, 1})));
  EXPECT_FALSE(t.defines(Configuration({2})));
}
