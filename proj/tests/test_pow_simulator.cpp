#include <blockaxioms/blockaxioms.hpp>
#include <gtest/gtest.h>

#include "oracles.hpp"

#include <sstream>

using namespace blockaxioms;

TEST(Epoch, SingleMinerEstimatesWholeTotal) {
  for (std::int64_t M : {1, 64, 1024}) {
    ProtocolParams params{M, Rational(3, 2), 11};
    for (std::size_t e = 0; e < 20; ++e) {
      auto o = run_epoch(Configuration({5}), params, AllocationRule::proportional(), e);
      ASSERT_EQ(o.h_hat.size(), 1u);
      EXPECT_EQ(o.h_hat[0], Rational(3, 2) * M);
      EXPECT_EQ(o.estimated_share(0), 1.0);
      EXPECT_EQ(o.rewards, std::vector<double>{1.0});
    }
  }
}

TEST(Epoch, InvariantsHold) {
  ProtocolParams params{256, Rational(1), 3};
  for (std::size_t e = 0; e < 500; ++e) {
    auto o = run_epoch(Configuration({5, 3, 2}), params, AllocationRule::proportional(), e);
    std::int64_t sum = 0;
    for (auto g : o.g) sum += g;
    EXPECT_EQ(sum, o.M_prime);
    EXPECT_GE(o.M_prime, 1);
    EXPECT_GE(o.g[o.finder], 1);
    EXPECT_EQ(o.estimate_total(), Rational(256));
    double paid = 0;
    for (double r : o.rewards) paid += r;
    EXPECT_LE(paid, 1.0 + 1e-12);
  }
}

TEST(Epoch, BitcoinAtMEqualsOne) {
  ProtocolParams params{1, Rational(1), 9};
  std::size_t first = 0;
  const std::size_t epochs = 4000;
  for (std::size_t e = 0; e < epochs; ++e) {
    auto o = run_epoch(Configuration({1, 1}), params, AllocationRule::proportional(), e);
    EXPECT_EQ(o.M_prime, 1);
    std::vector<double> expect(2, 0.0);
    expect[o.finder] = 1.0;
    EXPECT_EQ(o.rewards, expect);
    first += o.finder == 0 ? 1 : 0;
  }
  EXPECT_NEAR(first / double(epochs), 0.5, 3 * std::sqrt(0.25 / epochs));
}

TEST(Epoch, ParamsValidated) {
  EXPECT_THROW(run_epoch(Configuration({1}), ProtocolParams{100, Rational(1), 0}, AllocationRule::proportional()),
               std::invalid_argument);
  EXPECT_THROW(run_epoch(Configuration({1}), ProtocolParams{64, Rational(0), 0}, AllocationRule::proportional()),
               std::invalid_argument);
}

TEST(Simulation, SeedDeterminismAndJobsInvariance) {
  ProtocolParams params{512, Rational(1), 42};
  auto a = run_simulation(Configuration({5, 3, 2}), params, AllocationRule::proportional(), 600);
  auto b = run_simulation(Configuration({5, 3, 2}), params, AllocationRule::proportional(), 600);
  auto c = run_simulation(Configuration({5, 3, 2}), params, AllocationRule::proportional(), 600, {4, false});
  EXPECT_EQ(a, b);
  EXPECT_EQ(a, c);
  params.seed = 43;
  auto d = run_simulation(Configuration({5, 3, 2}), params, AllocationRule::proportional(), 600);
  EXPECT_NE(a.mean_reward, d.mean_reward);
}

TEST(Simulation, ShareConcentration) {
  // Chebyshev on the exact per-epoch RMSE: at least 1 - 1/9 of epochs lie
  // within three RMSEs.
  const Configuration h({5, 3, 2});
  ProtocolParams params{1024, Rational(1), 17};
  auto s = run_simulation(h, params, AllocationRule::proportional(), 1000, {1, true});
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double p = static_cast<double>(h[i]) / 10.0;
    const double band = 3 * oracle::share_rmse(p, 1024);
    std::size_t inside = 0;
    for (const auto& o : s.records) inside += std::abs(o.estimated_share(i) - p) <= band ? 1 : 0;
    EXPECT_GE(inside / 1000.0, 1.0 - 1.0 / 9.0) << "miner " << i;
  }
}

TEST(Simulation, ShareRmseMatchesOracle) {
  const Configuration h({5, 3, 2});
  ProtocolParams params{1024, Rational(1), 5};
  auto s = run_simulation(h, params, AllocationRule::proportional(), 4000);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double p = static_cast<double>(h[i]) / 10.0;
    EXPECT_NEAR(s.share_rmse[i] / oracle::share_rmse(p, 1024), 1.0, 0.15) << "miner " << i;
  }
}

TEST(Simulation, PooledShareUnbiased) {
  const Configuration h({5, 3, 2});
  ProtocolParams params{1024, Rational(1), 23};
  auto s = run_simulation(h, params, AllocationRule::proportional(), 2000);
  // Events are i.i.d. draws from h/sum h; total events ~ epochs * M.
  const double events = s.mean_M_prime * static_cast<double>(s.epochs);
  for (std::size_t i = 0; i < h.size(); ++i) {
    const double p = static_cast<double>(h[i]) / 10.0;
    EXPECT_NEAR(s.pooled_share[i], p, 3 * std::sqrt(p * (1 - p) / events));
  }
}

TEST(Simulation, ProportionalMeans) {
  ProtocolParams params{1024, Rational(1), 31};
  auto s = run_simulation(Configuration({3, 1}), params, AllocationRule::proportional(), 2000);
  EXPECT_NEAR(s.mean_reward[0], 0.75, 0.03);
  EXPECT_NEAR(s.mean_reward[1], 0.25, 0.03);
  EXPECT_EQ(s.identity_violations, 0u);
  EXPECT_EQ(s.overpaid_epochs, 0u);
}

TEST(Simulation, GeneralizedProportionalMeans) {
  ProtocolParams params{1024, Rational(1), 37};
  auto s = run_simulation(Configuration({1, 1}), params, parse_rule("genprop:const:1/2"), 2000);
  EXPECT_NEAR(s.mean_reward[0], 0.25, 0.03);
  EXPECT_NEAR(s.mean_reward[1], 0.25, 0.03);
}

TEST(Simulation, AllZeroPaysNothing) {
  ProtocolParams params{64, Rational(1), 1};
  auto s = run_simulation(Configuration({4, 2, 1}), params, AllocationRule::all_zero(), 300);
  for (double m : s.mean_reward) EXPECT_EQ(m, 0.0);
  for (double v : s.reward_variance) EXPECT_EQ(v, 0.0);
  EXPECT_EQ(s.max_payout, 0.0);
}

TEST(Simulation, DeterministicStrongBudgetPaysOneBlock) {
  ProtocolParams params{64, Rational(1), 2};
  auto s = run_simulation(Configuration({4, 2, 1}), params, AllocationRule::proportional(Semantics::Deterministic), 300);
  EXPECT_NEAR(s.min_payout, 1.0, 1e-12);
  EXPECT_NEAR(s.max_payout, 1.0, 1e-12);
}

TEST(Simulation, RejectsZeroEpochs) {
  EXPECT_THROW(run_simulation(Configuration({1}), ProtocolParams{}, AllocationRule::proportional(), 0),
               std::invalid_argument);
}

TEST(Variance, MatchesOracles) {
  ProtocolParams params{1024, Rational(1), 7};
  auto v = variance_study(Configuration({1, 1}), params, 5000);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(v.randomized.reward_variance[i], oracle::randomized_variance(0.5), 0.01);
    EXPECT_NEAR(v.deterministic.reward_variance[i] / oracle::deterministic_variance(0.5, 1024), 1.0, 0.15);
    EXPECT_GT(v.variance_ratio(i), 100.0);
  }
}

TEST(Variance, LeaderElectionUnaffectedBySemantics) {
  ProtocolParams params{1024, Rational(1), 8};
  auto v = variance_study(Configuration({1, 1}), params, 5000);
  for (std::size_t i = 0; i < 2; ++i) {
    EXPECT_NEAR(v.randomized.leader_frequency[i], 0.5, 0.03);
    EXPECT_EQ(v.randomized.leader_frequency[i], v.deterministic.leader_frequency[i]);
  }
}

TEST(Variance, SemanticsCoincideAtMEqualsOne) {
  ProtocolParams params{1, Rational(1), 8};
  auto v = variance_study(Configuration({1, 1}), params, 2000);
  EXPECT_TRUE(v.identical_epoch_by_epoch());
  EXPECT_EQ(v.randomized.reward_variance, v.deterministic.reward_variance);
}

TEST(Curve, ErrorShrinksWithM) {
  for (auto h : {Configuration({1, 1}), Configuration({9, 1})}) {
    auto curve = estimate_error_curve(h, {64, 256, 1024, 4096}, 2000, 13);
    EXPECT_LT(curve.back().mean_rmse, curve.front().mean_rmse);
    for (std::size_t k = 1; k < curve.size(); ++k) EXPECT_LT(curve[k].mean_rmse, curve[k - 1].mean_rmse * 1.1);
    EXPECT_TRUE(fits_inverse_sqrt(curve));
  }
}

TEST(Curve, TracksExactRmse) {
  auto curve = estimate_error_curve(Configuration({1, 1}), {64, 256, 1024, 4096}, 3000, 19);
  for (const auto& pt : curve) EXPECT_NEAR(pt.mean_rmse / oracle::share_rmse(0.5, pt.M), 1.0, 0.2) << pt.M;
}

TEST(Output, EpochCsvColumns) {
  ProtocolParams params{16, Rational(1), 4};
  auto s = run_simulation(Configuration({2, 1}), params, AllocationRule::proportional(), 5, {1, true});
  std::ostringstream os;
  write_epoch_csv(os, s);
  std::istringstream is(os.str());
  std::string line;
  std::getline(is, line);
  EXPECT_EQ(line, "epoch,miner,g_i,M_prime,h_hat,reward,leader_flag");
  std::size_t rows = 0;
  while (std::getline(is, line)) ++rows;
  EXPECT_EQ(rows, 10u);
}

TEST(Oracle, InverseEpochLengthClosedForm) {
  for (std::int64_t M : {2, 64, 1024}) {
    const double p = 1.0 / static_cast<double>(M);
    EXPECT_NEAR(oracle::expected_inverse_epoch_length(M), p * -std::log(p) / (1 - p), 1e-9);
  }
}
