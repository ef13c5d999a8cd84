#pragma once

#include "configuration.hpp"
#include "rules.hpp"
#include "scalar.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <ostream>
#include <sstream>
#include <random>
#include <stdexcept>
#include <string>
#include <thread>
#include <vector>

namespace blockaxioms {

struct ProtocolParams {
  std::int64_t M = 1024;  // partial solutions per full solution, power of two
  Rational rho{1};
  std::uint64_t seed = 0;

  void validate() const {
    if (M < 1 || !std::has_single_bit(static_cast<std::uint64_t>(M)))
      throw std::invalid_argument("M must be a positive power of two, got " + std::to_string(M));
    if (rho <= Rational(0)) throw std::invalid_argument("rho must be positive, got " + format_rational(rho));
  }

  Rational estimated_total() const { return rho * M; }
};

struct EpochOutcome {
  std::size_t epoch = 0;
  std::vector<std::int64_t> g;  // partial solutions per miner, full solution included
  std::size_t finder = 0;
  std::int64_t M_prime = 0;
  std::vector<Rational> h_hat;
  std::vector<double> rewards;

  double estimated_share(std::size_t i) const { return static_cast<double>(g[i]) / static_cast<double>(M_prime); }

  Rational estimate_total() const {
    Rational s(0);
    for (const auto& v : h_hat) s += v;
    return s;
  }
};

namespace detail {

inline std::seed_seq epoch_seed(std::uint64_t seed, std::size_t epoch, std::uint32_t stream) {
  return std::seed_seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                       static_cast<std::uint32_t>(epoch), static_cast<std::uint32_t>(std::uint64_t(epoch) >> 32),
                       stream};
}

}  // namespace detail

/// One epoch of the partial/full solution protocol. Solutions arrive as a
/// memoryless stream; each is miner i's with probability h_i / sum h and is
/// full with probability 1/M. The epoch closes at the first full solution.
/// Events and the reward lottery use separate streams so two rules can be
/// compared on the same events.
inline EpochOutcome run_epoch(const Configuration& h, const ProtocolParams& params, const AllocationRule& rule,
                              std::size_t epoch = 0) {
  params.validate();
  EpochOutcome out;
  out.epoch = epoch;
  out.g.assign(h.size(), 0);

  auto events_seed = detail::epoch_seed(params.seed, epoch, 0);
  std::mt19937_64 events(events_seed);
  // Number of partial-only events before the full one is geometric; their
  // attribution is multinomial in h, drawn as a chain of binomials.
  const double p_full = 1.0 / static_cast<double>(params.M);
  std::int64_t partials = params.M == 1 ? 0 : std::geometric_distribution<std::int64_t>(p_full)(events);
  std::discrete_distribution<std::size_t> pick(h.begin(), h.end());
  out.finder = pick(events);
  std::int64_t remaining = partials;
  HashRate rate_left = h.total();
  for (std::size_t i = 0; i < h.size() && remaining > 0; ++i) {
    if (i + 1 == h.size()) {
      out.g[i] += remaining;
      break;
    }
    double q = static_cast<double>(h[i]) / static_cast<double>(rate_left);
    std::int64_t k = std::binomial_distribution<std::int64_t>(remaining, std::min(1.0, q))(events);
    out.g[i] += k;
    remaining -= k;
    rate_left -= h[i];
  }
  out.g[out.finder] += 1;
  out.M_prime = partials + 1;

  const Rational total = params.estimated_total();
  for (auto gi : out.g) out.h_hat.push_back(total * Rational(gi, out.M_prime));

  // The rule sees the miners that showed up, at their observed counts.
  std::vector<HashRate> observed;
  std::vector<std::size_t> index;
  for (std::size_t i = 0; i < h.size(); ++i)
    if (out.g[i] > 0) {
      observed.push_back(out.g[i]);
      index.push_back(i);
    }
  Allocation x = rule.evaluate_scaled(Configuration(observed), total);
  auto lottery_seed = detail::epoch_seed(params.seed, epoch, 1);
  std::mt19937_64 lottery(lottery_seed);
  std::vector<double> paid = realize(x, rule.semantics(), lottery);
  out.rewards.assign(h.size(), 0.0);
  for (std::size_t k = 0; k < index.size(); ++k) out.rewards[index[k]] = paid[k];
  return out;
}

struct SimulationStats {
  Configuration h{1};
  ProtocolParams params;
  std::string rule;
  Semantics semantics = Semantics::Randomized;
  std::size_t epochs = 0;
  std::vector<double> true_share;
  std::vector<double> mean_reward;
  std::vector<double> reward_variance;  // per-epoch, population
  std::vector<double> share_rmse;       // per-epoch g_i/M' against h_i/sum h
  std::vector<double> pooled_share;     // sum g_i / sum M' over all epochs
  std::vector<double> leader_frequency;
  double mean_M_prime = 0;
  std::size_t identity_violations = 0;  // epochs where sum h_hat != rho*M
  std::size_t overpaid_epochs = 0;      // epochs paying more than one block
  double min_payout = 0;
  double max_payout = 0;
  std::vector<EpochOutcome> records;    // kept only on request

  friend bool operator==(const SimulationStats& a, const SimulationStats& b) {
    return a.mean_reward == b.mean_reward && a.reward_variance == b.reward_variance && a.share_rmse == b.share_rmse &&
           a.pooled_share == b.pooled_share && a.leader_frequency == b.leader_frequency &&
           a.mean_M_prime == b.mean_M_prime && a.identity_violations == b.identity_violations &&
           a.epochs == b.epochs;
  }
};

struct SimulationOptions {
  std::size_t jobs = 1;
  bool keep_records = false;
};

/// Runs `epochs` epochs and aggregates them. Epochs draw from their own
/// seeds, and aggregation runs in epoch order, so `jobs` changes nothing.
inline SimulationStats run_simulation(const Configuration& h, const ProtocolParams& params, const AllocationRule& rule,
                                      std::size_t epochs, const SimulationOptions& opts = {}) {
  params.validate();
  if (epochs < 1) throw std::invalid_argument("epochs must be at least 1");
  std::vector<EpochOutcome> outcomes(epochs);
  std::size_t jobs = std::max<std::size_t>(1, std::min(opts.jobs, epochs));
  if (jobs == 1) {
    for (std::size_t e = 0; e < epochs; ++e) outcomes[e] = run_epoch(h, params, rule, e);
  } else {
    std::vector<std::exception_ptr> errors(jobs);
    {
      std::vector<std::jthread> threads;
      for (std::size_t t = 0; t < jobs; ++t)
        threads.emplace_back([&, t] {
          try {
            for (std::size_t e = t; e < epochs; e += jobs) outcomes[e] = run_epoch(h, params, rule, e);
          } catch (...) {
            errors[t] = std::current_exception();
          }
        });
    }
    for (auto& e : errors)
      if (e) std::rethrow_exception(e);
  }

  const std::size_t n = h.size();
  SimulationStats s;
  s.h = h;
  s.params = params;
  s.rule = rule.name();
  s.semantics = rule.semantics();
  s.epochs = epochs;
  s.true_share.resize(n);
  for (std::size_t i = 0; i < n; ++i) s.true_share[i] = static_cast<double>(h[i]) / static_cast<double>(h.total());
  s.mean_reward.assign(n, 0.0);
  s.reward_variance.assign(n, 0.0);
  s.share_rmse.assign(n, 0.0);
  s.pooled_share.assign(n, 0.0);
  s.leader_frequency.assign(n, 0.0);
  s.min_payout = 1.0;
  s.max_payout = 0.0;

  std::vector<std::int64_t> g_total(n, 0);
  std::int64_t events = 0;
  const Rational expected_total = params.estimated_total();
  for (const auto& o : outcomes) {
    double payout = 0;
    for (std::size_t i = 0; i < n; ++i) {
      s.mean_reward[i] += o.rewards[i];
      double err = o.estimated_share(i) - s.true_share[i];
      s.share_rmse[i] += err * err;
      g_total[i] += o.g[i];
      payout += o.rewards[i];
    }
    s.leader_frequency[o.finder] += 1;
    events += o.M_prime;
    if (o.estimate_total() != expected_total) ++s.identity_violations;
    if (payout > 1.0 + kBudgetTolerance) ++s.overpaid_epochs;
    s.min_payout = std::min(s.min_payout, payout);
    s.max_payout = std::max(s.max_payout, payout);
  }
  const double N = static_cast<double>(epochs);
  for (std::size_t i = 0; i < n; ++i) {
    s.mean_reward[i] /= N;
    s.share_rmse[i] = std::sqrt(s.share_rmse[i] / N);
    s.pooled_share[i] = static_cast<double>(g_total[i]) / static_cast<double>(events);
    s.leader_frequency[i] /= N;
  }
  for (const auto& o : outcomes)
    for (std::size_t i = 0; i < n; ++i) {
      double d = o.rewards[i] - s.mean_reward[i];
      s.reward_variance[i] += d * d;
    }
  for (auto& v : s.reward_variance) v /= N;
  s.mean_M_prime = static_cast<double>(events) / N;
  if (opts.keep_records) s.records = std::move(outcomes);
  return s;
}

/// Proportional rule under both reward semantics on the same events.
struct VarianceComparison {
  SimulationStats randomized;
  SimulationStats deterministic;
  std::size_t epochs_with_equal_rewards = 0;

  double variance_ratio(std::size_t miner) const {
    return deterministic.reward_variance[miner] == 0 ? INFINITY
                                                     : randomized.reward_variance[miner] /
                                                           deterministic.reward_variance[miner];
  }
  bool identical_epoch_by_epoch() const { return epochs_with_equal_rewards == randomized.epochs; }
};

inline VarianceComparison variance_study(const Configuration& h, const ProtocolParams& params, std::size_t epochs,
                                         std::size_t jobs = 1) {
  SimulationOptions opts{jobs, true};
  VarianceComparison c;
  c.randomized = run_simulation(h, params, AllocationRule::proportional(Semantics::Randomized), epochs, opts);
  c.deterministic = run_simulation(h, params, AllocationRule::proportional(Semantics::Deterministic), epochs, opts);
  for (std::size_t e = 0; e < epochs; ++e)
    if (c.randomized.records[e].rewards == c.deterministic.records[e].rewards) ++c.epochs_with_equal_rewards;
  return c;
}

struct CurvePoint {
  std::int64_t M = 1;
  std::vector<double> share_rmse;
  double mean_rmse = 0;
  double scaled_rmse = 0;  // mean_rmse * sqrt(M)
};

/// Share-estimate RMSE of the proportional rule for each M.
inline std::vector<CurvePoint> estimate_error_curve(const Configuration& h, const std::vector<std::int64_t>& Ms,
                                                    std::size_t epochs, std::uint64_t seed, std::size_t jobs = 1) {
  std::vector<CurvePoint> curve;
  for (auto M : Ms) {
    ProtocolParams params{M, Rational(1), seed};
    auto s = run_simulation(h, params, AllocationRule::proportional(), epochs, {jobs, false});
    CurvePoint p;
    p.M = M;
    p.share_rmse = s.share_rmse;
    for (double r : s.share_rmse) p.mean_rmse += r / static_cast<double>(s.share_rmse.size());
    p.scaled_rmse = p.mean_rmse * std::sqrt(static_cast<double>(M));
    curve.push_back(std::move(p));
  }
  return curve;
}

/// True when some c puts every point within [c/factor, c*factor] / sqrt(M).
inline bool fits_inverse_sqrt(const std::vector<CurvePoint>& curve, double factor = 2.0) {
  if (curve.empty()) return false;
  auto [lo, hi] = std::minmax_element(curve.begin(), curve.end(),
                                      [](const CurvePoint& a, const CurvePoint& b) { return a.scaled_rmse < b.scaled_rmse; });
  return hi->scaled_rmse <= lo->scaled_rmse * factor * factor;
}

// Output -------------------------------------------------------------------

inline void write_epoch_csv(std::ostream& os, const SimulationStats& s) {
  os << "epoch,miner,g_i,M_prime,h_hat,reward,leader_flag\n";
  for (const auto& o : s.records)
    for (std::size_t i = 0; i < o.g.size(); ++i)
      os << o.epoch << "," << i + 1 << "," << o.g[i] << "," << o.M_prime << "," << format_rational(o.h_hat[i]) << ","
         << o.rewards[i] << "," << (o.finder == i ? 1 : 0) << "\n";
}

inline void write_summary_csv(std::ostream& os, const SimulationStats& s) {
  os << "miner,h_i,true_share,mean_reward,reward_variance,share_rmse,pooled_share,leader_frequency\n";
  for (std::size_t i = 0; i < s.h.size(); ++i)
    os << i + 1 << "," << s.h[i] << "," << s.true_share[i] << "," << s.mean_reward[i] << "," << s.reward_variance[i]
       << "," << s.share_rmse[i] << "," << s.pooled_share[i] << "," << s.leader_frequency[i] << "\n";
}

inline void write_curve_csv(std::ostream& os, const std::vector<CurvePoint>& curve) {
  os << "M,miner,share_rmse,rmse_times_sqrt_M\n";
  for (const auto& p : curve)
    for (std::size_t i = 0; i < p.share_rmse.size(); ++i)
      os << p.M << "," << i + 1 << "," << p.share_rmse[i] << "," << p.share_rmse[i] * std::sqrt(double(p.M)) << "\n";
}

inline std::string format_stats(const SimulationStats& s) {
  std::ostringstream os;
  os << s.rule << " (" << to_string(s.semantics) << ") h=" << s.h << " M=" << s.params.M
     << " rho=" << format_rational(s.params.rho) << " seed=" << s.params.seed << " epochs=" << s.epochs << "\n";
  os << "  miner  share    mean_reward  variance     share_rmse   pooled_share leader\n";
  for (std::size_t i = 0; i < s.h.size(); ++i) {
    char line[160];
    std::snprintf(line, sizeof line, "  %-6zu %-8.4f %-12.6f %-12.6g %-12.6g %-12.6f %.4f\n", i + 1, s.true_share[i],
                  s.mean_reward[i], s.reward_variance[i], s.share_rmse[i], s.pooled_share[i], s.leader_frequency[i]);
    os << line;
  }
  os << "  mean M' " << s.mean_M_prime << "; payout per epoch in [" << s.min_payout << ", " << s.max_payout << "]";
  os << "; estimate total = rho*M in " << (s.epochs - s.identity_violations) << "/" << s.epochs << " epochs\n";
  return os.str();
}

inline nlohmann::json to_json(const SimulationStats& s) {
  nlohmann::json j;
  j["rule"] = s.rule;
  j["semantics"] = to_string(s.semantics);
  j["h"] = std::vector<HashRate>(s.h.begin(), s.h.end());
  j["M"] = s.params.M;
  j["rho"] = format_rational(s.params.rho);
  j["seed"] = s.params.seed;
  j["epochs"] = s.epochs;
  j["true_share"] = s.true_share;
  j["mean_reward"] = s.mean_reward;
  j["reward_variance"] = s.reward_variance;
  j["share_rmse"] = s.share_rmse;
  j["pooled_share"] = s.pooled_share;
  j["leader_frequency"] = s.leader_frequency;
  j["mean_M_prime"] = s.mean_M_prime;
  j["identity_violations"] = s.identity_violations;
  j["overpaid_epochs"] = s.overpaid_epochs;
  return j;
}

}  // namespace blockaxioms
