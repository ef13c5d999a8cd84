#pragma once

// Independent reference computations. Nothing here calls the library's
// enumerators; counts come from closed forms or dynamic programming.

#include <blockaxioms/scalar.hpp>

#include <cmath>
#include <cstdint>
#include <map>
#include <vector>

namespace oracle {

// p(n) by the standard coin-change recurrence over part sizes.
inline std::int64_t partition_count(std::int64_t n) {
  std::vector<std::int64_t> ways(static_cast<std::size_t>(n) + 1, 0);
  ways[0] = 1;
  for (std::int64_t part = 1; part <= n; ++part)
    for (std::int64_t v = part; v <= n; ++v) ways[static_cast<std::size_t>(v)] += ways[static_cast<std::size_t>(v - part)];
  return ways[static_cast<std::size_t>(n)];
}

inline std::int64_t sybil_split_count(std::int64_t rate) {
  std::int64_t total = 0;
  for (std::int64_t t = 1; t <= rate; ++t) total += partition_count(t);
  return total;
}

// Each miner belongs to half of the 2^n coalitions, and a coalition T
// admits sum_T h merged rates.
inline std::int64_t merge_count(const std::vector<std::int64_t>& h) {
  std::int64_t sum = 0;
  for (auto v : h) sum += v;
  return (std::int64_t{1} << (h.size() - 1)) * sum;
}

inline std::int64_t binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n) return 0;
  std::int64_t r = 1;
  for (std::int64_t j = 1; j <= k; ++j) r = r * (n - k + j) / j;
  return r;
}

// Ordered compositions of m into n positive parts: C(m-1, n-1).
inline std::int64_t universe_size(std::int64_t max_miners, std::int64_t max_total) {
  std::int64_t count = 0;
  for (std::int64_t m = 1; m <= max_total; ++m)
    for (std::int64_t n = 1; n <= max_miners; ++n) count += binomial(m - 1, n - 1);
  return count;
}

// Nonincreasing compositions of m into at most n parts.
inline std::int64_t representative_count(std::int64_t max_miners, std::int64_t max_total) {
  // q[m][k]: partitions of m into parts with at most k parts
  std::int64_t count = 0;
  std::vector<std::vector<std::int64_t>> q(static_cast<std::size_t>(max_total) + 1,
                                           std::vector<std::int64_t>(static_cast<std::size_t>(max_miners) + 1, 0));
  for (std::int64_t k = 0; k <= max_miners; ++k) q[0][static_cast<std::size_t>(k)] = 1;
  for (std::int64_t m = 1; m <= max_total; ++m)
    for (std::int64_t k = 1; k <= max_miners; ++k) {
      // partitions into at most k parts = into at most k-1 parts + exactly k parts
      std::int64_t exactly_k = m >= k ? q[static_cast<std::size_t>(m - k)][static_cast<std::size_t>(k)] : 0;
      q[static_cast<std::size_t>(m)][static_cast<std::size_t>(k)] = q[static_cast<std::size_t>(m)][static_cast<std::size_t>(k - 1)] + exactly_k;
    }
  for (std::int64_t m = 1; m <= max_total; ++m) count += q[static_cast<std::size_t>(m)][static_cast<std::size_t>(max_miners)];
  return count;
}

// Epoch length N (events up to and including the first full solution) is
// geometric with success probability 1/M. E[1/N] by direct summation.
inline double expected_inverse_epoch_length(std::int64_t M) {
  const double p = 1.0 / static_cast<double>(M);
  if (M == 1) return 1.0;
  double sum = 0, weight = p;
  for (std::int64_t n = 1; n < 200 * M; ++n) {
    sum += weight / static_cast<double>(n);
    weight *= 1.0 - p;
  }
  return sum;
}

// Given N, each event is miner i's independently with probability p, so
// Var(g_i / N | N) = p(1-p)/N and the estimate is unbiased.
inline double share_rmse(double p, std::int64_t M) { return std::sqrt(p * (1 - p) * expected_inverse_epoch_length(M)); }

// Deterministic proportional payout is g_i/N itself.
inline double deterministic_variance(double p, std::int64_t M) { return p * (1 - p) * expected_inverse_epoch_length(M); }

// Winner-take-all: a Bernoulli(p) payout each epoch.
inline double randomized_variance(double p) { return p * (1 - p); }

// x_i(h) = c(m) h_i / m over sorted representatives, or nothing when some
// value falls off the 1/L lattice.
using Table = std::map<std::vector<std::int64_t>, std::vector<blockaxioms::Rational>>;

inline std::vector<std::vector<std::int64_t>> sorted_configurations(std::int64_t max_miners, std::int64_t max_total) {
  std::vector<std::vector<std::int64_t>> out;
  std::vector<std::int64_t> cur;
  auto rec = [&](auto&& self, std::int64_t remaining, std::int64_t cap) -> void {
    if (!cur.empty()) out.push_back(cur);
    if (static_cast<std::int64_t>(cur.size()) == max_miners) return;
    for (std::int64_t v = std::min(cap, remaining); v >= 1; --v) {
      cur.push_back(v);
      self(self, remaining - v, v);
      cur.pop_back();
    }
  };
  rec(rec, max_total, max_total);
  return out;
}

inline std::vector<Table> generalized_proportional_tables(std::int64_t max_miners, std::int64_t max_total, std::int64_t L) {
  using blockaxioms::Rational;
  std::vector<Table> out;
  auto configs = sorted_configurations(max_miners, max_total);
  std::vector<std::int64_t> c(static_cast<std::size_t>(max_total));
  auto rec = [&](auto&& self, std::size_t m, std::int64_t low) -> void {
    if (m == c.size()) {
      Table t;
      for (const auto& h : configs) {
        std::int64_t total = 0;
        for (auto v : h) total += v;
        std::vector<Rational> vals;
        for (auto v : h) {
          Rational x = Rational(c[static_cast<std::size_t>(total - 1)], L) * Rational(v, total);
          if ((x * L).denominator() != 1) return;
          vals.push_back(x);
        }
        t[h] = vals;
      }
      out.push_back(t);
      return;
    }
    for (std::int64_t v = low; v <= L; ++v) {
      c[m] = v;
      self(self, m + 1, v);
    }
  };
  rec(rec, 0, 0);
  return out;
}

}  // namespace oracle
