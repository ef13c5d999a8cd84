#pragma once

#include "scalar.hpp"

#include <algorithm>
#include <cstdint>
#include <initializer_list>
#include <numeric>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blockaxioms {

using HashRate = std::int64_t;

/// Per-miner hash rates of one block-creation epoch. Every entry is a
/// positive integer; rational rates are handled by pre-scaling with a
/// common denominator.
class Configuration {
 public:
  Configuration(std::initializer_list<HashRate> rates) : Configuration(std::vector<HashRate>(rates)) {}

  explicit Configuration(std::vector<HashRate> rates) : rates_(std::move(rates)) {
    if (rates_.empty()) throw std::invalid_argument("configuration must contain at least one miner");
    for (HashRate r : rates_) {
      if (r < 1) throw std::invalid_argument("hash rates must be positive integers, got " + std::to_string(r));
      if (r > 1'000'000'000'000) throw std::invalid_argument("hash rate too large");
    }
    total_ = std::accumulate(rates_.begin(), rates_.end(), HashRate{0});
  }

  std::size_t size() const { return rates_.size(); }
  HashRate operator[](std::size_t i) const { return rates_[i]; }
  HashRate total() const { return total_; }
  std::span<const HashRate> rates() const { return rates_; }
  auto begin() const { return rates_.begin(); }
  auto end() const { return rates_.end(); }

  /// Number of entries larger than one.
  std::size_t heavy_count() const {
    return static_cast<std::size_t>(std::count_if(rates_.begin(), rates_.end(), [](HashRate r) { return r > 1; }));
  }

  /// Entries sorted in nonincreasing order.
  Configuration sorted_representative() const {
    std::vector<HashRate> s = rates_;
    std::sort(s.begin(), s.end(), std::greater<>());
    return Configuration(std::move(s));
  }

  /// Configuration scaled by a positive integer factor.
  Configuration scaled(HashRate k) const {
    std::vector<HashRate> s = rates_;
    for (auto& r : s) r *= k;
    return Configuration(std::move(s));
  }

  friend bool operator==(const Configuration&, const Configuration&) = default;
  friend auto operator<=>(const Configuration& a, const Configuration& b) { return a.rates_ <=> b.rates_; }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < rates_.size(); ++i) {
      if (i) out += ",";
      out += std::to_string(rates_[i]);
    }
    return out + ")";
  }

  friend std::ostream& operator<<(std::ostream& os, const Configuration& h) { return os << h.to_string(); }

 private:
  std::vector<HashRate> rates_;
  HashRate total_ = 0;
};

/// Parses "5,3,2".
inline Configuration parse_configuration(std::string_view text) {
  std::vector<HashRate> rates;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t comma = text.find(',', start);
    std::string_view part = text.substr(start, comma == std::string_view::npos ? std::string_view::npos : comma - start);
    Rational r = parse_rational(part);
    if (r.denominator() != 1) throw std::invalid_argument("hash rate must be an integer: '" + std::string(part) + "'");
    rates.push_back(r.numerator());
    if (comma == std::string_view::npos) break;
    start = comma + 1;
  }
  return Configuration(std::move(rates));
}

/// Expected (or realized) per-miner rewards.
class Allocation {
 public:
  Allocation() = default;
  explicit Allocation(std::vector<Scalar> rewards) : rewards_(std::move(rewards)) {
    for (const auto& r : rewards_)
      if (r.value() < 0) throw std::domain_error("allocations must be nonnegative");
  }

  static Allocation zeros(std::size_t n) { return Allocation(std::vector<Scalar>(n, Scalar(0))); }

  std::size_t size() const { return rewards_.size(); }
  const Scalar& operator[](std::size_t i) const { return rewards_[i]; }
  auto begin() const { return rewards_.begin(); }
  auto end() const { return rewards_.end(); }

  Scalar sum() const {
    Scalar s(0);
    for (const auto& r : rewards_) s += r;
    return s;
  }

  bool is_exact() const {
    return std::all_of(rewards_.begin(), rewards_.end(), [](const Scalar& s) { return s.is_exact(); });
  }

  bool is_zero() const {
    return std::all_of(rewards_.begin(), rewards_.end(), [](const Scalar& s) { return blockaxioms::is_zero(s); });
  }

  std::vector<double> values() const {
    std::vector<double> out;
    out.reserve(rewards_.size());
    for (const auto& r : rewards_) out.push_back(r.value());
    return out;
  }

  friend std::ostream& operator<<(std::ostream& os, const Allocation& p) {
    os << "(";
    for (std::size_t i = 0; i < p.size(); ++i) os << (i ? "," : "") << p[i];
    return os << ")";
  }

 private:
  std::vector<Scalar> rewards_;
};

/// The finite set of configurations with 1 <= n <= max_miners entries,
/// every entry >= 1, and total <= max_total.
struct Universe {
  std::size_t max_miners = 4;
  HashRate max_total = 8;

  void validate() const {
    if (max_miners < 1 || max_total < 1) throw std::invalid_argument("universe bounds must be positive");
    if (max_total > 64) throw std::invalid_argument("universe total bound too large for exhaustive enumeration");
  }

  bool contains(const Configuration& h) const { return h.size() <= max_miners && h.total() <= max_total; }

  /// Every ordered configuration, grouped by total, then length, then
  /// lexicographically. This order defines "first witness".
  std::vector<Configuration> enumerate() const {
    validate();
    std::vector<Configuration> out;
    std::vector<HashRate> current;
    for (HashRate m = 1; m <= max_total; ++m) {
      for (std::size_t n = 1; n <= max_miners && static_cast<HashRate>(n) <= m; ++n) {
        current.assign(n, 0);
        compositions(m, n, 0, current, out);
      }
    }
    return out;
  }

  /// Sorted (nonincreasing) representatives in the same total/length order.
  std::vector<Configuration> representatives() const {
    std::vector<Configuration> out;
    for (const auto& h : enumerate())
      if (std::is_sorted(h.begin(), h.end(), std::greater<>())) out.push_back(h);
    return out;
  }

  std::string to_string() const { return std::to_string(max_miners) + "x" + std::to_string(max_total); }

  friend bool operator==(const Universe&, const Universe&) = default;

 private:
  static void compositions(HashRate remaining, std::size_t n, std::size_t pos, std::vector<HashRate>& cur,
                           std::vector<Configuration>& out) {
    if (pos + 1 == n) {
      cur[pos] = remaining;
      out.emplace_back(cur);
      return;
    }
    std::size_t slots_after = n - pos - 1;
    for (HashRate v = 1; v + static_cast<HashRate>(slots_after) <= remaining; ++v) {
      cur[pos] = v;
      compositions(remaining - v, n, pos + 1, cur, out);
    }
  }
};

/// Parses "NxM" into (max_miners, max_total).
inline Universe parse_universe(std::string_view text) {
  auto x = text.find('x');
  if (x == std::string_view::npos) throw std::invalid_argument("universe must look like NxM: '" + std::string(text) + "'");
  Rational n = parse_rational(text.substr(0, x));
  Rational m = parse_rational(text.substr(x + 1));
  if (n.denominator() != 1 || m.denominator() != 1 || n < Rational(1) || m < Rational(1))
    throw std::invalid_argument("universe bounds must be positive integers: '" + std::string(text) + "'");
  Universe u{static_cast<std::size_t>(n.numerator()), m.numerator()};
  u.validate();
  return u;
}

}  // namespace blockaxioms
