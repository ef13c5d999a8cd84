#pragma once

#include "configuration.hpp"
#include "scalar.hpp"

#include <cstdint>
#include <functional>
#include <numeric>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace blockaxioms {

/// Miner `miner` of `base` replaced by identities with rates `parts`.
struct SybilSplit {
  Configuration base{1};
  std::size_t miner = 0;
  std::vector<HashRate> parts;

  /// Base without the split miner, sybils appended.
  Configuration derived() const {
    std::vector<HashRate> out;
    out.reserve(base.size() - 1 + parts.size());
    for (std::size_t j = 0; j < base.size(); ++j)
      if (j != miner) out.push_back(base[j]);
    out.insert(out.end(), parts.begin(), parts.end());
    return Configuration(std::move(out));
  }

  std::size_t first_sybil_position() const { return base.size() - 1; }
};

/// Coalition `members` of `base` replaced by a single miner of rate
/// `merged_rate`, appended after the remaining miners.
struct CoalitionMerge {
  Configuration base{1};
  std::vector<std::size_t> members;
  HashRate merged_rate = 1;

  HashRate coalition_rate() const {
    HashRate s = 0;
    for (auto k : members) s += base[k];
    return s;
  }

  Configuration derived() const {
    std::vector<HashRate> out;
    std::vector<bool> in_coalition(base.size(), false);
    for (auto k : members) in_coalition[k] = true;
    for (std::size_t j = 0; j < base.size(); ++j)
      if (!in_coalition[j]) out.push_back(base[j]);
    out.push_back(merged_rate);
    return Configuration(std::move(out));
  }

  std::size_t merged_position() const { return base.size() - members.size(); }
};

/// Every multiset of positive parts summing to s, largest part first, in
/// reverse lexicographic order: 3 -> {3},{2,1},{1,1,1}.
inline std::vector<std::vector<HashRate>> partitions_of(HashRate s) {
  std::vector<std::vector<HashRate>> out;
  std::vector<HashRate> current;
  std::function<void(HashRate, HashRate)> recurse = [&](HashRate remaining, HashRate max_part) {
    if (remaining == 0) {
      out.push_back(current);
      return;
    }
    for (HashRate part = std::min(remaining, max_part); part >= 1; --part) {
      current.push_back(part);
      recurse(remaining - part, part);
      current.pop_back();
    }
  };
  recurse(s, s);
  return out;
}

/// Visits every split of miner i: partitions of s for s = h_i down to 1.
/// The visitor returns false to stop early.
template <class Visitor>
void for_each_sybil_split(const Configuration& h, std::size_t i, Visitor&& visit) {
  if (i >= h.size()) throw std::out_of_range("miner index out of range");
  for (HashRate s = h[i]; s >= 1; --s) {
    for (auto& parts : partitions_of(s)) {
      if (!visit(SybilSplit{h, i, std::move(parts)})) return;
    }
  }
}

inline std::vector<SybilSplit> enumerate_sybil_splits(const Configuration& h, std::size_t i) {
  std::vector<SybilSplit> out;
  for_each_sybil_split(h, i, [&](SybilSplit s) {
    out.push_back(std::move(s));
    return true;
  });
  return out;
}

/// Visits every merge: coalitions by ascending bitmask (singletons
/// included), merged rate from the full coalition rate down to 1.
template <class Visitor>
void for_each_coalition_merge(const Configuration& h, Visitor&& visit) {
  const std::size_t n = h.size();
  if (n > 20) throw std::length_error("too many miners to enumerate coalitions");
  for (std::uint32_t mask = 1; mask < (1u << n); ++mask) {
    std::vector<std::size_t> members;
    for (std::size_t k = 0; k < n; ++k)
      if (mask & (1u << k)) members.push_back(k);
    CoalitionMerge merge{h, members, 0};
    HashRate total = merge.coalition_rate();
    for (HashRate rate = total; rate >= 1; --rate) {
      merge.merged_rate = rate;
      if (!visit(merge)) return;
    }
  }
}

/// How a coalition splits a reward R it receives.
///  Proportional:   member k gets R * h_k / sum_T h.
///  FixedFractions: member k gets R * f_k.
///  Lottery:        member k gets all of R with probability q_k.
class SharingScheme {
 public:
  enum class Mode { Proportional, FixedFractions, Lottery };

  static SharingScheme proportional() { return SharingScheme(Mode::Proportional, {}, 1); }

  static SharingScheme fixed_fractions(std::vector<std::int64_t> numerators, std::int64_t grid) {
    return SharingScheme(Mode::FixedFractions, std::move(numerators), grid);
  }

  static SharingScheme lottery(std::vector<std::int64_t> numerators, std::int64_t grid) {
    return SharingScheme(Mode::Lottery, std::move(numerators), grid);
  }

  Mode mode() const { return mode_; }
  std::int64_t grid() const { return grid_; }
  const std::vector<std::int64_t>& numerators() const { return numerators_; }
  Rational fraction(std::size_t k) const { return Rational(numerators_.at(k), grid_); }

  std::string spec() const {
    if (mode_ == Mode::Proportional) return "proportional";
    std::string out = mode_ == Mode::FixedFractions ? "fixed:" : "lottery:";
    for (std::size_t k = 0; k < numerators_.size(); ++k)
      out += (k ? "," : "") + format_rational(Rational(numerators_[k], grid_));
    return out;
  }

  friend bool operator==(const SharingScheme& a, const SharingScheme& b) { return a.spec() == b.spec(); }

 private:
  SharingScheme(Mode mode, std::vector<std::int64_t> numerators, std::int64_t grid)
      : mode_(mode), numerators_(std::move(numerators)), grid_(grid) {
    if (grid_ < 1) throw std::invalid_argument("sharing grid must be positive");
    std::int64_t total = 0;
    for (auto v : numerators_) {
      if (v < 0) throw std::invalid_argument("sharing fractions must be nonnegative");
      total += v;
    }
    if (total > grid_) throw std::invalid_argument("sharing fractions must sum to at most 1");
  }

  Mode mode_;
  std::vector<std::int64_t> numerators_;
  std::int64_t grid_;
};

inline SharingScheme parse_sharing_scheme(std::string_view text) {
  if (text == "proportional") return SharingScheme::proportional();
  bool fixed = text.starts_with("fixed:");
  if (!fixed && !text.starts_with("lottery:")) throw std::invalid_argument("unknown sharing scheme '" + std::string(text) + "'");
  std::string_view rest = text.substr(fixed ? 6 : 8);
  std::vector<Rational> values;
  while (!rest.empty()) {
    auto comma = rest.find(',');
    values.push_back(parse_rational(rest.substr(0, comma)));
    rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
  }
  std::int64_t grid = 1;
  for (const auto& v : values) grid = std::lcm(grid, v.denominator());
  std::vector<std::int64_t> numerators;
  for (const auto& v : values) numerators.push_back(v.numerator() * (grid / v.denominator()));
  return fixed ? SharingScheme::fixed_fractions(std::move(numerators), grid)
               : SharingScheme::lottery(std::move(numerators), grid);
}

/// The declared scheme family for `members` coalition members: proportional
/// sharing, then every fixed-fraction vector on the 1/grid lattice with
/// sum <= 1, then every single-winner lottery on the same lattice.
inline std::vector<SharingScheme> sharing_family(std::size_t members, std::int64_t grid = 16) {
  std::vector<std::vector<std::int64_t>> lattice;
  std::vector<std::int64_t> current(members, 0);
  std::function<void(std::size_t, std::int64_t)> recurse = [&](std::size_t pos, std::int64_t budget) {
    if (pos == members) {
      lattice.push_back(current);
      return;
    }
    for (std::int64_t v = 0; v <= budget; ++v) {
      current[pos] = v;
      recurse(pos + 1, budget - v);
    }
  };
  recurse(0, grid);

  std::vector<SharingScheme> family;
  family.reserve(1 + 2 * lattice.size());
  family.push_back(SharingScheme::proportional());
  for (const auto& f : lattice) family.push_back(SharingScheme::fixed_fractions(f, grid));
  for (const auto& q : lattice) family.push_back(SharingScheme::lottery(q, grid));
  return family;
}

inline std::string describe_sharing_family(std::int64_t grid) {
  return "proportional + fixed fractions on 1/" + std::to_string(grid) + " grid + single-winner lotteries on 1/" +
         std::to_string(grid) + " grid";
}

}  // namespace blockaxioms
