#pragma once

#include "deviations.hpp"
#include "rules.hpp"
#include "utility.hpp"

#include <vector>

namespace blockaxioms {

/// Expected utility of one coalition member after a merge, next to what the
/// same miner expected before it.
struct MemberUtility {
  std::size_t miner = 0;
  Scalar coalition;
  Scalar baseline;

  Scalar gain() const { return coalition - baseline; }
};

namespace detail {

inline Scalar apply_utility(const UtilityProfile& profile, std::size_t miner, const Scalar& reward) {
  if (profile.risk_neutral()) return reward;
  return profile.for_miner(miner)(reward);
}

}  // namespace detail

/// Member utilities given the merged miner's allocation `merged_reward` and
/// the base allocation. Randomized semantics: the coalition wins the whole
/// block with probability merged_reward and splits it by `scheme`; the
/// baseline is U(1) * x_i(h). Deterministic semantics: the coalition is paid
/// merged_reward outright; the baseline is U(x_i(h)).
inline std::vector<MemberUtility> member_utilities(const Scalar& merged_reward, const Allocation& base_allocation,
                                                   const CoalitionMerge& merge, const SharingScheme& scheme,
                                                   const UtilityProfile& profile, Semantics semantics) {
  const bool randomized = semantics == Semantics::Randomized;
  const Scalar pot = randomized ? Scalar(1) : merged_reward;
  const HashRate coalition_rate = merge.coalition_rate();

  std::vector<MemberUtility> out;
  out.reserve(merge.members.size());
  for (std::size_t k = 0; k < merge.members.size(); ++k) {
    const std::size_t miner = merge.members[k];
    Scalar expected;
    switch (scheme.mode()) {
      case SharingScheme::Mode::Proportional:
        expected = detail::apply_utility(profile, miner, pot * Scalar(Rational(merge.base[miner], coalition_rate)));
        break;
      case SharingScheme::Mode::FixedFractions:
        expected = detail::apply_utility(profile, miner, pot * Scalar(scheme.fraction(k)));
        break;
      case SharingScheme::Mode::Lottery:
        expected = Scalar(scheme.fraction(k)) * detail::apply_utility(profile, miner, pot);
        break;
    }
    MemberUtility m;
    m.miner = miner;
    if (randomized) {
      m.coalition = merged_reward * expected;
      m.baseline = detail::apply_utility(profile, miner, Scalar(1)) * base_allocation[miner];
    } else {
      m.coalition = expected;
      m.baseline = detail::apply_utility(profile, miner, base_allocation[miner]);
    }
    out.push_back(std::move(m));
  }
  return out;
}

/// Per-member expected utilities of a merge under `scheme`, using the rule's
/// own reward semantics.
inline std::vector<MemberUtility> coalition_member_utility(const AllocationRule& rule, const Configuration& h,
                                                           const CoalitionMerge& merge, const SharingScheme& scheme,
                                                           const UtilityProfile& profile) {
  if (!(merge.base == h)) throw std::invalid_argument("merge does not apply to this configuration");
  if (merge.merged_rate < 1 || merge.merged_rate > merge.coalition_rate())
    throw std::invalid_argument("merged rate must lie in [1, coalition rate]");
  Allocation base = rule.evaluate(h);
  Allocation after = rule.evaluate(merge.derived());
  return member_utilities(after[merge.merged_position()], base, merge, scheme, profile, rule.semantics());
}

}  // namespace blockaxioms
