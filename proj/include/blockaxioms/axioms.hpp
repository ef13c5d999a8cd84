#pragma once

#include "axiom_id.hpp"
#include "configuration.hpp"
#include "deviations.hpp"
#include "member_utility.hpp"
#include "rules.hpp"
#include "utility.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <map>
#include <mutex>
#include <optional>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

namespace blockaxioms {

/// A concrete deviation that violates an axiom, with the failed inequality.
struct Witness {
  enum class Kind { Permutation, Budget, Split, Merge };

  Kind kind = Kind::Budget;
  Configuration base{1};
  std::vector<std::size_t> permutation;  // Permutation: (pi h)_k = h_{pi(k)}
  std::size_t miner = 0;                 // Split
  std::vector<HashRate> parts;           // Split
  std::vector<std::size_t> coalition;    // Merge
  HashRate merged_rate = 0;              // Merge
  std::string scheme = "proportional";   // Merge
  std::string inequality;
  double lhs = 0;
  double rhs = 0;
  double margin = 0;

  std::optional<Configuration> derived() const {
    switch (kind) {
      case Kind::Split: return SybilSplit{base, miner, parts}.derived();
      case Kind::Merge: return CoalitionMerge{base, coalition, merged_rate}.derived();
      default: return std::nullopt;
    }
  }

  std::string to_string() const {
    std::ostringstream os;
    auto one_based = [](const std::vector<std::size_t>& v) {
      std::string s = "{";
      for (std::size_t k = 0; k < v.size(); ++k) s += (k ? "," : "") + std::to_string(v[k] + 1);
      return s + "}";
    };
    switch (kind) {
      case Kind::Permutation: {
        os << "h=" << base << " pi=(";
        for (std::size_t k = 0; k < permutation.size(); ++k) os << (k ? "," : "") << permutation[k] + 1;
        os << ")";
        break;
      }
      case Kind::Budget: os << "h=" << base; break;
      case Kind::Split: {
        os << "h=" << base << " split miner " << miner + 1 << " into {";
        for (std::size_t k = 0; k < parts.size(); ++k) os << (k ? "," : "") << parts[k];
        os << "} -> " << *derived();
        break;
      }
      case Kind::Merge:
        os << "h=" << base << " T=" << one_based(coalition) << " h*=" << merged_rate << " -> " << *derived()
           << " sharing=" << scheme;
        break;
    }
    os << ": " << inequality << " (margin " << margin << ")";
    return os.str();
  }
};

/// Pass (certified over `universe` and `scope`) or Fail with a witness.
struct AxiomVerdict {
  Axiom axiom = Axiom::A1;
  std::string rule;
  Semantics semantics = Semantics::Randomized;
  Universe universe;
  std::string utility = "risk-neutral";
  std::string scope;
  bool pass = true;
  std::optional<Witness> witness;
  std::size_t deviations_checked = 0;
  std::size_t deviations_skipped = 0;

  std::string to_string() const {
    std::ostringstream os;
    os << to_string_of(axiom) << " " << rule << " [" << universe.to_string() << ", " << utility << ", "
       << blockaxioms::to_string(semantics) << "]: " << (pass ? "PASS" : "FAIL");
    if (witness) os << "  witness " << witness->to_string();
    if (pass) os << "  (" << deviations_checked << " deviations; scope: " << scope << ")";
    return os.str();
  }

 private:
  static std::string to_string_of(Axiom a) { return std::string(blockaxioms::to_string(a)); }
};

struct CheckOptions {
  UtilityProfile utilities;  // empty: risk-neutral
  std::size_t jobs = 1;
  std::int64_t sharing_grid = 16;
};

enum class BudgetMode { Strong, Weak };

namespace detail {

struct ConfigResult {
  std::size_t checked = 0;
  std::size_t skipped = 0;
  std::optional<Witness> witness;
};

/// Runs `check` over every configuration and keeps the witness of the
/// lowest-indexed failing one, independent of `jobs`.
template <class Check>
void scan_universe(const std::vector<Configuration>& configs, std::size_t jobs, Check&& check, AxiomVerdict& verdict) {
  constexpr std::size_t kNone = std::numeric_limits<std::size_t>::max();
  std::vector<ConfigResult> results(configs.size());
  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> first_fail{kNone};
  std::exception_ptr error;
  std::mutex error_mutex;

  auto worker = [&] {
    try {
      for (std::size_t idx = next++; idx < configs.size(); idx = next++) {
        if (idx > first_fail.load()) continue;
        results[idx] = check(configs[idx]);
        if (results[idx].witness) {
          std::size_t cur = first_fail.load();
          while (idx < cur && !first_fail.compare_exchange_weak(cur, idx)) {
          }
        }
      }
    } catch (...) {
      std::lock_guard lock(error_mutex);
      if (!error) error = std::current_exception();
    }
  };

  jobs = std::max<std::size_t>(1, std::min(jobs, configs.size()));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::jthread> threads;
    for (std::size_t t = 0; t < jobs; ++t) threads.emplace_back(worker);
  }
  if (error) std::rethrow_exception(error);

  std::size_t last = first_fail.load() == kNone ? configs.size() : first_fail.load() + 1;
  for (std::size_t idx = 0; idx < last; ++idx) {
    verdict.deviations_checked += results[idx].checked;
    verdict.deviations_skipped += results[idx].skipped;
  }
  if (first_fail.load() != kNone) {
    verdict.pass = false;
    verdict.witness = std::move(results[first_fail.load()].witness);
  }
}

inline AxiomVerdict make_verdict(Axiom axiom, const AllocationRule& rule, const Universe& universe,
                                 const UtilityProfile& utilities, std::string scope) {
  AxiomVerdict v;
  v.axiom = axiom;
  v.rule = rule.name();
  v.semantics = rule.semantics();
  v.universe = universe;
  v.utility = utilities.spec();
  v.scope = std::move(scope);
  return v;
}

inline std::string fmt(double v) {
  std::ostringstream os;
  os.precision(12);
  os << v;
  return os.str();
}

/// Violation test for the collusion grades given per-member utilities.
/// A4c: every member strictly gains. A4a/A4b: some member strictly gains and
/// none strictly loses. Returns the margin on violation.
inline std::optional<Scalar> collusion_violation(Axiom grade, const std::vector<MemberUtility>& members) {
  bool all_gain = true, some_gain = false, some_lose = false;
  std::optional<Scalar> min_gain, max_gain;
  for (const auto& m : members) {
    int c = compare(m.coalition, m.baseline);
    all_gain = all_gain && c > 0;
    some_gain = some_gain || c > 0;
    some_lose = some_lose || c < 0;
    Scalar g = m.gain();
    if (!min_gain || g.value() < min_gain->value()) min_gain = g;
    if (!max_gain || g.value() > max_gain->value()) max_gain = g;
  }
  if (grade == Axiom::A4c) return all_gain ? min_gain : std::nullopt;
  return (some_gain && !some_lose) ? max_gain : std::nullopt;
}

}  // namespace detail

/// A1: x(pi(h)) = pi(x(h)) for every h in the universe and every permutation.
inline AxiomVerdict check_symmetry(const AllocationRule& rule, const Universe& universe, const CheckOptions& opts = {}) {
  auto verdict = detail::make_verdict(Axiom::A1, rule, universe, {}, "all permutations of every configuration");
  detail::scan_universe(
      universe.enumerate(), opts.jobs,
      [&](const Configuration& h) {
        detail::ConfigResult r;
        if (!rule.defined_at(h)) {
          ++r.skipped;
          return r;
        }
        const Allocation x = rule.evaluate(h);
        std::vector<std::size_t> perm(h.size());
        std::iota(perm.begin(), perm.end(), 0);
        while (std::next_permutation(perm.begin(), perm.end())) {
          std::vector<HashRate> permuted(h.size());
          for (std::size_t k = 0; k < h.size(); ++k) permuted[k] = h[perm[k]];
          Configuration ph(std::move(permuted));
          if (!rule.defined_at(ph)) {
            ++r.skipped;
            continue;
          }
          ++r.checked;
          const Allocation xp = rule.evaluate(ph);
          double worst = -1;
          std::size_t worst_k = 0;
          for (std::size_t k = 0; k < h.size(); ++k) {
            if (compare(xp[k], x[perm[k]]) != 0) {
              double d = std::abs((xp[k] - x[perm[k]]).value());
              if (d > worst) {
                worst = d;
                worst_k = k;
              }
            }
          }
          if (worst >= 0) {
            Witness w;
            w.kind = Witness::Kind::Permutation;
            w.base = h;
            w.permutation = perm;
            w.lhs = xp[worst_k].value();
            w.rhs = x[perm[worst_k]].value();
            w.margin = worst;
            w.inequality = "x(pi h)_" + std::to_string(worst_k + 1) + " = " + detail::fmt(w.lhs) + " != x(h)_" +
                           std::to_string(perm[worst_k] + 1) + " = " + detail::fmt(w.rhs);
            r.witness = std::move(w);
            return r;
          }
        }
        return r;
      },
      verdict);
  return verdict;
}

/// A2a (strong): sum = 1 within 1e-12. A2b (weak): sum <= 1 + 1e-12.
inline AxiomVerdict check_budget(const AllocationRule& rule, const Universe& universe, BudgetMode mode,
                                 const CheckOptions& opts = {}) {
  const Axiom axiom = mode == BudgetMode::Strong ? Axiom::A2a : Axiom::A2b;
  auto verdict = detail::make_verdict(axiom, rule, universe, {}, "every configuration");
  detail::scan_universe(
      universe.enumerate(), opts.jobs,
      [&](const Configuration& h) {
        detail::ConfigResult r;
        if (!rule.defined_at(h)) {
          ++r.skipped;
          return r;
        }
        ++r.checked;
        Scalar total = rule.evaluate(h).sum();
        int c = compare(total, Scalar(1), kBudgetTolerance);
        bool violated = mode == BudgetMode::Strong ? c != 0 : c > 0;
        if (violated) {
          Witness w;
          w.kind = Witness::Kind::Budget;
          w.base = h;
          w.lhs = total.value();
          w.rhs = 1.0;
          w.margin = mode == BudgetMode::Strong ? std::abs(total.value() - 1.0) : total.value() - 1.0;
          w.inequality = "sum x(h) = " + detail::fmt(w.lhs) + (mode == BudgetMode::Strong ? " != 1" : " > 1");
          r.witness = std::move(w);
        }
        return r;
      },
      verdict);
  return verdict;
}

/// A3: sum_{j in S} x_j(h') <= x_i(h) for every split. The utility form of
/// the axiom scales both sides by U(1) > 0, so the risk-neutral test is used
/// for every utility profile.
inline AxiomVerdict check_sybil_proofness(const AllocationRule& rule, const Universe& universe,
                                          const CheckOptions& opts = {}) {
  auto verdict =
      detail::make_verdict(Axiom::A3, rule, universe, opts.utilities, "every split of every miner (partitions of s <= h_i)");
  detail::scan_universe(
      universe.enumerate(), opts.jobs,
      [&](const Configuration& h) {
        detail::ConfigResult r;
        if (!rule.defined_at(h)) {
          ++r.skipped;
          return r;
        }
        const Allocation x = rule.evaluate(h);
        for (std::size_t i = 0; i < h.size() && !r.witness; ++i) {
          for_each_sybil_split(h, i, [&](const SybilSplit& split) {
            Configuration derived = split.derived();
            if (!rule.defined_at(derived)) {
              ++r.skipped;
              return true;
            }
            ++r.checked;
            const Allocation xd = rule.evaluate(derived);
            Scalar sybil_total(0);
            for (std::size_t j = split.first_sybil_position(); j < derived.size(); ++j) sybil_total += xd[j];
            if (!strictly_greater(sybil_total, x[i])) return true;
            Witness w;
            w.kind = Witness::Kind::Split;
            w.base = h;
            w.miner = i;
            w.parts = split.parts;
            w.lhs = sybil_total.value();
            w.rhs = x[i].value();
            w.margin = (sybil_total - x[i]).value();
            w.inequality = "sybil total " + detail::fmt(w.lhs) + " > x_" + std::to_string(i + 1) + "(h) = " + detail::fmt(w.rhs);
            r.witness = std::move(w);
            return false;
          });
        }
        return r;
      },
      verdict);
  return verdict;
}

/// A4a / A4b / A4c. Risk-neutral A4a compares x_{i*}(h') against
/// sum_{j in T} x_j(h) (transferable sharing). With a utility profile, A4a
/// searches the declared sharing family; A4b and A4c always use
/// proportional sharing.
inline AxiomVerdict check_collusion(const AllocationRule& rule, const Universe& universe, Axiom grade,
                                    const CheckOptions& opts = {}) {
  if (grade != Axiom::A4a && grade != Axiom::A4b && grade != Axiom::A4c)
    throw std::invalid_argument("check_collusion needs A4a, A4b or A4c");
  for (const auto& u : opts.utilities.utilities()) {
    if (u(Scalar(0)).value() != 0.0 || u(Scalar(1)).value() <= 0.0)
      throw std::invalid_argument("utility " + u.spec() + " must satisfy U(1) > U(0) = 0");
  }

  const bool neutral = opts.utilities.risk_neutral();
  const bool family_search = grade == Axiom::A4a && !neutral;
  std::string scope = "every coalition (singletons included) and merged rate";
  if (family_search)
    scope += "; sharing family: " + describe_sharing_family(opts.sharing_grid);
  else if (grade == Axiom::A4a)
    scope += "; transferable sharing (total-reward reduction)";
  else
    scope += "; proportional sharing";
  auto verdict = detail::make_verdict(grade, rule, universe, opts.utilities, scope);

  std::vector<std::vector<SharingScheme>> families;
  if (family_search)
    for (std::size_t k = 0; k <= universe.max_miners; ++k) families.push_back(sharing_family(k, opts.sharing_grid));
  const std::vector<SharingScheme> proportional_only{SharingScheme::proportional()};

  detail::scan_universe(
      universe.enumerate(), opts.jobs,
      [&](const Configuration& h) {
        detail::ConfigResult r;
        if (!rule.defined_at(h)) {
          ++r.skipped;
          return r;
        }
        const Allocation x = rule.evaluate(h);
        for_each_coalition_merge(h, [&](const CoalitionMerge& merge) {
          Configuration derived = merge.derived();
          if (!rule.defined_at(derived)) {
            ++r.skipped;
            return true;
          }
          const Scalar merged = rule.evaluate(derived)[merge.merged_position()];

          if (neutral && grade == Axiom::A4a) {
            ++r.checked;
            Scalar before(0);
            for (auto k : merge.members) before += x[k];
            if (!strictly_greater(merged, before)) return true;
            Witness w;
            w.kind = Witness::Kind::Merge;
            w.base = h;
            w.coalition = merge.members;
            w.merged_rate = merge.merged_rate;
            w.scheme = "transferable";
            w.lhs = merged.value();
            w.rhs = before.value();
            w.margin = (merged - before).value();
            w.inequality = "x_i*(h') = " + detail::fmt(w.lhs) + " > sum_T x_j(h) = " + detail::fmt(w.rhs);
            r.witness = std::move(w);
            return false;
          }

          const auto& schemes = family_search ? families[merge.members.size()] : proportional_only;
          // Under fixed fractions and lotteries a member's utility depends only
          // on its own grid share, so signs are tabulated once per merge.
          const std::size_t t = merge.members.size();
          std::vector<std::vector<int>> fixed_sign, lottery_sign;
          if (family_search) {
            fixed_sign.assign(t, std::vector<int>(static_cast<std::size_t>(opts.sharing_grid) + 1));
            lottery_sign = fixed_sign;
            for (std::size_t k = 0; k < t; ++k)
              for (std::int64_t v = 0; v <= opts.sharing_grid; ++v) {
                std::vector<std::int64_t> nums(t, 0);
                nums[k] = v;
                auto f = member_utilities(merged, x, merge, SharingScheme::fixed_fractions(nums, opts.sharing_grid),
                                          opts.utilities, rule.semantics())[k];
                auto l = member_utilities(merged, x, merge, SharingScheme::lottery(nums, opts.sharing_grid),
                                          opts.utilities, rule.semantics())[k];
                fixed_sign[k][static_cast<std::size_t>(v)] = compare(f.coalition, f.baseline);
                lottery_sign[k][static_cast<std::size_t>(v)] = compare(l.coalition, l.baseline);
              }
          }
          for (const auto& scheme : schemes) {
            ++r.checked;
            if (scheme.mode() != SharingScheme::Mode::Proportional) {
              const auto& sign = scheme.mode() == SharingScheme::Mode::FixedFractions ? fixed_sign : lottery_sign;
              bool all_gain = true, some_gain = false, some_lose = false;
              for (std::size_t k = 0; k < t; ++k) {
                int c = sign[k][static_cast<std::size_t>(scheme.numerators()[k])];
                all_gain = all_gain && c > 0;
                some_gain = some_gain || c > 0;
                some_lose = some_lose || c < 0;
              }
              if (grade == Axiom::A4c ? !all_gain : (!some_gain || some_lose)) continue;
            }
            auto members = member_utilities(merged, x, merge, scheme, opts.utilities, rule.semantics());
            auto margin = detail::collusion_violation(grade, members);
            if (!margin) continue;
            const MemberUtility* pick = &members.front();
            for (const auto& m : members) {
              bool better = grade == Axiom::A4c ? m.gain().value() < pick->gain().value()
                                                : m.gain().value() > pick->gain().value();
              if (better) pick = &m;
            }
            Witness w;
            w.kind = Witness::Kind::Merge;
            w.base = h;
            w.coalition = merge.members;
            w.merged_rate = merge.merged_rate;
            w.scheme = scheme.spec();
            w.lhs = pick->coalition.value();
            w.rhs = pick->baseline.value();
            w.margin = margin->value();
            w.inequality = std::string(grade == Axiom::A4c ? "every member gains; weakest: " : "Pareto gain; largest: ") +
                           "member " + std::to_string(pick->miner + 1) + " coalition utility " + detail::fmt(w.lhs) +
                           " > baseline " + detail::fmt(w.rhs);
            r.witness = std::move(w);
            return false;
          }
          return true;
        });
        return r;
      },
      verdict);
  return verdict;
}

/// Dispatches one axiom check.
inline AxiomVerdict check_axiom(const AllocationRule& rule, const Universe& universe, Axiom axiom,
                                const CheckOptions& opts = {}) {
  switch (axiom) {
    case Axiom::A1: return check_symmetry(rule, universe, opts);
    case Axiom::A2a: return check_budget(rule, universe, BudgetMode::Strong, opts);
    case Axiom::A2b: return check_budget(rule, universe, BudgetMode::Weak, opts);
    case Axiom::A3: return check_sybil_proofness(rule, universe, opts);
    default: return check_collusion(rule, universe, axiom, opts);
  }
}

/// Recomputes a Fail witness from scratch. Returns the violation margin when
/// the violated inequality is reproduced, nullopt otherwise.
inline std::optional<double> replay_witness(const AllocationRule& rule, const AxiomVerdict& verdict,
                                            const UtilityProfile& utilities = {}) {
  if (verdict.pass || !verdict.witness) return std::nullopt;
  const Witness& w = *verdict.witness;
  const Configuration& h = w.base;
  const Allocation x = rule.evaluate(h);

  switch (verdict.axiom) {
    case Axiom::A1: {
      if (w.permutation.size() != h.size()) return std::nullopt;
      std::vector<HashRate> permuted;
      for (auto k : w.permutation) permuted.push_back(h[k]);
      const Allocation xp = rule.evaluate(Configuration(permuted));
      double worst = 0;
      for (std::size_t k = 0; k < h.size(); ++k) {
        if (compare(xp[k], x[w.permutation[k]]) != 0) worst = std::max(worst, std::abs((xp[k] - x[w.permutation[k]]).value()));
      }
      return worst > 0 ? std::optional<double>(worst) : std::nullopt;
    }
    case Axiom::A2a:
    case Axiom::A2b: {
      Scalar total = x.sum();
      int c = compare(total, Scalar(1), kBudgetTolerance);
      if (verdict.axiom == Axiom::A2a) return c != 0 ? std::optional<double>(std::abs(total.value() - 1)) : std::nullopt;
      return c > 0 ? std::optional<double>(total.value() - 1) : std::nullopt;
    }
    case Axiom::A3: {
      SybilSplit split{h, w.miner, w.parts};
      Configuration derived = split.derived();
      const Allocation xd = rule.evaluate(derived);
      Scalar total(0);
      for (std::size_t j = h.size() - 1; j < derived.size(); ++j) total += xd[j];
      if (!strictly_greater(total, x[w.miner])) return std::nullopt;
      return (total - x[w.miner]).value();
    }
    default: {
      CoalitionMerge merge{h, w.coalition, w.merged_rate};
      if (merge.merged_rate < 1 || merge.merged_rate > merge.coalition_rate()) return std::nullopt;
      const Scalar merged = rule.evaluate(merge.derived())[merge.merged_position()];
      if (w.scheme == "transferable") {
        Scalar before(0);
        for (auto k : merge.members) before += x[k];
        if (!strictly_greater(merged, before)) return std::nullopt;
        return (merged - before).value();
      }
      auto members = member_utilities(merged, x, merge, parse_sharing_scheme(w.scheme), utilities, rule.semantics());
      auto margin = detail::collusion_violation(verdict.axiom, members);
      return margin ? std::optional<double>(margin->value()) : std::nullopt;
    }
  }
}

// JSON serialization -------------------------------------------------------

inline nlohmann::json to_json(const Witness& w) {
  nlohmann::json j;
  auto one_based = [](const std::vector<std::size_t>& v) {
    std::vector<std::size_t> out;
    for (auto k : v) out.push_back(k + 1);
    return out;
  };
  j["configuration"] = std::vector<HashRate>(w.base.begin(), w.base.end());
  switch (w.kind) {
    case Witness::Kind::Permutation:
      j["kind"] = "permutation";
      j["permutation"] = one_based(w.permutation);
      break;
    case Witness::Kind::Budget: j["kind"] = "budget"; break;
    case Witness::Kind::Split:
      j["kind"] = "split";
      j["miner"] = w.miner + 1;
      j["parts"] = w.parts;
      break;
    case Witness::Kind::Merge:
      j["kind"] = "merge";
      j["coalition"] = one_based(w.coalition);
      j["merged_rate"] = w.merged_rate;
      j["scheme"] = w.scheme;
      break;
  }
  if (auto d = w.derived()) j["derived"] = std::vector<HashRate>(d->begin(), d->end());
  j["inequality"] = w.inequality;
  j["lhs"] = w.lhs;
  j["rhs"] = w.rhs;
  j["margin"] = w.margin;
  return j;
}

inline Witness witness_from_json(const nlohmann::json& j) {
  Witness w;
  w.base = Configuration(j.at("configuration").get<std::vector<HashRate>>());
  auto zero_based = [](std::vector<std::size_t> v) {
    for (auto& k : v) {
      if (k == 0) throw std::invalid_argument("witness indices are 1-based");
      --k;
    }
    return v;
  };
  const std::string kind = j.at("kind").get<std::string>();
  if (kind == "permutation") {
    w.kind = Witness::Kind::Permutation;
    w.permutation = zero_based(j.at("permutation").get<std::vector<std::size_t>>());
  } else if (kind == "budget") {
    w.kind = Witness::Kind::Budget;
  } else if (kind == "split") {
    w.kind = Witness::Kind::Split;
    w.miner = j.at("miner").get<std::size_t>() - 1;
    w.parts = j.at("parts").get<std::vector<HashRate>>();
  } else if (kind == "merge") {
    w.kind = Witness::Kind::Merge;
    w.coalition = zero_based(j.at("coalition").get<std::vector<std::size_t>>());
    w.merged_rate = j.at("merged_rate").get<HashRate>();
    w.scheme = j.at("scheme").get<std::string>();
  } else {
    throw std::invalid_argument("unknown witness kind '" + kind + "'");
  }
  w.inequality = j.value("inequality", "");
  w.lhs = j.value("lhs", 0.0);
  w.rhs = j.value("rhs", 0.0);
  w.margin = j.value("margin", 0.0);
  return w;
}

inline nlohmann::json to_json(const AxiomVerdict& v) {
  nlohmann::json j;
  j["axiom"] = std::string(to_string(v.axiom));
  j["rule"] = v.rule;
  j["semantics"] = std::string(to_string(v.semantics));
  j["universe"] = {{"max_miners", v.universe.max_miners}, {"max_total", v.universe.max_total}};
  j["utility"] = v.utility;
  j["scope"] = v.scope;
  j["result"] = v.pass ? "pass" : "fail";
  j["deviations_checked"] = v.deviations_checked;
  j["deviations_skipped"] = v.deviations_skipped;
  j["witness"] = v.witness ? to_json(*v.witness) : nlohmann::json(nullptr);
  return j;
}

inline AxiomVerdict verdict_from_json(const nlohmann::json& j) {
  AxiomVerdict v;
  v.axiom = parse_axiom(j.at("axiom").get<std::string>());
  v.rule = j.at("rule").get<std::string>();
  v.semantics = parse_semantics(j.at("semantics").get<std::string>());
  v.universe.max_miners = j.at("universe").at("max_miners").get<std::size_t>();
  v.universe.max_total = j.at("universe").at("max_total").get<HashRate>();
  v.utility = j.value("utility", "risk-neutral");
  v.scope = j.value("scope", "");
  v.pass = j.at("result").get<std::string>() == "pass";
  v.deviations_checked = j.value("deviations_checked", std::size_t{0});
  v.deviations_skipped = j.value("deviations_skipped", std::size_t{0});
  if (!j.at("witness").is_null()) v.witness = witness_from_json(j.at("witness"));
  return v;
}

// Axiom matrix ---------------------------------------------------------------

struct MatrixRow {
  std::string label;
  AllocationRule rule;
  std::map<Axiom, AxiomVerdict> verdicts;
  std::map<Axiom, bool> claims;  // closed under implications
};

struct MatrixReport {
  Universe universe;
  std::string utility;
  std::vector<MatrixRow> rows;
  std::vector<std::string> discrepancies;  // claim mismatches
  std::vector<std::string> order_violations;  // Fail(A4c) => Fail(A4b) => Fail(A4a) broken

  bool matches_claims() const { return discrepancies.empty(); }
  bool grade_order_holds() const { return order_violations.empty(); }
};

/// Runs every axiom for every entry; mismatches with the entries' claims are
/// reported, not thrown.
inline MatrixReport axiom_matrix(const std::vector<CatalogEntry>& entries, const Universe& universe,
                                 const CheckOptions& opts = {}) {
  MatrixReport report;
  report.universe = universe;
  report.utility = opts.utilities.spec();
  for (const auto& entry : entries) {
    MatrixRow row{entry.label, entry.rule, {}, implied_claims(entry.claims)};
    for (Axiom a : kAllAxioms) row.verdicts.emplace(a, check_axiom(entry.rule, universe, a, opts));
    for (const auto& [axiom, expected] : row.claims) {
      const bool got = row.verdicts.at(axiom).pass;
      if (got != expected) {
        report.discrepancies.push_back(entry.label + " " + std::string(to_string(axiom)) + ": claimed " +
                                       (expected ? "pass" : "fail") + ", checker says " + (got ? "pass" : "fail"));
      }
    }
    auto fails = [&](Axiom a) { return !row.verdicts.at(a).pass; };
    if (fails(Axiom::A4c) && !fails(Axiom::A4b)) report.order_violations.push_back(entry.label + ": A4c fails but A4b passes");
    if (fails(Axiom::A4b) && !fails(Axiom::A4a)) report.order_violations.push_back(entry.label + ": A4b fails but A4a passes");
    report.rows.push_back(std::move(row));
  }
  return report;
}

inline std::string format_matrix(const MatrixReport& report) {
  std::ostringstream os;
  os << "universe " << report.universe.to_string() << ", utility " << report.utility << "\n";
  os << std::left;
  std::size_t width = 10;
  for (const auto& row : report.rows) width = std::max(width, row.label.size() + 2);
  os.width(static_cast<std::streamsize>(width));
  os << "rule";
  for (Axiom a : kAllAxioms) {
    os.width(6);
    os << to_string(a);
  }
  os << "\n";
  for (const auto& row : report.rows) {
    os.width(static_cast<std::streamsize>(width));
    os << row.label;
    for (Axiom a : kAllAxioms) {
      std::string cell = row.verdicts.at(a).pass ? "pass" : "FAIL";
      auto claim = row.claims.find(a);
      if (claim != row.claims.end() && claim->second != row.verdicts.at(a).pass) cell += "!";
      os.width(6);
      os << cell;
    }
    os << "\n";
  }
  for (const auto& d : report.discrepancies) os << "DISCREPANCY " << d << "\n";
  for (const auto& d : report.order_violations) os << "ORDER " << d << "\n";
  return os.str();
}

inline nlohmann::json to_json(const MatrixReport& report) {
  nlohmann::json j;
  j["universe"] = {{"max_miners", report.universe.max_miners}, {"max_total", report.universe.max_total}};
  j["utility"] = report.utility;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["label"] = row.label;
    r["rule"] = row.rule.name();
    for (const auto& [a, v] : row.verdicts) r["verdicts"][std::string(to_string(a))] = to_json(v);
    for (const auto& [a, c] : row.claims) r["claims"][std::string(to_string(a))] = c ? "pass" : "fail";
    j["rows"].push_back(r);
  }
  j["discrepancies"] = report.discrepancies;
  j["order_violations"] = report.order_violations;
  return j;
}

}  // namespace blockaxioms
