#pragma once

#include "axioms.hpp"
#include "configuration.hpp"
#include "deviations.hpp"
#include "rules.hpp"
#include "utility.hpp"

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <tuple>
#include <numeric>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockaxioms {

/// Raised before enumeration when a search would be intractable.
class SearchBoundsExceeded : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

inline std::int64_t lcm_up_to(HashRate m) {
  std::int64_t l = 1;
  for (HashRate k = 2; k <= m; ++k) l = std::lcm(l, k);
  return l;
}

/// Exact table of `rule` over the universe's representatives. Throws if a
/// value is irrational or off the 1/grid lattice.
inline RuleTable tabulate(const AllocationRule& rule, const Universe& universe, std::int64_t grid) {
  RuleTable table(universe, grid);
  for (const auto& rep : universe.representatives()) {
    Allocation x = rule.evaluate(rep);
    std::vector<std::int64_t> nums;
    for (const auto& v : x) {
      if (!v.is_exact()) throw std::domain_error(rule.name() + " is not rational-valued at " + rep.to_string());
      Rational scaled = v.exact() * grid;
      if (scaled.denominator() != 1)
        throw std::domain_error(rule.name() + " is off the 1/" + std::to_string(grid) + " grid at " + rep.to_string());
      nums.push_back(scaled.numerator());
    }
    table.set(rep, std::move(nums));
  }
  return table;
}

/// Axioms a table must satisfy; symmetry holds by construction.
struct AxiomSet {
  BudgetMode budget = BudgetMode::Strong;
  bool sybil_proof = true;
  std::vector<Axiom> collusion;  // subset of {A4a, A4b, A4c}, risk-neutral

  std::vector<Axiom> axioms() const {
    std::vector<Axiom> out{Axiom::A1, budget == BudgetMode::Strong ? Axiom::A2a : Axiom::A2b};
    if (sybil_proof) out.push_back(Axiom::A3);
    out.insert(out.end(), collusion.begin(), collusion.end());
    return out;
  }

  std::string to_string() const {
    std::string s;
    for (Axiom a : axioms()) s += (s.empty() ? "" : ",") + std::string(blockaxioms::to_string(a));
    return s;
  }
};

inline AxiomSet uniqueness_axioms() { return {BudgetMode::Strong, true, {Axiom::A4c}}; }
inline AxiomSet scaled_proportional_axioms() { return {BudgetMode::Weak, true, {Axiom::A4b}}; }

struct SearchReport {
  std::string title;
  AxiomSet axioms;
  Universe universe;
  std::int64_t grid = 1;
  std::vector<RuleTable> survivors;
  std::vector<std::map<HashRate, Rational>> scaling;  // recovered c(m) per survivor
  std::size_t nodes_visited = 0;
  std::size_t constraints = 0;
  std::size_t constraints_outside_universe = 0;
  bool survivors_reverified = false;
  bool prediction_holds = false;
  std::vector<std::string> notes;
};

namespace detail {

/// Backtracking search over symmetric grid tables, one sorted
/// representative at a time, ordered by number of entries > 1 then total.
class TableSearch {
 public:
  TableSearch(const Universe& universe, std::int64_t grid, const AxiomSet& axioms)
      : universe_(universe), grid_(grid), axioms_(axioms) {
    reps_ = universe.representatives();
    std::stable_sort(reps_.begin(), reps_.end(), [](const Configuration& a, const Configuration& b) {
      if (a.heavy_count() != b.heavy_count()) return a.heavy_count() < b.heavy_count();
      if (a.total() != b.total()) return a.total() < b.total();
      return a < b;
    });
    for (std::size_t k = 0; k < reps_.size(); ++k) {
      index_[std::vector<HashRate>(reps_[k].begin(), reps_[k].end())] = k;
      groups_.push_back(distinct_rates(reps_[k]));
    }
    build_candidates();
    build_constraints();
  }

  const std::vector<Configuration>& representatives() const { return reps_; }
  const std::vector<std::vector<std::vector<std::int64_t>>>& candidates() const { return candidates_; }
  std::size_t constraint_count() const { return constraint_count_; }
  std::size_t outside_universe() const { return outside_; }

  std::vector<RuleTable> run(std::size_t& nodes) {
    assignment_.assign(reps_.size(), nullptr);
    survivors_.clear();
    nodes_ = 0;
    dfs(0);
    nodes = nodes_;
    return std::move(survivors_);
  }

 private:
  struct Group {
    HashRate rate;
    std::int64_t count;
  };

  // One constraint between a base representative and a derived one. For
  // splits, `member_counts` holds the sybil parts; for merges, the coalition.
  struct Constraint {
    enum class Kind { Split, Merge } kind;
    std::size_t base;
    std::size_t derived;
    HashRate split_rate = 0;
    std::vector<Group> parts;  // split parts or coalition members by rate
    HashRate coalition_rate = 0;
    HashRate merged_rate = 0;
  };

  static std::vector<Group> distinct_rates(const Configuration& rep) {
    std::vector<Group> out;
    for (HashRate r : rep) {
      if (!out.empty() && out.back().rate == r)
        ++out.back().count;
      else
        out.push_back({r, 1});
    }
    return out;
  }

  void build_candidates() {
    candidates_.resize(reps_.size());
    for (std::size_t k = 0; k < reps_.size(); ++k) {
      const auto& groups = groups_[k];
      std::vector<std::int64_t> values(groups.size(), 0);
      std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t g, std::int64_t used) {
        if (g == groups.size()) {
          if (axioms_.budget == BudgetMode::Weak || used == grid_) candidates_[k].push_back(values);
          return;
        }
        for (std::int64_t v = 0; used + v * groups[g].count <= grid_; ++v) {
          values[g] = v;
          rec(g + 1, used + v * groups[g].count);
        }
      };
      rec(0, 0);
    }
  }

  std::optional<std::size_t> lookup(const Configuration& h) const {
    auto key = std::vector<HashRate>(h.begin(), h.end());
    std::sort(key.begin(), key.end(), std::greater<>());
    auto it = index_.find(key);
    if (it == index_.end()) return std::nullopt;
    return it->second;
  }

  void add(Constraint c) {
    std::size_t slot = std::max(c.base, c.derived);
    constraints_.resize(reps_.size());
    constraints_[slot].push_back(std::move(c));
    ++constraint_count_;
  }

  void build_constraints() {
    constraints_.resize(reps_.size());
    const bool any_collusion = !axioms_.collusion.empty();
    std::set<std::tuple<std::size_t, std::size_t, HashRate, std::vector<HashRate>>> seen_splits;
    std::set<std::tuple<std::size_t, std::size_t, std::vector<std::pair<HashRate, std::int64_t>>, HashRate>> seen_merges;

    for (std::size_t b = 0; b < reps_.size(); ++b) {
      const Configuration& rep = reps_[b];
      const auto& groups = groups_[b];

      if (axioms_.sybil_proof) {
        // One miner per distinct rate suffices by symmetry.
        std::size_t pos = 0;
        for (const auto& g : groups) {
          for_each_sybil_split(rep, pos, [&](const SybilSplit& split) {
            auto d = lookup(split.derived());
            if (!d) {
              ++outside_;
              return true;
            }
            if (!seen_splits.insert({b, *d, g.rate, split.parts}).second) return true;
            Constraint c{Constraint::Kind::Split, b, *d};
            c.split_rate = g.rate;
            for (HashRate p : split.parts) {
              if (!c.parts.empty() && c.parts.back().rate == p)
                ++c.parts.back().count;
              else
                c.parts.push_back({p, 1});
            }
            add(std::move(c));
            return true;
          });
          pos += static_cast<std::size_t>(g.count);
        }
      }

      if (any_collusion) {
        for_each_coalition_merge(rep, [&](const CoalitionMerge& merge) {
          std::vector<std::pair<HashRate, std::int64_t>> members;
          for (auto k : merge.members) {
            if (!members.empty() && members.back().first == rep[k])
              ++members.back().second;
            else
              members.emplace_back(rep[k], 1);
          }
          auto d = lookup(merge.derived());
          if (!d) {
            ++outside_;
            return true;
          }
          if (!seen_merges.insert({b, *d, members, merge.merged_rate}).second) return true;
          Constraint c{Constraint::Kind::Merge, b, *d};
          for (const auto& [rate, count] : members) c.parts.push_back({rate, count});
          c.coalition_rate = merge.coalition_rate();
          c.merged_rate = merge.merged_rate;
          add(std::move(c));
          return true;
        });
      }
    }
  }

  std::int64_t value(std::size_t rep, HashRate rate) const {
    const auto& groups = groups_[rep];
    for (std::size_t g = 0; g < groups.size(); ++g)
      if (groups[g].rate == rate) return (*assignment_[rep])[g];
    throw std::logic_error("rate not present in representative");
  }

  // Values are numerators over the common grid, so every test is integral.
  bool satisfied(const Constraint& c) const {
    if (c.kind == Constraint::Kind::Split) {
      std::int64_t sybil_total = 0;
      for (const auto& p : c.parts) sybil_total += p.count * value(c.derived, p.rate);
      return sybil_total <= value(c.base, c.split_rate);
    }
    const std::int64_t merged = value(c.derived, c.merged_rate);
    for (Axiom grade : axioms_.collusion) {
      if (grade == Axiom::A4a) {
        std::int64_t before = 0;
        for (const auto& p : c.parts) before += p.count * value(c.base, p.rate);
        if (merged > before) return false;
        continue;
      }
      // Member with rate r: merged * r / coalition_rate vs value(base, r).
      bool all_gain = true, some_gain = false, some_lose = false;
      for (const auto& p : c.parts) {
        std::int64_t lhs = merged * p.rate;
        std::int64_t rhs = value(c.base, p.rate) * c.coalition_rate;
        all_gain = all_gain && lhs > rhs;
        some_gain = some_gain || lhs > rhs;
        some_lose = some_lose || lhs < rhs;
      }
      if (grade == Axiom::A4c && all_gain) return false;
      if (grade == Axiom::A4b && some_gain && !some_lose) return false;
    }
    return true;
  }

  void dfs(std::size_t pos) {
    ++nodes_;
    if (pos == reps_.size()) {
      RuleTable table(universe_, grid_);
      for (std::size_t k = 0; k < reps_.size(); ++k) {
        std::vector<std::int64_t> nums;
        for (std::size_t g = 0; g < groups_[k].size(); ++g)
          for (std::int64_t c = 0; c < groups_[k][g].count; ++c) nums.push_back((*assignment_[k])[g]);
        table.set(reps_[k], std::move(nums));
      }
      survivors_.push_back(std::move(table));
      return;
    }
    for (const auto& candidate : candidates_[pos]) {
      assignment_[pos] = &candidate;
      bool ok = std::all_of(constraints_[pos].begin(), constraints_[pos].end(),
                            [&](const Constraint& c) { return satisfied(c); });
      if (ok) dfs(pos + 1);
    }
    assignment_[pos] = nullptr;
  }

  Universe universe_;
  std::int64_t grid_;
  AxiomSet axioms_;
  std::vector<Configuration> reps_;
  std::map<std::vector<HashRate>, std::size_t> index_;
  std::vector<std::vector<Group>> groups_;
  std::vector<std::vector<std::vector<std::int64_t>>> candidates_;
  std::vector<std::vector<Constraint>> constraints_;
  std::vector<const std::vector<std::int64_t>*> assignment_;
  std::vector<RuleTable> survivors_;
  std::size_t constraint_count_ = 0;
  std::size_t outside_ = 0;
  std::size_t nodes_ = 0;
};

inline void check_search_bounds(const Universe& universe, std::int64_t grid) {
  universe.validate();
  if (universe.max_total > 5)
    throw SearchBoundsExceeded("rule-space search needs max_total <= 5, got " + std::to_string(universe.max_total));
  if (grid < 1 || grid > 60) throw SearchBoundsExceeded("rule-space search needs grid <= 60, got " + std::to_string(grid));
  if (grid % lcm_up_to(universe.max_total) != 0)
    throw SearchBoundsExceeded("grid " + std::to_string(grid) + " must be divisible by lcm(1.." +
                               std::to_string(universe.max_total) + ") = " + std::to_string(lcm_up_to(universe.max_total)));
}

/// Re-checks every survivor through the axiom engine.
inline bool reverify(const std::vector<RuleTable>& survivors, const AxiomSet& axioms, const Universe& universe) {
  for (std::size_t k = 0; k < survivors.size(); ++k) {
    auto rule = AllocationRule::tabulated("survivor-" + std::to_string(k), survivors[k]);
    for (Axiom a : axioms.axioms())
      if (!check_axiom(rule, universe, a).pass) return false;
  }
  return true;
}

}  // namespace detail

/// All symmetric grid tables over `universe` satisfying `axioms`.
inline SearchReport search_tables(const Universe& universe, std::int64_t grid, const AxiomSet& axioms,
                                  std::string title = "table search") {
  detail::check_search_bounds(universe, grid);
  SearchReport report;
  report.title = std::move(title);
  report.axioms = axioms;
  report.universe = universe;
  report.grid = grid;
  detail::TableSearch search(universe, grid, axioms);
  report.constraints = search.constraint_count();
  report.constraints_outside_universe = search.outside_universe();
  report.survivors = search.run(report.nodes_visited);
  std::sort(report.survivors.begin(), report.survivors.end(),
            [](const RuleTable& a, const RuleTable& b) { return a.to_string() < b.to_string(); });
  report.survivors_reverified = detail::reverify(report.survivors, axioms, universe);
  if (universe.max_miners < static_cast<std::size_t>(universe.max_total))
    report.notes.push_back("universe lacks all-1 tuples of every total; uniqueness cannot be certified");
  return report;
}

/// Symmetric + strongly budget-balanced + sybil-proof + weakly
/// collusion-proof tables. Predicted: only the proportional table.
inline SearchReport search_proportional_uniqueness(const Universe& universe, std::int64_t grid, const AxiomSet& axioms) {
  auto report = search_tables(universe, grid, axioms, "uniqueness of the proportional rule");
  RuleTable proportional = tabulate(AllocationRule::proportional(), universe, grid);
  report.prediction_holds =
      report.survivors.size() == 1 && report.survivors.front() == proportional && report.survivors_reverified;
  return report;
}

inline SearchReport search_proportional_uniqueness(const Universe& universe, std::int64_t grid) {
  return search_proportional_uniqueness(universe, grid, uniqueness_axioms());
}

/// Recovers c(m) from a table: the single miner of rate m receives c(m).
/// Returns nullopt when the table is not c(m) * h_i / m for nondecreasing c.
inline std::optional<std::map<HashRate, Rational>> recover_scaling(const RuleTable& table) {
  std::map<HashRate, Rational> c;
  for (const auto& [key, nums] : table.entries()) {
    if (key.size() == 1) c[key[0]] = Rational(nums[0], table.grid());
  }
  for (const auto& [key, nums] : table.entries()) {
    HashRate m = std::accumulate(key.begin(), key.end(), HashRate{0});
    auto it = c.find(m);
    if (it == c.end()) return std::nullopt;
    for (std::size_t k = 0; k < key.size(); ++k)
      if (Rational(nums[k], table.grid()) != it->second * Rational(key[k], m)) return std::nullopt;
  }
  const Rational* prev = nullptr;
  for (const auto& [m, v] : c) {
    if (prev && v < *prev) return std::nullopt;
    prev = &v;
  }
  return c;
}

/// Every generalized proportional table with nondecreasing c on the grid
/// whose entries are themselves on the grid.
inline std::vector<RuleTable> generalized_proportional_tables(const Universe& universe, std::int64_t grid,
                                                              std::size_t* unrepresentable = nullptr) {
  std::vector<RuleTable> out;
  std::vector<std::int64_t> c(static_cast<std::size_t>(universe.max_total), 0);
  std::size_t skipped = 0;
  std::function<void(std::size_t, std::int64_t)> rec = [&](std::size_t m, std::int64_t low) {
    if (m == c.size()) {
      std::map<HashRate, Rational> table;
      for (std::size_t k = 0; k < c.size(); ++k) table[static_cast<HashRate>(k + 1)] = Rational(c[k], grid);
      try {
        out.push_back(tabulate(AllocationRule::generalized_proportional(ScalingFunction::table(table)), universe, grid));
      } catch (const std::domain_error&) {
        ++skipped;
      }
      return;
    }
    for (std::int64_t v = low; v <= grid; ++v) {
      c[m] = v;
      rec(m + 1, v);
    }
  };
  rec(0, 0);
  if (unrepresentable) *unrepresentable = skipped;
  return out;
}

/// Symmetric + weakly budget-balanced + sybil-proof + strongly
/// collusion-proof tables. Predicted: exactly the generalized proportional
/// tables with nondecreasing c.
inline SearchReport search_scaled_proportional(const Universe& universe, std::int64_t grid) {
  auto report = search_tables(universe, grid, scaled_proportional_axioms(), "generalized proportional characterization");
  bool all_generalized = true;
  for (const auto& table : report.survivors) {
    auto c = recover_scaling(table);
    if (!c) {
      all_generalized = false;
      report.scaling.emplace_back();
    } else {
      report.scaling.push_back(*c);
    }
  }
  std::size_t unrepresentable = 0;
  auto expected = generalized_proportional_tables(universe, grid, &unrepresentable);
  bool all_survive = std::all_of(expected.begin(), expected.end(), [&](const RuleTable& t) {
    return std::find(report.survivors.begin(), report.survivors.end(), t) != report.survivors.end();
  });
  report.notes.push_back(std::to_string(expected.size()) + " nondecreasing on-grid c give on-grid tables; " +
                         std::to_string(unrepresentable) + " are off-grid and not representable");
  report.prediction_holds = all_generalized && all_survive && expected.size() == report.survivors.size() &&
                            report.survivors_reverified;
  return report;
}

inline std::string format_report(const SearchReport& report) {
  std::ostringstream os;
  os << report.title << ": axioms {" << report.axioms.to_string() << "} over " << report.universe.to_string()
     << ", grid 1/" << report.grid << "\n";
  os << "  nodes visited " << report.nodes_visited << ", constraints " << report.constraints
     << " (" << report.constraints_outside_universe << " deviations leave the universe)\n";
  os << "  survivors: " << report.survivors.size() << (report.survivors_reverified ? " (re-verified)" : " (RE-VERIFY FAILED)")
     << "\n";
  for (std::size_t k = 0; k < report.survivors.size(); ++k) {
    os << "    " << report.survivors[k].to_string();
    if (k < report.scaling.size() && !report.scaling[k].empty()) {
      os << "  c=";
      for (const auto& [m, v] : report.scaling[k]) os << (m == 1 ? "" : ",") << format_rational(v);
    }
    os << "\n";
  }
  for (const auto& n : report.notes) os << "  note: " << n << "\n";
  os << "  prediction " << (report.prediction_holds ? "holds" : "DOES NOT HOLD") << "\n";
  return os.str();
}

inline nlohmann::json to_json(const SearchReport& report) {
  nlohmann::json j;
  j["title"] = report.title;
  j["axioms"] = report.axioms.to_string();
  j["universe"] = {{"max_miners", report.universe.max_miners}, {"max_total", report.universe.max_total}};
  j["grid"] = report.grid;
  j["nodes_visited"] = report.nodes_visited;
  j["constraints"] = report.constraints;
  j["constraints_outside_universe"] = report.constraints_outside_universe;
  j["survivors"] = nlohmann::json::array();
  for (std::size_t k = 0; k < report.survivors.size(); ++k) {
    nlohmann::json s;
    for (const auto& [key, nums] : report.survivors[k].entries()) {
      std::vector<std::string> vals;
      for (auto n : nums) vals.push_back(format_rational(Rational(n, report.grid)));
      s["table"][Configuration(key).to_string()] = vals;
    }
    if (k < report.scaling.size())
      for (const auto& [m, v] : report.scaling[k]) s["scaling"][std::to_string(m)] = format_rational(v);
    j["survivors"].push_back(s);
  }
  j["survivors_reverified"] = report.survivors_reverified;
  j["prediction_holds"] = report.prediction_holds;
  j["notes"] = report.notes;
  return j;
}

// Risk-averse impossibility ---------------------------------------------

struct ImpossibilityRow {
  std::string label;
  bool nonzero = false;
  std::vector<AxiomVerdict> verdicts;            // A1, A2b, A3, utility-A4c
  std::optional<AxiomVerdict> first_violation;   // earliest failing verdict in that order
  std::optional<AxiomVerdict> pair_witness;      // split into two halves, merge back
  bool pair_witness_replays = false;
};

struct ImpossibilityReport {
  Universe universe;
  std::string utility;
  std::vector<ImpossibilityRow> rows;
  bool prediction_holds = false;
};

namespace detail {

/// The proof's construction: a miner with positive reward and even rate
/// splits into two halves; the halves merge back under proportional sharing.
inline std::optional<AxiomVerdict> pair_construction(const AllocationRule& rule, const Universe& universe,
                                                     const UtilityProfile& profile) {
  for (const auto& h : universe.enumerate()) {
    if (!rule.defined_at(h)) continue;
    Allocation x = rule.evaluate(h);
    for (std::size_t i = 0; i < h.size(); ++i) {
      if (h[i] % 2 != 0 || is_zero(x[i])) continue;
      SybilSplit split{h, i, {h[i] / 2, h[i] / 2}};
      Configuration halves = split.derived();
      if (!universe.contains(halves) || !rule.defined_at(halves)) continue;
      CoalitionMerge merge{halves, {halves.size() - 2, halves.size() - 1}, h[i]};
      if (!rule.defined_at(merge.derived())) continue;
      Allocation xh = rule.evaluate(halves);
      Scalar merged = rule.evaluate(merge.derived())[merge.merged_position()];
      auto members = member_utilities(merged, xh, merge, SharingScheme::proportional(), profile, rule.semantics());
      auto margin = collusion_violation(Axiom::A4c, members);
      AxiomVerdict v = make_verdict(Axiom::A4c, rule, universe, profile, "split-and-merge construction");
      v.pass = !margin.has_value();
      Witness w;
      w.kind = Witness::Kind::Merge;
      w.base = halves;
      w.coalition = merge.members;
      w.merged_rate = merge.merged_rate;
      w.scheme = "proportional";
      w.lhs = members.front().coalition.value();
      w.rhs = members.front().baseline.value();
      w.margin = margin ? margin->value() : 0.0;
      w.inequality = "each half: " + fmt(w.lhs) + " vs " + fmt(w.rhs);
      if (margin) v.witness = w;
      return v;
    }
  }
  return std::nullopt;
}

}  // namespace detail

/// For a strictly concave U, every nonzero rule should fail one of A1, A2b,
/// A3 or utility-A4c. Rules passing A1/A2b/A3 must also fail the two-way
/// split-and-merge construction.
inline ImpossibilityReport verify_risk_averse_impossibility(const Universe& universe, const std::vector<CatalogEntry>& rules,
                                           const UtilityFunction& u, const CheckOptions& base_opts = {}) {
  if (u.shape() != UtilityFunction::Shape::StrictlyConcave)
    throw std::invalid_argument("risk-averse impossibility needs a strictly concave utility, got " + u.spec());
  ImpossibilityReport report;
  report.universe = universe;
  report.utility = u.spec();
  const UtilityProfile profile = UtilityProfile::uniform(u);
  CheckOptions neutral = base_opts;
  neutral.utilities = {};
  CheckOptions averse = base_opts;
  averse.utilities = profile;

  bool all_ok = true;
  for (const auto& entry : rules) {
    ImpossibilityRow row;
    row.label = entry.label;
    const AllocationRule rule = entry.rule.with_semantics(Semantics::Randomized);
    for (const auto& h : universe.enumerate())
      if (rule.defined_at(h) && !rule.evaluate(h).is_zero()) row.nonzero = true;
    if (!row.nonzero) {
      report.rows.push_back(std::move(row));
      continue;
    }
    row.verdicts.push_back(check_symmetry(rule, universe, neutral));
    row.verdicts.push_back(check_budget(rule, universe, BudgetMode::Weak, neutral));
    row.verdicts.push_back(check_sybil_proofness(rule, universe, neutral));
    row.verdicts.push_back(check_collusion(rule, universe, Axiom::A4c, averse));
    for (const auto& v : row.verdicts)
      if (!v.pass && !row.first_violation) row.first_violation = v;

    bool base_axioms_pass = row.verdicts[0].pass && row.verdicts[1].pass && row.verdicts[2].pass;
    if (base_axioms_pass) {
      row.pair_witness = detail::pair_construction(rule, universe, profile);
      row.pair_witness_replays = row.pair_witness && !row.pair_witness->pass &&
                                 replay_witness(rule, *row.pair_witness, profile).value_or(0.0) > kStrictTolerance;
      if (row.pair_witness) all_ok = all_ok && row.pair_witness_replays;
    }
    all_ok = all_ok && row.first_violation.has_value();
    report.rows.push_back(std::move(row));
  }
  report.prediction_holds = all_ok;
  return report;
}

// Risk-seeking possibility ----------------------------------------------

struct PossibilityRow {
  std::string utility;
  bool expect_pass = true;  // false for concave negative controls
  std::vector<AxiomVerdict> verdicts;  // A1, A2a, A3, utility-A4a
  bool as_expected = false;
};

struct PossibilityReport {
  Universe universe;
  std::string sharing_family;
  std::vector<PossibilityRow> rows;
  bool prediction_holds = false;
};

/// Randomized proportional rule against utility-A4a over the declared
/// sharing family, for each utility alone and for a mixed profile of all
/// the convex ones. Concave utilities act as negative controls.
inline PossibilityReport verify_risk_seeking_possibility(const Universe& universe, const std::vector<UtilityFunction>& utilities,
                                         const CheckOptions& base_opts = {}) {
  PossibilityReport report;
  report.universe = universe;
  report.sharing_family = describe_sharing_family(base_opts.sharing_grid);
  const AllocationRule rule = AllocationRule::proportional();

  std::vector<std::pair<UtilityProfile, bool>> profiles;
  std::vector<UtilityFunction> convex;
  for (const auto& u : utilities) {
    bool risk_seeking_or_neutral = u.shape() != UtilityFunction::Shape::StrictlyConcave;
    profiles.emplace_back(UtilityProfile::uniform(u), risk_seeking_or_neutral);
    if (risk_seeking_or_neutral) convex.push_back(u);
  }
  if (convex.size() > 1) profiles.emplace_back(UtilityProfile(convex), true);

  CheckOptions neutral = base_opts;
  neutral.utilities = {};
  bool all_ok = true;
  for (const auto& [profile, expect_pass] : profiles) {
    PossibilityRow row;
    row.utility = profile.spec();
    row.expect_pass = expect_pass;
    CheckOptions opts = base_opts;
    opts.utilities = profile;
    row.verdicts.push_back(check_symmetry(rule, universe, neutral));
    row.verdicts.push_back(check_budget(rule, universe, BudgetMode::Strong, neutral));
    row.verdicts.push_back(check_sybil_proofness(rule, universe, opts));
    row.verdicts.push_back(check_collusion(rule, universe, Axiom::A4a, opts));
    bool all_pass = std::all_of(row.verdicts.begin(), row.verdicts.end(), [](const AxiomVerdict& v) { return v.pass; });
    row.as_expected = expect_pass ? all_pass : !row.verdicts.back().pass;
    all_ok = all_ok && row.as_expected;
    report.rows.push_back(std::move(row));
  }
  report.prediction_holds = all_ok;
  return report;
}

inline std::string format_report(const ImpossibilityReport& report) {
  std::ostringstream os;
  os << "risk-averse impossibility, U=" << report.utility << ", universe " << report.universe.to_string() << "\n";
  for (const auto& row : report.rows) {
    os << "  " << row.label << ": ";
    if (!row.nonzero) {
      os << "zero rule (excluded)\n";
      continue;
    }
    if (row.first_violation)
      os << "fails " << to_string(row.first_violation->axiom) << "  " << row.first_violation->witness->to_string();
    else
      os << "NO VIOLATION FOUND";
    if (row.pair_witness && row.pair_witness->witness)
      os << "\n      split-and-merge: " << row.pair_witness->witness->to_string()
         << (row.pair_witness_replays ? " [replayed]" : " [REPLAY FAILED]");
    os << "\n";
  }
  os << "  prediction " << (report.prediction_holds ? "holds" : "DOES NOT HOLD") << "\n";
  return os.str();
}

inline std::string format_report(const PossibilityReport& report) {
  std::ostringstream os;
  os << "proportional rule with risk-seeking miners, universe " << report.universe.to_string()
     << ", sharing family: " << report.sharing_family << "\n";
  for (const auto& row : report.rows) {
    os << "  U=" << row.utility << (row.expect_pass ? "" : " (negative control)") << ":";
    for (const auto& v : row.verdicts) os << " " << to_string(v.axiom) << "=" << (v.pass ? "pass" : "FAIL");
    if (!row.verdicts.back().pass && row.verdicts.back().witness)
      os << "\n      witness " << row.verdicts.back().witness->to_string();
    os << (row.as_expected ? "  [as expected]" : "  [UNEXPECTED]") << "\n";
  }
  os << "  prediction " << (report.prediction_holds ? "holds" : "DOES NOT HOLD") << "\n";
  return os.str();
}

inline nlohmann::json to_json(const ImpossibilityReport& report) {
  nlohmann::json j;
  j["utility"] = report.utility;
  j["universe"] = {{"max_miners", report.universe.max_miners}, {"max_total", report.universe.max_total}};
  j["prediction_holds"] = report.prediction_holds;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["label"] = row.label;
    r["nonzero"] = row.nonzero;
    r["verdicts"] = nlohmann::json::array();
    for (const auto& v : row.verdicts) r["verdicts"].push_back(to_json(v));
    if (row.pair_witness) r["pair_witness"] = to_json(*row.pair_witness);
    r["pair_witness_replays"] = row.pair_witness_replays;
    j["rows"].push_back(r);
  }
  return j;
}

inline nlohmann::json to_json(const PossibilityReport& report) {
  nlohmann::json j;
  j["universe"] = {{"max_miners", report.universe.max_miners}, {"max_total", report.universe.max_total}};
  j["sharing_family"] = report.sharing_family;
  j["prediction_holds"] = report.prediction_holds;
  j["rows"] = nlohmann::json::array();
  for (const auto& row : report.rows) {
    nlohmann::json r;
    r["utility"] = row.utility;
    r["expect_pass"] = row.expect_pass;
    r["as_expected"] = row.as_expected;
    r["verdicts"] = nlohmann::json::array();
    for (const auto& v : row.verdicts) r["verdicts"].push_back(to_json(v));
    j["rows"].push_back(r);
  }
  return j;
}

}  // namespace blockaxioms
