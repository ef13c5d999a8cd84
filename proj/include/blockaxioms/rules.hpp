#pragma once

#include "axiom_id.hpp"
#include "configuration.hpp"
#include "scalar.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <functional>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blockaxioms {

/// Raised when a lottery would pay out more than one block reward.
class InvalidLottery : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

/// Nondecreasing map from total hash rate to a scaling factor in [0,1].
class ScalingFunction {
 public:
  enum class Form { Constant, Step, Ramp, Table };

  static ScalingFunction constant(Rational value) {
    check_unit(value);
    ScalingFunction c(Form::Constant);
    c.lo_ = c.hi_ = value;
    return c;
  }

  /// lo below threshold, hi from threshold on.
  static ScalingFunction step(HashRate threshold, Rational lo, Rational hi) {
    check_unit(lo);
    check_unit(hi);
    if (threshold < 1) throw std::invalid_argument("step threshold must be positive");
    if (hi < lo) throw std::invalid_argument("scaling function must be nondecreasing (step lo > hi)");
    ScalingFunction c(Form::Step);
    c.threshold_ = threshold;
    c.lo_ = lo;
    c.hi_ = hi;
    return c;
  }

  /// min(1, m / saturation).
  static ScalingFunction ramp(HashRate saturation) {
    if (saturation < 1) throw std::invalid_argument("ramp saturation must be positive");
    ScalingFunction c(Form::Ramp);
    c.threshold_ = saturation;
    return c;
  }

  /// Explicit table; undefined totals raise a domain error on lookup.
  static ScalingFunction table(std::map<HashRate, Rational> values) {
    if (values.empty()) throw std::invalid_argument("scaling table must not be empty");
    const Rational* previous = nullptr;
    for (const auto& [m, v] : values) {
      if (m < 1) throw std::invalid_argument("scaling table keys must be positive totals");
      check_unit(v);
      if (previous && v < *previous) throw std::invalid_argument("scaling function must be nondecreasing");
      previous = &v;
    }
    ScalingFunction c(Form::Table);
    c.table_ = std::move(values);
    return c;
  }

  Form form() const { return form_; }

  std::optional<Rational> at(HashRate m) const {
    switch (form_) {
      case Form::Constant: return lo_;
      case Form::Step: return m < threshold_ ? lo_ : hi_;
      case Form::Ramp: return m >= threshold_ ? Rational(1) : Rational(m, threshold_);
      case Form::Table: {
        auto it = table_.find(m);
        if (it == table_.end()) return std::nullopt;
        return it->second;
      }
    }
    return std::nullopt;
  }

  Rational operator()(HashRate m) const {
    auto v = at(m);
    if (!v) throw std::domain_error("scaling function undefined at total " + std::to_string(m));
    return *v;
  }

  /// Text in the `<c-spec>` grammar.
  std::string spec() const {
    switch (form_) {
      case Form::Constant: return "const:" + format_rational(lo_);
      case Form::Step:
        return "step:" + std::to_string(threshold_) + ":" + format_rational(lo_) + ":" + format_rational(hi_);
      case Form::Ramp: return "ramp:" + std::to_string(threshold_);
      case Form::Table: {
        std::string out = "table:";
        bool first = true;
        for (const auto& [m, v] : table_) {
          if (!first) out += ",";
          first = false;
          out += std::to_string(m) + "=" + format_rational(v);
        }
        return out;
      }
    }
    return {};
  }

  friend bool operator==(const ScalingFunction& a, const ScalingFunction& b) { return a.spec() == b.spec(); }

 private:
  explicit ScalingFunction(Form f) : form_(f) {}

  static void check_unit(const Rational& v) {
    if (v < Rational(0) || v > Rational(1)) throw std::invalid_argument("scaling values must lie in [0,1], got " + format_rational(v));
  }

  Form form_;
  HashRate threshold_ = 1;
  Rational lo_{0};
  Rational hi_{0};
  std::map<HashRate, Rational> table_;
};

inline ScalingFunction parse_scaling(std::string_view text) {
  auto split = [](std::string_view s, char sep) {
    std::vector<std::string_view> parts;
    std::size_t start = 0;
    while (true) {
      auto pos = s.find(sep, start);
      parts.push_back(s.substr(start, pos == std::string_view::npos ? std::string_view::npos : pos - start));
      if (pos == std::string_view::npos) break;
      start = pos + 1;
    }
    return parts;
  };
  auto as_total = [](std::string_view s) {
    Rational r = parse_rational(s);
    if (r.denominator() != 1 || r < 1) throw std::invalid_argument("expected a positive integer total: '" + std::string(s) + "'");
    return r.numerator();
  };

  auto colon = text.find(':');
  std::string_view form = text.substr(0, colon);
  std::string_view rest = colon == std::string_view::npos ? std::string_view{} : text.substr(colon + 1);
  if (form == "const" && !rest.empty()) return ScalingFunction::constant(parse_rational(rest));
  if (form == "step") {
    auto parts = split(rest, ':');
    if (parts.size() != 3) throw std::invalid_argument("step spec must be step:<m0>:<lo>:<hi>");
    return ScalingFunction::step(as_total(parts[0]), parse_rational(parts[1]), parse_rational(parts[2]));
  }
  if (form == "ramp" && !rest.empty()) return ScalingFunction::ramp(as_total(rest));
  if (form == "table" && !rest.empty()) {
    std::map<HashRate, Rational> values;
    for (auto entry : split(rest, ',')) {
      auto eq = entry.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument("table entry must be <m>=<v>: '" + std::string(entry) + "'");
      values[as_total(entry.substr(0, eq))] = parse_rational(entry.substr(eq + 1));
    }
    return ScalingFunction::table(std::move(values));
  }
  throw std::invalid_argument("unknown scaling spec '" + std::string(text) +
                              "' (expected const:<v>, step:<m0>:<lo>:<hi>, ramp:<m0> or table:<m>=<v>,...)");
}

/// Finite symmetric rule: an allocation on a grid {0, 1/L, ..., 1} for each
/// sorted representative of a bounded universe, extended by permutation.
class RuleTable {
 public:
  RuleTable(Universe universe, std::int64_t grid) : universe_(universe), grid_(grid) {
    if (grid < 1) throw std::invalid_argument("grid denominator must be positive");
  }

  const Universe& universe() const { return universe_; }
  std::int64_t grid() const { return grid_; }

  /// `numerators[k]` is the reward of the k-th entry of the sorted
  /// representative, in units of 1/grid. Equal rates must get equal values.
  void set(const Configuration& representative, std::vector<std::int64_t> numerators) {
    if (!std::is_sorted(representative.begin(), representative.end(), std::greater<>()))
      throw std::invalid_argument("table keys must be sorted representatives");
    if (numerators.size() != representative.size()) throw std::invalid_argument("allocation length mismatch");
    for (std::size_t k = 0; k < numerators.size(); ++k) {
      if (numerators[k] < 0 || numerators[k] > grid_) throw std::invalid_argument("table entry off grid");
      if (k > 0 && representative[k] == representative[k - 1] && numerators[k] != numerators[k - 1])
        throw std::invalid_argument("table entry for " + representative.to_string() + " is not symmetric");
    }
    entries_[std::vector<HashRate>(representative.begin(), representative.end())] = std::move(numerators);
  }

  bool defines(const Configuration& h) const { return entries_.count(sorted_key(h)) > 0; }

  std::size_t size() const { return entries_.size(); }

  const std::map<std::vector<HashRate>, std::vector<std::int64_t>>& entries() const { return entries_; }

  Allocation evaluate(const Configuration& h) const {
    auto key = sorted_key(h);
    auto it = entries_.find(key);
    if (it == entries_.end()) throw std::domain_error("rule table undefined at " + h.to_string());
    std::vector<Scalar> out;
    out.reserve(h.size());
    for (HashRate r : h) {
      auto pos = static_cast<std::size_t>(std::find(key.begin(), key.end(), r) - key.begin());
      out.emplace_back(Rational(it->second[pos], grid_));
    }
    return Allocation(std::move(out));
  }

  friend bool operator==(const RuleTable& a, const RuleTable& b) {
    if (a.universe_ != b.universe_) return false;
    if (a.entries_.size() != b.entries_.size()) return false;
    for (const auto& [key, nums] : a.entries_) {
      auto it = b.entries_.find(key);
      if (it == b.entries_.end()) return false;
      for (std::size_t k = 0; k < nums.size(); ++k)
        if (Rational(nums[k], a.grid_) != Rational(it->second[k], b.grid_)) return false;
    }
    return true;
  }

  std::string to_string() const {
    std::string out;
    for (const auto& [key, nums] : entries_) {
      if (!out.empty()) out += " ";
      out += Configuration(key).to_string() + "->(";
      for (std::size_t k = 0; k < nums.size(); ++k) out += (k ? "," : "") + format_rational(Rational(nums[k], grid_));
      out += ")";
    }
    return out;
  }

 private:
  static std::vector<HashRate> sorted_key(const Configuration& h) {
    std::vector<HashRate> key(h.begin(), h.end());
    std::sort(key.begin(), key.end(), std::greater<>());
    return key;
  }

  Universe universe_;
  std::int64_t grid_;
  std::map<std::vector<HashRate>, std::vector<std::int64_t>> entries_;
};

enum class RuleKind {
  Proportional,
  AllZero,
  GeneralizedProportional,
  ProportionalToSquares,
  ProportionalToSquareRoots,
  HalfThreshold,
  Tabulated,
  Custom,
};

/// Randomized: x_i(h) is the probability miner i wins the whole reward.
/// Deterministic: x_i(h) is paid out fractionally.
enum class Semantics { Randomized, Deterministic };

inline std::string_view to_string(Semantics s) { return s == Semantics::Randomized ? "randomized" : "deterministic"; }

inline Semantics parse_semantics(std::string_view text) {
  if (text == "randomized") return Semantics::Randomized;
  if (text == "deterministic") return Semantics::Deterministic;
  throw std::invalid_argument("unknown semantics '" + std::string(text) + "' (expected randomized or deterministic)");
}

class AllocationRule {
 public:
  using Function = std::function<Allocation(const Configuration&)>;

  static AllocationRule proportional(Semantics s = Semantics::Randomized) { return {RuleKind::Proportional, s}; }
  static AllocationRule all_zero(Semantics s = Semantics::Randomized) { return {RuleKind::AllZero, s}; }
  static AllocationRule squares(Semantics s = Semantics::Randomized) { return {RuleKind::ProportionalToSquares, s}; }
  static AllocationRule square_roots(Semantics s = Semantics::Randomized) {
    return {RuleKind::ProportionalToSquareRoots, s};
  }
  static AllocationRule half_threshold(Semantics s = Semantics::Randomized) { return {RuleKind::HalfThreshold, s}; }

  static AllocationRule generalized_proportional(ScalingFunction c, Semantics s = Semantics::Randomized) {
    AllocationRule rule(RuleKind::GeneralizedProportional, s);
    rule.scaling_ = std::move(c);
    return rule;
  }

  static AllocationRule tabulated(std::string name, RuleTable table, Semantics s = Semantics::Randomized) {
    AllocationRule rule(RuleKind::Tabulated, s);
    rule.name_ = std::move(name);
    rule.table_ = std::make_shared<const RuleTable>(std::move(table));
    return rule;
  }

  /// Arbitrary function, e.g. an asymmetric rule used as a negative control.
  static AllocationRule custom(std::string name, Function f, Semantics s = Semantics::Randomized) {
    AllocationRule rule(RuleKind::Custom, s);
    rule.name_ = std::move(name);
    rule.custom_ = std::move(f);
    return rule;
  }

  RuleKind kind() const { return kind_; }
  Semantics semantics() const { return semantics_; }
  const std::optional<ScalingFunction>& scaling() const { return scaling_; }
  const RuleTable* table() const { return table_.get(); }

  AllocationRule with_semantics(Semantics s) const {
    AllocationRule copy = *this;
    copy.semantics_ = s;
    return copy;
  }

  /// Spec-grammar text for grammar rules, the given name otherwise.
  std::string name() const {
    switch (kind_) {
      case RuleKind::Proportional: return "proportional";
      case RuleKind::AllZero: return "allzero";
      case RuleKind::GeneralizedProportional: return "genprop:" + scaling_->spec();
      case RuleKind::ProportionalToSquares: return "squares";
      case RuleKind::ProportionalToSquareRoots: return "sqrts";
      case RuleKind::HalfThreshold: return "halfthreshold";
      case RuleKind::Tabulated:
      case RuleKind::Custom: return name_;
    }
    return name_;
  }

  /// False where the rule has no value (table gaps, undefined scaling).
  bool defined_at(const Configuration& h) const {
    switch (kind_) {
      case RuleKind::Tabulated: return table_->defines(h);
      case RuleKind::GeneralizedProportional: return scaling_->at(h.total()).has_value();
      default: return true;
    }
  }

  Allocation evaluate(const Configuration& h) const {
    const std::size_t n = h.size();
    std::vector<Scalar> out;
    out.reserve(n);
    const HashRate m = h.total();
    switch (kind_) {
      case RuleKind::Proportional:
        for (HashRate r : h) out.emplace_back(Rational(r, m));
        break;
      case RuleKind::AllZero: return Allocation::zeros(n);
      case RuleKind::GeneralizedProportional: {
        Rational c = (*scaling_)(m);
        for (HashRate r : h) out.emplace_back(c * Rational(r, m));
        break;
      }
      case RuleKind::ProportionalToSquares: {
        HashRate sq = 0;
        for (HashRate r : h) sq += r * r;
        for (HashRate r : h) out.emplace_back(Rational(r * r, sq));
        break;
      }
      case RuleKind::ProportionalToSquareRoots: {
        double denom = 0;
        for (HashRate r : h) denom += std::sqrt(static_cast<double>(r));
        for (HashRate r : h) out.push_back(Scalar::inexact(std::sqrt(static_cast<double>(r)) / denom));
        break;
      }
      case RuleKind::HalfThreshold: {
        // Strictly more than half; a tie at exactly half stays proportional.
        auto majority = std::find_if(h.begin(), h.end(), [m](HashRate r) { return 2 * r > m; });
        for (HashRate r : h) {
          bool paid = majority == h.end() || r == *majority;
          out.emplace_back(paid ? Rational(r, m) : Rational(0));
        }
        break;
      }
      case RuleKind::Tabulated: return table_->evaluate(h);
      case RuleKind::Custom: {
        Allocation a = custom_(h);
        if (a.size() != n) throw std::logic_error("custom rule returned an allocation of the wrong length");
        return a;
      }
    }
    return Allocation(std::move(out));
  }

  /// Rule applied to estimated rates proportional to `h` whose total is
  /// `estimated_total`. Only total-dependent rules look at the total; the
  /// scaling function must be defined at that (integral) total.
  Allocation evaluate_scaled(const Configuration& h, const Rational& estimated_total) const {
    if (kind_ != RuleKind::GeneralizedProportional) return evaluate(h);
    if (estimated_total.denominator() != 1)
      throw std::domain_error("scaling function needs an integral total estimate, got " + format_rational(estimated_total));
    Rational c = (*scaling_)(estimated_total.numerator());
    std::vector<Scalar> out;
    for (HashRate r : h) out.emplace_back(c * Rational(r, h.total()));
    return Allocation(std::move(out));
  }

 private:
  AllocationRule(RuleKind k, Semantics s) : kind_(k), semantics_(s) {}

  RuleKind kind_;
  Semantics semantics_;
  std::string name_;
  std::optional<ScalingFunction> scaling_;
  std::shared_ptr<const RuleTable> table_;
  Function custom_;
};

/// Parses `proportional | allzero | squares | sqrts | halfthreshold | genprop:<c-spec>`.
inline AllocationRule parse_rule(std::string_view text, Semantics s = Semantics::Randomized) {
  if (text == "proportional") return AllocationRule::proportional(s);
  if (text == "allzero") return AllocationRule::all_zero(s);
  if (text == "squares") return AllocationRule::squares(s);
  if (text == "sqrts") return AllocationRule::square_roots(s);
  if (text == "halfthreshold") return AllocationRule::half_threshold(s);
  if (text.starts_with("genprop:")) return AllocationRule::generalized_proportional(parse_scaling(text.substr(8)), s);
  throw std::invalid_argument("unknown rule '" + std::string(text) +
                              "' (expected proportional, allzero, squares, sqrts, halfthreshold or genprop:<c-spec>)");
}

/// Realizes an allocation as one epoch's payout. Randomized: at most one
/// miner receives the whole reward, miner i with probability p_i.
template <class Engine>
std::vector<double> realize(const Allocation& p, Semantics semantics, Engine& engine) {
  Scalar total = p.sum();
  if (total.value() > 1.0 + kBudgetTolerance)
    throw InvalidLottery("allocation pays out " + std::to_string(total.value()) + " > 1 block reward");
  if (semantics == Semantics::Deterministic) return p.values();

  std::vector<double> out(p.size(), 0.0);
  double u = std::uniform_real_distribution<double>(0.0, 1.0)(engine);
  double cumulative = 0.0;
  for (std::size_t i = 0; i < p.size(); ++i) {
    cumulative += p[i].value();
    if (u < cumulative) {
      out[i] = 1.0;
      break;
    }
  }
  return out;
}

inline std::vector<double> draw_reward(const AllocationRule& rule, const Configuration& h, std::uint64_t seed) {
  std::mt19937_64 engine(seed);
  return realize(rule.evaluate(h), rule.semantics(), engine);
}

/// A catalog rule together with the pass/fail claims made for it.
struct CatalogEntry {
  std::string label;
  AllocationRule rule;
  std::map<Axiom, bool> claims;
};

/// Closes a claim set under the axiom implications: A2a => A2b and
/// pass(A4a) => pass(A4b) => pass(A4c); fail propagates the other way.
inline std::map<Axiom, bool> implied_claims(std::map<Axiom, bool> claims) {
  auto pass = [&](Axiom a) { auto it = claims.find(a); return it != claims.end() && it->second; };
  auto fail = [&](Axiom a) { auto it = claims.find(a); return it != claims.end() && !it->second; };
  for (int round = 0; round < 3; ++round) {
    if (pass(Axiom::A2a)) claims[Axiom::A2b] = true;
    if (fail(Axiom::A2b)) claims[Axiom::A2a] = false;
    if (pass(Axiom::A4a)) claims[Axiom::A4b] = true;
    if (pass(Axiom::A4b)) claims[Axiom::A4c] = true;
    if (fail(Axiom::A4c)) claims[Axiom::A4b] = false;
    if (fail(Axiom::A4b)) claims[Axiom::A4a] = false;
  }
  return claims;
}

/// The step instance used in the catalog: c = 1/2 below total 4, 1 from 4 on.
inline ScalingFunction catalog_step_scaling() { return ScalingFunction::step(4, Rational(1, 2), Rational(1)); }

inline std::vector<CatalogEntry> catalog() {
  using enum Axiom;
  return {
      {"Proportional", AllocationRule::proportional(), {{A1, true}, {A2a, true}, {A3, true}, {A4a, true}}},
      {"AllZero", AllocationRule::all_zero(), {{A1, true}, {A2b, true}, {A3, true}, {A4a, true}, {A2a, false}}},
      {"GeneralizedProportional(const 1/2)",
       AllocationRule::generalized_proportional(ScalingFunction::constant(Rational(1, 2))),
       {{A1, true}, {A2b, true}, {A3, true}, {A4a, true}}},
      {"GeneralizedProportional(step)", AllocationRule::generalized_proportional(catalog_step_scaling()),
       {{A1, true}, {A2b, true}, {A3, true}, {A4a, true}}},
      {"ProportionalToSquares", AllocationRule::squares(), {{A1, true}, {A2a, true}, {A3, true}, {A4c, false}}},
      {"ProportionalToSquareRoots", AllocationRule::square_roots(),
       {{A1, true}, {A2a, true}, {A4a, true}, {A3, false}}},
      {"HalfThreshold", AllocationRule::half_threshold(),
       {{A1, true}, {A2b, true}, {A3, true}, {A4c, true}, {A4b, false}}},
  };
}

}  // namespace blockaxioms
