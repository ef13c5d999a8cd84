#pragma once

#include "scalar.hpp"

#include <algorithm>
#include <cmath>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace blockaxioms {

/// Strictly increasing utility on [0,1] with U(0) = 0.
class UtilityFunction {
 public:
  enum class Shape { Linear, StrictlyConcave, StrictlyConvex };
  enum class Form { Power, PiecewiseLinear };

  /// U(p) = p^alpha.
  static UtilityFunction power(Rational alpha) {
    if (alpha <= Rational(0)) throw std::invalid_argument("power utility needs alpha > 0, got " + format_rational(alpha));
    UtilityFunction u(Form::Power);
    u.alpha_ = alpha;
    u.shape_ = alpha < Rational(1) ? Shape::StrictlyConcave : (alpha == Rational(1) ? Shape::Linear : Shape::StrictlyConvex);
    return u;
  }

  /// Linear interpolation through the knots. (0,0) is added when missing;
  /// the last knot must sit at p = 1.
  static UtilityFunction piecewise_linear(std::vector<std::pair<Rational, Rational>> knots) {
    if (knots.empty() || knots.front().first != Rational(0)) knots.insert(knots.begin(), {Rational(0), Rational(0)});
    if (knots.front().second != Rational(0)) throw std::invalid_argument("utility must satisfy U(0) = 0");
    if (knots.back().first != Rational(1)) throw std::invalid_argument("last utility knot must be at p = 1");
    if (knots.size() < 2) throw std::invalid_argument("piecewise-linear utility needs a knot at p = 1");

    std::vector<Rational> slopes;
    for (std::size_t k = 1; k < knots.size(); ++k) {
      Rational dp = knots[k].first - knots[k - 1].first;
      Rational du = knots[k].second - knots[k - 1].second;
      if (dp <= Rational(0)) throw std::invalid_argument("utility knots must have strictly increasing p");
      if (du <= Rational(0)) throw std::invalid_argument("utility must be strictly increasing");
      slopes.push_back(du / dp);
    }
    bool all_equal = true, decreasing = true, increasing = true;
    for (std::size_t k = 1; k < slopes.size(); ++k) {
      all_equal = all_equal && slopes[k] == slopes[k - 1];
      decreasing = decreasing && slopes[k] < slopes[k - 1];
      increasing = increasing && slopes[k] > slopes[k - 1];
    }
    UtilityFunction u(Form::PiecewiseLinear);
    u.knots_ = std::move(knots);
    if (all_equal)
      u.shape_ = Shape::Linear;
    else if (decreasing)
      u.shape_ = Shape::StrictlyConcave;
    else if (increasing)
      u.shape_ = Shape::StrictlyConvex;
    else
      throw std::invalid_argument("piecewise-linear utility must be linear, concave or convex");
    return u;
  }

  Form form() const { return form_; }
  Shape shape() const { return shape_; }
  const Rational& alpha() const { return alpha_; }

  /// Throws when the declared shape tag disagrees with the function.
  void expect_shape(Shape declared) const {
    if (declared != shape_) throw std::invalid_argument("utility " + spec() + " does not have the declared shape");
  }

  /// Exact for exact p when the form allows it (integer powers, rational knots).
  Scalar operator()(const Scalar& p) const {
    check_domain(p.value());
    if (form_ == Form::Power) {
      if (p.is_exact() && alpha_.denominator() == 1) {
        Rational result(1);
        for (std::int64_t k = 0; k < alpha_.numerator(); ++k) result *= p.exact();
        return Scalar(result);
      }
      if (is_zero(p)) return Scalar(0);
      double v = std::pow(std::clamp(p.value(), 0.0, 1.0), to_double(alpha_));
      return Scalar::inexact(v);
    }
    for (std::size_t k = 1; k < knots_.size(); ++k) {
      const auto& [p0, u0] = knots_[k - 1];
      const auto& [p1, u1] = knots_[k];
      if (p.value() <= to_double(p1) + kBudgetTolerance || k + 1 == knots_.size()) {
        Scalar slope(Rational((u1 - u0) / (p1 - p0)));
        return Scalar(u0) + slope * (p - Scalar(p0));
      }
    }
    return Scalar(knots_.back().second);
  }

  double operator()(double p) const { return (*this)(Scalar::inexact(p)).value(); }

  /// Text in the `power:<alpha>` / `pwl:<p1>=<u1>,...` grammar.
  std::string spec() const {
    if (form_ == Form::Power) return "power:" + format_rational(alpha_);
    std::string out = "pwl:";
    bool first = true;
    for (const auto& [p, u] : knots_) {
      if (p == Rational(0)) continue;
      if (!first) out += ",";
      first = false;
      out += format_rational(p) + "=" + format_rational(u);
    }
    return out;
  }

  friend bool operator==(const UtilityFunction& a, const UtilityFunction& b) { return a.spec() == b.spec(); }

 private:
  explicit UtilityFunction(Form f) : form_(f) {}

  static void check_domain(double p) {
    if (p < -kBudgetTolerance || p > 1.0 + kBudgetTolerance)
      throw std::domain_error("utility argument " + std::to_string(p) + " outside [0,1]");
  }

  Form form_;
  Shape shape_ = Shape::Linear;
  Rational alpha_{1};
  std::vector<std::pair<Rational, Rational>> knots_;
};

inline std::string_view to_string(UtilityFunction::Shape s) {
  switch (s) {
    case UtilityFunction::Shape::Linear: return "linear";
    case UtilityFunction::Shape::StrictlyConcave: return "strictly-concave";
    case UtilityFunction::Shape::StrictlyConvex: return "strictly-convex";
  }
  return "?";
}

inline UtilityFunction parse_utility(std::string_view text) {
  if (text.starts_with("power:")) return UtilityFunction::power(parse_rational(text.substr(6)));
  if (text.starts_with("pwl:")) {
    std::vector<std::pair<Rational, Rational>> knots;
    std::string_view rest = text.substr(4);
    while (!rest.empty()) {
      auto comma = rest.find(',');
      std::string_view entry = rest.substr(0, comma);
      auto eq = entry.find('=');
      if (eq == std::string_view::npos) throw std::invalid_argument("utility knot must be <p>=<u>: '" + std::string(entry) + "'");
      knots.emplace_back(parse_rational(entry.substr(0, eq)), parse_rational(entry.substr(eq + 1)));
      rest = comma == std::string_view::npos ? std::string_view{} : rest.substr(comma + 1);
    }
    return UtilityFunction::piecewise_linear(std::move(knots));
  }
  throw std::invalid_argument("unknown utility '" + std::string(text) + "' (expected power:<alpha> or pwl:<p>=<u>,...)");
}

/// The default test set: p^alpha for alpha in {0.5, 0.9, 1, 1.1, 2}.
inline std::vector<UtilityFunction> default_utility_set() {
  return {UtilityFunction::power(Rational(1, 2)), UtilityFunction::power(Rational(9, 10)),
          UtilityFunction::power(Rational(1)), UtilityFunction::power(Rational(11, 10)),
          UtilityFunction::power(Rational(2))};
}

/// Utility assignment by miner index (cyclic). Empty means risk-neutral.
class UtilityProfile {
 public:
  UtilityProfile() = default;
  explicit UtilityProfile(std::vector<UtilityFunction> utilities) : utilities_(std::move(utilities)) {}
  static UtilityProfile uniform(UtilityFunction u) { return UtilityProfile({std::move(u)}); }

  bool risk_neutral() const { return utilities_.empty(); }
  const UtilityFunction& for_miner(std::size_t miner) const { return utilities_[miner % utilities_.size()]; }
  const std::vector<UtilityFunction>& utilities() const { return utilities_; }

  std::string spec() const {
    if (utilities_.empty()) return "risk-neutral";
    std::string out;
    for (std::size_t k = 0; k < utilities_.size(); ++k) out += (k ? ";" : "") + utilities_[k].spec();
    return out;
  }

  friend bool operator==(const UtilityProfile& a, const UtilityProfile& b) { return a.spec() == b.spec(); }

 private:
  std::vector<UtilityFunction> utilities_;
};

/// Finite-support distribution over rewards in [0,1].
class RewardLottery {
 public:
  RewardLottery(std::initializer_list<std::pair<Scalar, Scalar>> outcomes)
      : RewardLottery(std::vector<std::pair<Scalar, Scalar>>(outcomes)) {}

  explicit RewardLottery(std::vector<std::pair<Scalar, Scalar>> outcomes) : outcomes_(std::move(outcomes)) {
    if (outcomes_.empty()) throw std::invalid_argument("lottery needs at least one outcome");
    Scalar total(0);
    for (const auto& [reward, prob] : outcomes_) {
      if (reward.value() < 0 || reward.value() > 1)
        throw std::domain_error("lottery reward " + std::to_string(reward.value()) + " outside [0,1]");
      if (prob.value() < 0) throw std::invalid_argument("lottery probabilities must be nonnegative");
      total += prob;
    }
    if (compare(total, Scalar(1), kBudgetTolerance) != 0) throw std::invalid_argument("lottery probabilities must sum to 1");
  }

  const std::vector<std::pair<Scalar, Scalar>>& outcomes() const { return outcomes_; }

  Scalar mean() const {
    Scalar m(0);
    for (const auto& [reward, prob] : outcomes_) m += reward * prob;
    return m;
  }

 private:
  std::vector<std::pair<Scalar, Scalar>> outcomes_;
};

inline Scalar expected_utility(const UtilityFunction& u, const RewardLottery& lottery) {
  Scalar total(0);
  for (const auto& [reward, prob] : lottery.outcomes()) total += prob * u(reward);
  return total;
}

/// U(E[p]) - E[U(p)]: >= 0 for concave U, <= 0 for convex, 0 for linear.
inline Scalar jensen_gap(const UtilityFunction& u, const RewardLottery& lottery) {
  return u(lottery.mean()) - expected_utility(u, lottery);
}

}  // namespace blockaxioms
