#pragma once

#include "blockaxioms.hpp"

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

namespace blockaxioms::cli {

enum class Command { Check, Matrix, Search, Verify, Simulate, Curve };

inline std::string_view to_string(Command c) {
  switch (c) {
    case Command::Check: return "check";
    case Command::Matrix: return "matrix";
    case Command::Search: return "search";
    case Command::Verify: return "verify";
    case Command::Simulate: return "simulate";
    case Command::Curve: return "curve";
  }
  return "?";
}

inline constexpr const char* kSeedVariable = "BLOCKAXIOMS_SEED";

struct ExperimentConfig {
  Command command = Command::Check;
  std::vector<std::string> rules;
  Semantics semantics = Semantics::Randomized;
  bool both_semantics = false;
  std::vector<Axiom> axioms;
  Universe universe;
  std::int64_t grid = 0;
  int theorem = 0;
  std::vector<std::string> utilities;
  std::int64_t sharing_grid = 16;
  std::vector<HashRate> rates;
  std::vector<std::int64_t> M;
  Rational rho{1};
  std::size_t epochs = 0;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  std::string format = "text";
  std::string output;
  std::string records;
  std::string expect;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Rejected input: the offending token and its position in the argument
/// list (1-based; 0 for the environment).
class ConfigError : public std::invalid_argument {
 public:
  ConfigError(std::size_t position, std::string token, const std::string& message)
      : std::invalid_argument(describe(position, token, message)), position_(position), token_(std::move(token)) {}

  std::size_t position() const { return position_; }
  const std::string& token() const { return token_; }

 private:
  static std::string describe(std::size_t position, const std::string& token, const std::string& message) {
    if (position == 0) return token + ": " + message;
    return "argument " + std::to_string(position) + " '" + token + "': " + message;
  }

  std::size_t position_;
  std::string token_;
};

namespace detail {

struct RawArgs {
  std::vector<std::string> rule, axiom, utility, M;
  std::string semantics, universe, grid, theorem, sharing_grid, rates, rho, epochs, seed, jobs, format, output,
      records, expect;
};

inline void build_app(CLI::App& app, RawArgs& raw) {
  app.require_subcommand(1, 1);
  auto common = [&](CLI::App* sub) {
    sub->add_option("--jobs", raw.jobs, "worker threads");
    sub->add_option("--format", raw.format, "text | json | csv");
    sub->add_option("--output", raw.output, "write the report here instead of stdout");
  };
  auto checks = [&](CLI::App* sub) {
    sub->add_option("--universe", raw.universe, "NxM: at most N miners, total rate at most M");
    sub->add_option("--utility", raw.utility, "power:<alpha> or pwl:<p>=<u>,... (repeat for a per-miner profile)");
    sub->add_option("--semantics", raw.semantics, "randomized | deterministic");
    sub->add_option("--sharing-grid", raw.sharing_grid, "denominator of the coalition sharing lattice");
    sub->add_option("--expect", raw.expect, "pass | fail | path to a manifest of '<rule> <axiom> <pass|fail>' lines");
    common(sub);
  };

  auto* check = app.add_subcommand("check", "check axioms for rules");
  check->add_option("--rule", raw.rule, "rule spec")->required();
  check->add_option("--axiom", raw.axiom, "A1 A2a A2b A3 A4a A4b A4c (default: all)");
  checks(check);

  auto* matrix = app.add_subcommand("matrix", "every axiom for every rule (default: the catalog)");
  matrix->add_option("--rule", raw.rule, "rule spec");
  checks(matrix);

  auto* search = app.add_subcommand("search", "brute-force search over rule tables");
  search->add_option("--theorem", raw.theorem, "1 (proportional uniqueness) | 2 (scaled proportional)");
  search->add_option("--axiom", raw.axiom, "explicit axiom set instead of --theorem");
  search->add_option("--universe", raw.universe, "NxM, M <= 5");
  search->add_option("--grid", raw.grid, "value denominator L (default lcm(1..M))");
  common(search);

  auto* verify = app.add_subcommand("verify", "risk-averse impossibility (3) or risk-seeking possibility (7)");
  verify->add_option("--theorem", raw.theorem, "3 (risk-averse) | 7 (risk-seeking)")->required();
  verify->add_option("--utility", raw.utility, "utility spec (repeatable)");
  verify->add_option("--universe", raw.universe, "NxM");
  verify->add_option("--sharing-grid", raw.sharing_grid, "denominator of the coalition sharing lattice");
  common(verify);

  auto* simulate = app.add_subcommand("simulate", "simulate the partial-solution protocol");
  simulate->add_option("--rule", raw.rule, "rule spec");
  simulate->add_option("--semantics", raw.semantics, "randomized | deterministic | both");
  simulate->add_option("--rates", raw.rates, "comma-separated hash rates")->required();
  simulate->add_option("--M", raw.M, "partial solutions per full solution (power of two)");
  simulate->add_option("--rho", raw.rho, "partial-solution rate (rational)");
  simulate->add_option("--epochs", raw.epochs, "epochs to simulate");
  simulate->add_option("--seed", raw.seed, std::string("master seed (default $") + kSeedVariable + " or 0)");
  simulate->add_option("--records", raw.records, "write per-epoch CSV records here");
  common(simulate);

  auto* curve = app.add_subcommand("curve", "share-estimate RMSE as a function of M");
  curve->add_option("--rates", raw.rates, "comma-separated hash rates")->required();
  curve->add_option("--M", raw.M, "M values (comma-separated powers of two)")->delimiter(',');
  curve->add_option("--epochs", raw.epochs, "epochs per M");
  curve->add_option("--seed", raw.seed, std::string("master seed (default $") + kSeedVariable + " or 0)");
  common(curve);
}

/// Index of the value token for `flag`, 1-based; 0 when absent.
inline std::size_t locate(const std::vector<std::string>& args, const std::string& flag, std::size_t occurrence = 0) {
  std::size_t seen = 0;
  for (std::size_t k = 0; k < args.size(); ++k) {
    if (args[k] == flag) {
      if (seen++ == occurrence) return k + 2 <= args.size() ? k + 2 : k + 1;
    } else if (args[k].starts_with(flag + "=")) {
      if (seen++ == occurrence) return k + 1;
    }
  }
  return 0;
}

inline std::string token_at(const std::vector<std::string>& args, std::size_t position) {
  if (position == 0 || position > args.size()) return "";
  const std::string& t = args[position - 1];
  auto eq = t.find('=');
  return t.starts_with("--") && eq != std::string::npos ? t.substr(eq + 1) : t;
}

template <class F>
auto field(const std::vector<std::string>& args, const std::string& flag, F&& f, std::size_t occurrence = 0) {
  try {
    return f();
  } catch (const ConfigError&) {
    throw;
  } catch (const std::exception& e) {
    std::size_t pos = locate(args, flag, occurrence);
    throw ConfigError(pos, pos ? token_at(args, pos) : flag, e.what());
  }
}

inline std::int64_t parse_integer(const std::string& text, const std::string& what) {
  std::size_t used = 0;
  long long v = 0;
  try {
    v = std::stoll(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument(what + " must be an integer");
  }
  if (used != text.size()) throw std::invalid_argument(what + " must be an integer");
  return v;
}

inline std::uint64_t parse_seed(const std::string& text) {
  std::size_t used = 0;
  unsigned long long v = 0;
  try {
    if (!text.empty() && text[0] == '-') throw std::invalid_argument("negative");
    v = std::stoull(text, &used);
  } catch (const std::exception&) {
    throw std::invalid_argument("seed must be a nonnegative integer");
  }
  if (used != text.size()) throw std::invalid_argument("seed must be a nonnegative integer");
  return v;
}

/// Finds the token a CLI11 error message complains about.
inline ConfigError from_parse_error(const std::vector<std::string>& args, const CLI::ParseError& e) {
  std::string message = e.what();
  std::size_t best = 0, best_len = 0;
  for (std::size_t k = 0; k < args.size(); ++k) {
    std::string t = args[k].substr(0, args[k].find('='));
    if (!t.empty() && message.find(t) != std::string::npos && t.size() > best_len) {
      best = k + 1;
      best_len = t.size();
    }
  }
  if (best == 0 && args.empty()) return ConfigError(0, "<command>", "missing command (check, matrix, search, verify, simulate, curve)");
  if (best == 0) return ConfigError(args.size(), args.back(), message);
  return ConfigError(best, args[best - 1], message);
}

}  // namespace detail

inline std::string usage() {
  CLI::App app{"Axiom checker, rule-space search and protocol simulator for block-reward allocation rules",
               "blockaxioms"};
  detail::RawArgs raw;
  detail::build_app(app, raw);
  std::string out = app.help();
  for (const char* sub : {"check", "matrix", "search", "verify", "simulate", "curve"})
    out += "\n" + app.get_subcommand(sub)->help();
  return out;
}

/// Parses and validates a command line (without the program name).
/// Returns a complete config or throws ConfigError.
inline ExperimentConfig parse_config(const std::vector<std::string>& args) {
  detail::RawArgs raw;
  CLI::App app{"blockaxioms"};
  detail::build_app(app, raw);
  try {
    app.parse(std::vector<std::string>(args.rbegin(), args.rend()));
  } catch (const CLI::ParseError& e) {
    throw detail::from_parse_error(args, e);
  }

  ExperimentConfig c;
  const std::string name = app.get_subcommands().front()->get_name();
  if (name == "check") c.command = Command::Check;
  else if (name == "matrix") c.command = Command::Matrix;
  else if (name == "search") c.command = Command::Search;
  else if (name == "verify") c.command = Command::Verify;
  else if (name == "simulate") c.command = Command::Simulate;
  else c.command = Command::Curve;

  using detail::field;
  for (std::size_t k = 0; k < raw.rule.size(); ++k)
    c.rules.push_back(field(args, "--rule", [&] { return parse_rule(raw.rule[k]).name(); }, k));
  for (std::size_t k = 0; k < raw.axiom.size(); ++k)
    c.axioms.push_back(field(args, "--axiom", [&] { return parse_axiom(raw.axiom[k]); }, k));
  for (std::size_t k = 0; k < raw.utility.size(); ++k)
    c.utilities.push_back(field(args, "--utility", [&] { return parse_utility(raw.utility[k]).spec(); }, k));

  if (!raw.semantics.empty()) {
    if (raw.semantics == "both" && c.command == Command::Simulate)
      c.both_semantics = true;
    else
      c.semantics = field(args, "--semantics", [&] { return parse_semantics(raw.semantics); });
  }
  if (!raw.jobs.empty())
    c.jobs = field(args, "--jobs", [&] {
      auto j = detail::parse_integer(raw.jobs, "--jobs");
      if (j < 1) throw std::invalid_argument("--jobs must be at least 1");
      return static_cast<std::size_t>(j);
    });
  if (!raw.format.empty()) {
    c.format = raw.format;
    if (c.format != "text" && c.format != "json" && c.format != "csv")
      throw ConfigError(detail::locate(args, "--format"), raw.format, "format must be text, json or csv");
  }
  c.output = raw.output;
  c.records = raw.records;
  c.expect = raw.expect;
  if (!raw.sharing_grid.empty())
    c.sharing_grid = field(args, "--sharing-grid", [&] {
      auto g = detail::parse_integer(raw.sharing_grid, "--sharing-grid");
      if (g < 1 || g > 64) throw std::invalid_argument("--sharing-grid must lie in [1, 64]");
      return g;
    });
  if (!raw.theorem.empty()) c.theorem = static_cast<int>(field(args, "--theorem", [&] { return detail::parse_integer(raw.theorem, "--theorem"); }));

  switch (c.command) {
    case Command::Check:
    case Command::Matrix: c.universe = Universe{4, 8}; break;
    case Command::Search: c.universe = Universe{3, 3}; break;
    case Command::Verify: c.universe = c.theorem == 7 ? Universe{4, 8} : Universe{3, 4}; break;
    default: break;
  }
  if (!raw.universe.empty()) {
    c.universe = field(args, "--universe", [&] { return parse_universe(raw.universe); });
    field(args, "--universe", [&] { c.universe.validate(); return 0; });
  }

  if (c.command == Command::Search) {
    if (c.theorem != 0 && c.theorem != 1 && c.theorem != 2)
      throw ConfigError(detail::locate(args, "--theorem"), raw.theorem, "search runs uniqueness (1) or scaled-proportional (2)");
    if (c.theorem == 0 && c.axioms.empty())
      throw ConfigError(args.size(), args.back(), "search needs --theorem or an explicit --axiom set");
    if (c.theorem != 0 && !c.axioms.empty())
      throw ConfigError(detail::locate(args, "--axiom"), raw.axiom.front(), "--axiom and --theorem are exclusive");
    if (!c.axioms.empty()) {
      bool strong = std::find(c.axioms.begin(), c.axioms.end(), Axiom::A2a) != c.axioms.end();
      bool weak = std::find(c.axioms.begin(), c.axioms.end(), Axiom::A2b) != c.axioms.end();
      if (strong == weak)
        throw ConfigError(detail::locate(args, "--axiom"), raw.axiom.front(), "search needs exactly one of A2a, A2b");
    }
    if (c.universe.max_total > 5)
      throw ConfigError(raw.universe.empty() ? 0 : detail::locate(args, "--universe"), raw.universe,
                        "rule-space search needs total rate <= 5");
    c.grid = raw.grid.empty() ? lcm_up_to(c.universe.max_total)
                              : field(args, "--grid", [&] { return detail::parse_integer(raw.grid, "--grid"); });
    field(args, raw.grid.empty() ? "--universe" : "--grid", [&] {
      blockaxioms::detail::check_search_bounds(c.universe, c.grid);
      return 0;
    });
  }

  if (c.command == Command::Verify) {
    if (c.theorem != 3 && c.theorem != 7)
      throw ConfigError(detail::locate(args, "--theorem"), raw.theorem, "verify runs risk-averse (3) or risk-seeking (7)");
    if (c.utilities.empty())
      c.utilities = c.theorem == 3 ? std::vector<std::string>{"power:1/2", "power:9/10"}
                                   : std::vector<std::string>{"power:11/10", "power:2", "power:1/2"};
    if (c.theorem == 3)
      for (std::size_t k = 0; k < c.utilities.size(); ++k)
        if (parse_utility(c.utilities[k]).shape() != UtilityFunction::Shape::StrictlyConcave)
          throw ConfigError(detail::locate(args, "--utility", k), c.utilities[k],
                            "risk-averse impossibility needs a strictly concave utility");
  }

  if (c.command == Command::Simulate || c.command == Command::Curve) {
    c.rates = field(args, "--rates", [&] {
      auto h = parse_configuration(raw.rates);
      return std::vector<HashRate>(h.begin(), h.end());
    });
    if (c.command == Command::Simulate) {
      if (c.rules.size() > 1) throw ConfigError(detail::locate(args, "--rule", 1), raw.rule[1], "simulate takes one rule");
      if (c.rules.empty()) c.rules = {"proportional"};
      if (raw.M.size() > 1) throw ConfigError(detail::locate(args, "--M", 1), raw.M[1], "simulate takes one M");
    }
    std::vector<std::string> Ms = raw.M;
    if (Ms.empty()) Ms = c.command == Command::Curve ? std::vector<std::string>{"64", "256", "1024", "4096"}
                                                     : std::vector<std::string>{"1024"};
    for (std::size_t k = 0; k < Ms.size(); ++k)
      c.M.push_back(field(args, "--M", [&] {
        auto m = detail::parse_integer(Ms[k], "--M");
        ProtocolParams{m, Rational(1), 0}.validate();
        return m;
      }, c.command == Command::Curve ? 0 : k));
    if (!raw.rho.empty())
      c.rho = field(args, "--rho", [&] {
        auto r = parse_rational(raw.rho);
        if (r <= Rational(0)) throw std::invalid_argument("rho must be positive");
        return r;
      });
    c.epochs = raw.epochs.empty() ? 2000 : field(args, "--epochs", [&] {
      auto e = detail::parse_integer(raw.epochs, "--epochs");
      if (e < 1) throw std::invalid_argument("--epochs must be at least 1");
      return static_cast<std::size_t>(e);
    });
    if (!raw.seed.empty()) {
      c.seed = field(args, "--seed", [&] { return detail::parse_seed(raw.seed); });
    } else if (const char* env = std::getenv(kSeedVariable); env && *env) {
      try {
        c.seed = detail::parse_seed(env);
      } catch (const std::exception& e) {
        throw ConfigError(0, kSeedVariable, e.what());
      }
    }
    if (c.command == Command::Simulate) {
      auto rule = parse_rule(c.rules.front());
      try {
        rule.evaluate_scaled(Configuration({1}), c.rho * c.M.front());
      } catch (const std::exception& e) {
        throw ConfigError(detail::locate(args, raw.rho.empty() ? "--M" : "--rho"),
                          raw.rho.empty() ? std::to_string(c.M.front()) : raw.rho, e.what());
      }
    }
  }
  return c;
}

/// Splits config text on whitespace (double quotes group) and parses it.
inline ExperimentConfig parse_config_text(const std::string& text) {
  std::istringstream is(text);
  std::vector<std::string> args;
  std::string tok;
  while (is >> std::quoted(tok)) args.push_back(tok);
  return parse_config(args);
}

/// Arguments that parse back to exactly `c`.
inline std::vector<std::string> to_args(const ExperimentConfig& c) {
  std::vector<std::string> a{std::string(to_string(c.command))};
  auto add = [&](const std::string& flag, const std::string& value) {
    a.push_back(flag);
    a.push_back(value);
  };
  for (const auto& r : c.rules) add("--rule", r);
  for (Axiom x : c.axioms) add("--axiom", std::string(blockaxioms::to_string(x)));
  for (const auto& u : c.utilities) add("--utility", u);
  const bool checks = c.command == Command::Check || c.command == Command::Matrix;
  if (c.command != Command::Simulate && c.command != Command::Curve) add("--universe", c.universe.to_string());
  if (checks) add("--semantics", std::string(blockaxioms::to_string(c.semantics)));
  if (checks || c.command == Command::Verify) add("--sharing-grid", std::to_string(c.sharing_grid));
  if (checks && !c.expect.empty()) add("--expect", c.expect);
  if (c.theorem != 0) add("--theorem", std::to_string(c.theorem));
  if (c.command == Command::Search) add("--grid", std::to_string(c.grid));
  if (c.command == Command::Simulate || c.command == Command::Curve) {
    add("--rates", Configuration(c.rates).to_string().substr(1, Configuration(c.rates).to_string().size() - 2));
    if (c.command == Command::Simulate) {
      add("--semantics", c.both_semantics ? "both" : std::string(blockaxioms::to_string(c.semantics)));
      add("--rho", format_rational(c.rho));
      if (!c.records.empty()) add("--records", c.records);
    }
    std::string ms;
    for (std::size_t k = 0; k < c.M.size(); ++k) ms += (k ? "," : "") + std::to_string(c.M[k]);
    add("--M", ms);
    add("--epochs", std::to_string(c.epochs));
    add("--seed", std::to_string(c.seed));
  }
  add("--jobs", std::to_string(c.jobs));
  add("--format", c.format);
  if (!c.output.empty()) add("--output", c.output);
  return a;
}

// Expectations -------------------------------------------------------------

struct Expectation {
  std::string rule;
  Axiom axiom;
  bool pass;
};

/// Manifest lines: `<rule> <axiom> <pass|fail>`; `#` starts a comment.
/// The rule is a spec (`sqrts`) or a catalog label (`ProportionalToSquareRoots`).
inline std::vector<Expectation> parse_manifest(std::istream& in, const std::string& path) {
  std::vector<Expectation> out;
  std::string line;
  for (std::size_t lineno = 1; std::getline(in, line); ++lineno) {
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream is(line);
    std::string rule, axiom, verdict, extra;
    if (!(is >> rule)) continue;
    if (!(is >> axiom >> verdict) || (is >> extra) || (verdict != "pass" && verdict != "fail"))
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": expected '<rule> <axiom> <pass|fail>'");
    try {
      out.push_back({rule, parse_axiom(axiom), verdict == "pass"});
    } catch (const std::exception& e) {
      throw std::invalid_argument(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

// Dispatch -----------------------------------------------------------------

namespace detail {

struct Checked {
  std::string label;
  AxiomVerdict verdict;
};

/// Compares verdicts with --expect. Returns the number of mismatches.
inline std::size_t compare_expectations(const ExperimentConfig& c, const std::vector<Checked>& results, std::ostream& err) {
  if (c.expect.empty()) return 0;
  std::size_t mismatches = 0;
  if (c.expect == "pass" || c.expect == "fail") {
    for (const auto& r : results)
      if (r.verdict.pass != (c.expect == "pass")) {
        err << "expectation mismatch: " << r.label << " " << blockaxioms::to_string(r.verdict.axiom) << " expected "
            << c.expect << ", got " << (r.verdict.pass ? "pass" : "fail") << "\n";
        ++mismatches;
      }
    return mismatches;
  }
  std::ifstream in(c.expect);
  if (!in) throw std::runtime_error("cannot read manifest " + c.expect);
  for (const auto& e : parse_manifest(in, c.expect))
    for (const auto& r : results)
      if ((e.rule == r.label || e.rule == r.verdict.rule) && e.axiom == r.verdict.axiom && e.pass != r.verdict.pass) {
        err << "expectation mismatch: " << e.rule << " " << blockaxioms::to_string(e.axiom) << " expected "
            << (e.pass ? "pass" : "fail") << ", got " << (r.verdict.pass ? "pass" : "fail") << "\n";
        ++mismatches;
      }
  return mismatches;
}

inline UtilityProfile profile_of(const ExperimentConfig& c) {
  std::vector<UtilityFunction> us;
  for (const auto& u : c.utilities) us.push_back(parse_utility(u));
  return us.empty() ? UtilityProfile{} : UtilityProfile(us);
}

inline std::string csv_field(std::string s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char ch : s) out += ch == '"' ? std::string("\"\"") : std::string(1, ch);
  return out + "\"";
}

inline int run_checks(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  CheckOptions opts{profile_of(c), c.jobs, c.sharing_grid};
  std::vector<Checked> results;
  int status = 0;
  nlohmann::json doc;

  if (c.command == Command::Check) {
    const auto axioms = c.axioms.empty() ? std::vector<Axiom>(kAllAxioms.begin(), kAllAxioms.end()) : c.axioms;
    for (const auto& spec : c.rules) {
      auto rule = parse_rule(spec, c.semantics);
      for (Axiom a : axioms) results.push_back({rule.name(), check_axiom(rule, c.universe, a, opts)});
    }
    if (c.format == "text")
      for (const auto& r : results) out << r.verdict.to_string() << "\n";
    if (c.format == "json") {
      doc = nlohmann::json::array();
      for (const auto& r : results) doc.push_back(to_json(r.verdict));
    }
  } else {
    std::vector<CatalogEntry> entries;
    if (c.rules.empty()) {
      for (auto e : catalog()) {
        e.rule = e.rule.with_semantics(c.semantics);
        entries.push_back(std::move(e));
      }
    } else {
      for (const auto& spec : c.rules) entries.push_back({spec, parse_rule(spec, c.semantics), {}});
    }
    auto report = axiom_matrix(entries, c.universe, opts);
    for (const auto& row : report.rows)
      for (const auto& [a, v] : row.verdicts) results.push_back({row.label, v});
    if (c.format == "text") out << format_matrix(report);
    if (c.format == "json") doc = to_json(report);
    if (!report.matches_claims() || !report.grade_order_holds()) status = 1;
  }

  if (c.format == "csv") {
    out << "rule,axiom,semantics,utility,verdict,witness,margin\n";
    for (const auto& r : results)
      out << csv_field(r.label) << "," << blockaxioms::to_string(r.verdict.axiom) << ","
          << blockaxioms::to_string(r.verdict.semantics) << "," << csv_field(r.verdict.utility) << ","
          << (r.verdict.pass ? "pass" : "fail") << "," << csv_field(r.verdict.witness ? r.verdict.witness->to_string() : "")
          << "," << (r.verdict.witness ? r.verdict.witness->margin : 0.0) << "\n";
  }
  if (c.format == "json") out << doc.dump(2) << "\n";
  if (compare_expectations(c, results, err) > 0) status = 1;
  return status;
}

inline int run_search(const ExperimentConfig& c, std::ostream& out) {
  SearchReport report;
  if (c.theorem == 1)
    report = search_proportional_uniqueness(c.universe, c.grid);
  else if (c.theorem == 2)
    report = search_scaled_proportional(c.universe, c.grid);
  else {
    AxiomSet set;
    set.budget = std::find(c.axioms.begin(), c.axioms.end(), Axiom::A2a) != c.axioms.end() ? BudgetMode::Strong : BudgetMode::Weak;
    set.sybil_proof = std::find(c.axioms.begin(), c.axioms.end(), Axiom::A3) != c.axioms.end();
    for (Axiom a : {Axiom::A4a, Axiom::A4b, Axiom::A4c})
      if (std::find(c.axioms.begin(), c.axioms.end(), a) != c.axioms.end()) set.collusion.push_back(a);
    report = search_tables(c.universe, c.grid, set, "table search");
    report.prediction_holds = report.survivors_reverified;
  }
  if (c.format == "text") out << format_report(report);
  if (c.format == "json") out << to_json(report).dump(2) << "\n";
  if (c.format == "csv") {
    out << "survivor,configuration,allocation\n";
    for (std::size_t k = 0; k < report.survivors.size(); ++k)
      for (const auto& [key, nums] : report.survivors[k].entries()) {
        std::string vals;
        for (std::size_t j = 0; j < nums.size(); ++j)
          vals += (j ? " " : "") + format_rational(Rational(nums[j], report.grid));
        out << k + 1 << "," << csv_field(Configuration(key).to_string()) << "," << vals << "\n";
      }
  }
  return report.prediction_holds ? 0 : 1;
}

inline int run_verify(const ExperimentConfig& c, std::ostream& out) {
  CheckOptions opts{{}, c.jobs, c.sharing_grid};
  bool ok = true;
  nlohmann::json doc = nlohmann::json::array();
  if (c.theorem == 3) {
    auto entries = catalog();
    auto survivors = search_scaled_proportional(Universe{3, 3}, 6).survivors;
    for (std::size_t k = 0; k < survivors.size(); ++k)
      entries.push_back({"grid-table-" + std::to_string(k + 1),
                         AllocationRule::tabulated("grid-table-" + std::to_string(k + 1), survivors[k]), {}});
    for (const auto& spec : c.utilities) {
      auto report = verify_risk_averse_impossibility(c.universe, entries, parse_utility(spec), opts);
      ok = ok && report.prediction_holds;
      if (c.format == "json") doc.push_back(to_json(report));
      else if (c.format == "csv") {
        for (const auto& row : report.rows)
          out << csv_field(report.utility) << "," << csv_field(row.label) << ","
              << (!row.nonzero ? "zero" : row.first_violation ? std::string(blockaxioms::to_string(row.first_violation->axiom)) : "none")
              << "," << csv_field(row.first_violation && row.first_violation->witness ? row.first_violation->witness->to_string() : "")
              << "\n";
      } else
        out << format_report(report);
    }
  } else {
    std::vector<UtilityFunction> us;
    for (const auto& spec : c.utilities) us.push_back(parse_utility(spec));
    auto report = verify_risk_seeking_possibility(c.universe, us, opts);
    ok = report.prediction_holds;
    if (c.format == "json") doc.push_back(to_json(report));
    else if (c.format == "csv") {
      for (const auto& row : report.rows)
        for (const auto& v : row.verdicts)
          out << csv_field(row.utility) << "," << blockaxioms::to_string(v.axiom) << "," << (v.pass ? "pass" : "fail")
              << "," << (row.expect_pass ? "expected" : "control") << "\n";
    } else
      out << format_report(report);
  }
  if (c.format == "json") out << doc.dump(2) << "\n";
  return ok ? 0 : 1;
}

inline int run_simulate(const ExperimentConfig& c, std::ostream& out, std::ostream& err) {
  Configuration h(c.rates);
  ProtocolParams params{c.M.front(), c.rho, c.seed};
  std::vector<SimulationStats> runs;
  std::optional<VarianceComparison> comparison;
  if (c.both_semantics) {
    if (c.rules.front() != "proportional") err << "note: --semantics both always compares the proportional rule\n";
    comparison = variance_study(h, params, c.epochs, c.jobs);
    runs = {comparison->randomized, comparison->deterministic};
  } else {
    runs.push_back(run_simulation(h, params, parse_rule(c.rules.front(), c.semantics), c.epochs,
                                  {c.jobs, !c.records.empty()}));
  }
  if (!c.records.empty()) {
    std::ofstream rec(c.records);
    if (!rec) throw std::runtime_error("cannot write " + c.records);
    for (const auto& s : runs) write_epoch_csv(rec, s);
  }
  if (c.format == "text") {
    for (const auto& s : runs) out << format_stats(s);
    if (comparison) {
      for (std::size_t i = 0; i < h.size(); ++i)
        out << "miner " << i + 1 << ": randomized/deterministic variance ratio " << comparison->variance_ratio(i) << "\n";
      out << "epochs with equal rewards under both semantics: " << comparison->epochs_with_equal_rewards << "/"
          << c.epochs << "\n";
    }
  } else if (c.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& s : runs) doc.push_back(to_json(s));
    out << doc.dump(2) << "\n";
  } else {
    for (const auto& s : runs) write_summary_csv(out, s);
  }
  return 0;
}

inline int run_curve(const ExperimentConfig& c, std::ostream& out) {
  auto curve = estimate_error_curve(Configuration(c.rates), c.M, c.epochs, c.seed, c.jobs);
  if (c.format == "csv") {
    write_curve_csv(out, curve);
  } else if (c.format == "json") {
    nlohmann::json doc = nlohmann::json::array();
    for (const auto& p : curve) doc.push_back({{"M", p.M}, {"share_rmse", p.share_rmse}, {"mean_rmse", p.mean_rmse}});
    out << doc.dump(2) << "\n";
  } else {
    out << "M       mean_rmse    rmse*sqrt(M)\n";
    for (const auto& p : curve) {
      char line[96];
      std::snprintf(line, sizeof line, "%-7lld %-12.6g %.4f\n", static_cast<long long>(p.M), p.mean_rmse, p.scaled_rmse);
      out << line;
    }
    out << "c/sqrt(M) within factor 2: " << (fits_inverse_sqrt(curve) ? "yes" : "no") << "\n";
  }
  return 0;
}

}  // namespace detail

/// Runs a parsed config. Exit code 0 on success; 1 when verdicts or
/// predictions disagree with expectations; 2 on errors.
inline int run(const ExperimentConfig& c, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  std::ofstream file;
  std::ostream* sink = &out;
  if (!c.output.empty()) {
    file.open(c.output);
    if (!file) {
      err << "cannot write " << c.output << "\n";
      return 2;
    }
    sink = &file;
  }
  try {
    switch (c.command) {
      case Command::Check:
      case Command::Matrix: return detail::run_checks(c, *sink, err);
      case Command::Search: return detail::run_search(c, *sink);
      case Command::Verify: return detail::run_verify(c, *sink);
      case Command::Simulate: return detail::run_simulate(c, *sink, err);
      case Command::Curve: return detail::run_curve(c, *sink);
    }
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}

}  // namespace blockaxioms::cli
