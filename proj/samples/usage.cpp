// Small tour: check a rule, look at a witness, run a few epochs.
#include <blockaxioms/blockaxioms.hpp>

#include <iostream>

using namespace blockaxioms;

int main() {
  Universe u{4, 8};

  auto sqrts = parse_rule("sqrts");
  auto v = check_sybil_proofness(sqrts, u);
  std::cout << v.to_string() << "\n";
  if (auto margin = replay_witness(sqrts, v)) std::cout << "replayed, margin " << *margin << "\n";

  // risk-averse miners gain by merging under the proportional rule
  auto averse = UtilityProfile::uniform(parse_utility("power:1/2"));
  std::cout << check_collusion(AllocationRule::proportional(), u, Axiom::A4c, {averse, 1, 16}).to_string() << "\n";

  ProtocolParams params{1024, Rational(1), 7};
  auto stats = run_simulation(Configuration({5, 3, 2}), params, AllocationRule::proportional(), 500);
  std::cout << format_stats(stats);
}
