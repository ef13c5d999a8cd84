#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <string_view>

namespace blockaxioms {

enum class Axiom { A1, A2a, A2b, A3, A4a, A4b, A4c };

inline constexpr std::array<Axiom, 7> kAllAxioms = {Axiom::A1,  Axiom::A2a, Axiom::A2b, Axiom::A3,
                                                    Axiom::A4a, Axiom::A4b, Axiom::A4c};

inline std::string_view to_string(Axiom a) {
  switch (a) {
    case Axiom::A1: return "A1";
    case Axiom::A2a: return "A2a";
    case Axiom::A2b: return "A2b";
    case Axiom::A3: return "A3";
    case Axiom::A4a: return "A4a";
    case Axiom::A4b: return "A4b";
    case Axiom::A4c: return "A4c";
  }
  return "?";
}

inline std::string_view describe(Axiom a) {
  switch (a) {
    case Axiom::A1: return "symmetry";
    case Axiom::A2a: return "strong budget-balance";
    case Axiom::A2b: return "weak budget-balance";
    case Axiom::A3: return "sybil-proofness";
    case Axiom::A4a: return "collusion-proofness (arbitrary sharing)";
    case Axiom::A4b: return "strong collusion-proofness (proportional sharing)";
    case Axiom::A4c: return "weak collusion-proofness (proportional sharing)";
  }
  return "?";
}

inline Axiom parse_axiom(std::string_view text) {
  for (Axiom a : kAllAxioms)
    if (text == to_string(a)) return a;
  throw std::invalid_argument("unknown axiom '" + std::string(text) + "' (expected A1, A2a, A2b, A3, A4a, A4b or A4c)");
}

}  // namespace blockaxioms
