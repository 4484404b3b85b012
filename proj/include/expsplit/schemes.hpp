#pragma once

#include <stdexcept>
#include <string>

namespace expsplit {

/// The eleven one-step integrators, labelled as in their usual shorthand.
enum class Scheme { bfe, imex2, ee, erk2p2, erk2p1, l2a, l2b, le, sle, sl2, erbe };

struct SchemeSpec {
  Scheme id = Scheme::ee;
  double c2 = 1.0;     // free stage parameter of erk2p1/erk2p2, in (0,1]
  double alpha = 0.327;  // free parameter of sl2, in (0,1]

  SchemeSpec() = default;
  explicit SchemeSpec(Scheme s) : id(s) {}
  SchemeSpec(Scheme s, double param) : id(s) {
    if (s == Scheme::sl2)
      alpha = param;
    else
      c2 = param;
  }

  int order() const {
    switch (id) {
      case Scheme::bfe:
      case Scheme::ee:
      case Scheme::le:
      case Scheme::sle:
        return 1;
      default:
        return 2;
    }
  }

  const char* name() const {
    switch (id) {
      case Scheme::bfe: return "bfe";
      case Scheme::imex2: return "imex2";
      case Scheme::ee: return "ee";
      case Scheme::erk2p2: return "erk2p2";
      case Scheme::erk2p1: return "erk2p1";
      case Scheme::l2a: return "l2a";
      case Scheme::l2b: return "l2b";
      case Scheme::le: return "le";
      case Scheme::sle: return "sle";
      case Scheme::sl2: return "sl2";
      case Scheme::erbe: return "erbe";
    }
    return "?";
  }

  static SchemeSpec parse(const std::string& s) {
    for (Scheme id : {Scheme::bfe, Scheme::imex2, Scheme::ee, Scheme::erk2p2,
                      Scheme::erk2p1, Scheme::l2a, Scheme::l2b, Scheme::le,
                      Scheme::sle, Scheme::sl2, Scheme::erbe}) {
      if (s == SchemeSpec(id).name()) return SchemeSpec(id);
    }
    throw std::invalid_argument("unknown scheme name: " + s);
  }
};

inline bool uses_c2(Scheme s) { return s == Scheme::erk2p1 || s == Scheme::erk2p2; }
inline bool uses_alpha(Scheme s) { return s == Scheme::sl2; }

}  // namespace expsplit
