#include "stencilguard/boundary.hpp"

#include <charconv>
#include <cmath>
#include <sstream>

#include "stencilguard/error.hpp"

namespace stencilguard {

std::string to_string(const BoundaryCondition& bc) {
  switch (bc.kind) {
    case BoundaryKind::BounceBack:
      return "bounceback";
    case BoundaryKind::Periodic:
      return "periodic";
    case BoundaryKind::ZeroGhost:
      return "zero";
    case BoundaryKind::ConstantGhost: {
      std::ostringstream s;
      s.precision(17);
      s << "constant:" << bc.ghost;
      return s.str();
    }
  }
  return "unknown";
}

BoundaryCondition parse_boundary(std::string_view text) {
  if (text == "bounceback" || text == "bounce-back") return BoundaryCondition::bounce_back();
  if (text == "periodic") return BoundaryCondition::periodic();
  if (text == "zero") return BoundaryCondition::zero();
  constexpr std::string_view prefix = "constant:";
  if (text.substr(0, prefix.size()) == prefix) {
    const std::string rest(text.substr(prefix.size()));
    std::size_t used = 0;
    double v = 0.0;
    try {
      v = std::stod(rest, &used);
    } catch (const std::exception&) {
      used = 0;
    }
    if (used == 0 || used != rest.size() || !std::isfinite(v))
      throw InvalidParams("bad ghost value in boundary '" + std::string(text) + "'");
    return BoundaryCondition::constant(v);
  }
  throw InvalidParams("unknown boundary '" + std::string(text) + "'");
}

}  // namespace stencilguard
