#include "stencilguard/online.hpp"

namespace stencilguard {

namespace {

// Clamped reads past an edge add (edge - opposite border) for +1 and the
// negation for -1, so equal weights on a mirrored pair cancel exactly.
bool bounce_back_cancels(const Stencil& s, bool summed_dj) {
  for (const StencilPoint& p : s.points()) {
    const int along = summed_dj ? p.dj : p.di;
    const int across = summed_dj ? p.di : p.dj;
    if (along == 0) continue;
    if (along > 1 || along < -1) return false;
    const double mirror = summed_dj ? s.weight_at(across, -along) : s.weight_at(-along, across);
    if (mirror != p.w) return false;
  }
  return true;
}

bool any_offset(const Stencil& s, bool dj) {
  for (const StencilPoint& p : s.points())
    if ((dj ? p.dj : p.di) != 0) return true;
  return false;
}

}  // namespace

LedgerNeeds ledger_needs(const Stencil& stencil, const BoundaryCondition& bc) {
  switch (bc.kind) {
    case BoundaryKind::Periodic:
      return {false, false};
    case BoundaryKind::BounceBack:
      return {!bounce_back_cancels(stencil, true), !bounce_back_cancels(stencil, false)};
    case BoundaryKind::ZeroGhost:
    case BoundaryKind::ConstantGhost:
      return {any_offset(stencil, true), any_offset(stencil, false)};
  }
  return {true, true};
}

}  // namespace stencilguard
