#include "stencilguard/kernels.hpp"

#include <cmath>
#include <numbers>

#include "stencilguard/error.hpp"

namespace stencilguard {

CellFunction ripple_initial(const TileDims& dims, double amplitude) {
  const double nx = static_cast<double>(dims.nx), ny = static_cast<double>(dims.ny);
  const double nz = static_cast<double>(dims.nz);
  return [amplitude, nx, ny, nz](std::size_t x, std::size_t y, std::size_t z) {
    constexpr double two_pi = 2.0 * std::numbers::pi;
    const double u = static_cast<double>(x) / nx, v = static_cast<double>(y) / ny;
    const double w = static_cast<double>(z) / nz;
    const double s = 0.5 + 0.25 * std::sin(two_pi * u) * std::cos(two_pi * v) + 0.25 * std::cos(two_pi * (u + w));
    return 1.0 + amplitude * s;
  };
}

KernelSpec make_five_point(double w1, double w2, double w3, double w4, double w5) {
  KernelSpec k;
  k.name = "five-point";
  k.stencil = Stencil("five-point", {{0, 0, w1}, {-1, 0, w2}, {1, 0, w3}, {0, 1, w4}, {0, -1, w5}});
  k.bc = BoundaryCondition::bounce_back();
  return k;
}

ThermalCoefficients thermal_coefficients(const TileDims& dims, const ThermalParams& p) {
  if (dims.nx == 0 || dims.ny == 0 || dims.nz == 0) throw InvalidParams("thermal kernel needs non-empty dims");
  if (!(p.k_si > 0 && p.spec_heat_si > 0 && p.factor_chip > 0 && p.max_pd > 0 && p.precision > 0 &&
        p.chip_height > 0 && p.chip_width > 0 && p.chip_thickness > 0))
    throw InvalidParams("thermal parameters must be positive");
  const double dx = p.chip_height / static_cast<double>(dims.ny);
  const double dy = p.chip_width / static_cast<double>(dims.nx);
  const double dz = p.chip_thickness / static_cast<double>(dims.nz);
  const double cap = p.factor_chip * p.spec_heat_si * p.chip_thickness * dx * dy;
  const double rx = dy / (2.0 * p.k_si * p.chip_thickness * dx);
  const double ry = dx / (2.0 * p.k_si * p.chip_thickness * dy);
  const double rz = dz / (p.k_si * dx * dy);
  const double max_slope = p.max_pd / (p.factor_chip * p.chip_thickness * p.spec_heat_si);
  const double dt = p.precision / max_slope;

  ThermalCoefficients c;
  c.step_div_cap = dt / cap;
  c.ce = c.cw = c.step_div_cap / rx;
  c.cn = c.cs = c.step_div_cap / ry;
  c.ct = c.cb = c.step_div_cap / rz;
  c.cc = 1.0 - (c.ce + c.cw + c.cn + c.cs + c.ct + c.cb);
  return c;
}

PowerMap default_power_map(const TileDims& dims) {
  const double nx = static_cast<double>(dims.nx), ny = static_cast<double>(dims.ny);
  return [nx, ny](std::size_t x, std::size_t y) {
    struct Spot {
      double cx, cy, r, amp;
    };
    static constexpr Spot spots[] = {{0.30, 0.35, 0.10, 1.0}, {0.70, 0.60, 0.15, 0.6}, {0.50, 0.85, 0.08, 0.8}};
    const double u = (static_cast<double>(x) + 0.5) / nx;
    const double v = (static_cast<double>(y) + 0.5) / ny;
    double p = 0.0;
    for (const Spot& s : spots) {
      const double d2 = (u - s.cx) * (u - s.cx) + (v - s.cy) * (v - s.cy);
      p += s.amp * std::exp(-d2 / (2.0 * s.r * s.r));
    }
    return std::min(1.0, p);
  };
}

KernelSpec make_hotspot3d_like(const TileDims& dims, const ThermalParams& params, PowerMap power) {
  const ThermalCoefficients c = thermal_coefficients(dims, params);
  for (double w : {c.ce, c.cw, c.cn, c.cs, c.ct, c.cb, c.cc})
    if (!(w >= 0.0)) throw InvalidParams("thermal kernel weight is negative; grid too fine for this time step");
  if (params.peak_heat < 0.0) throw InvalidParams("peak_heat must be >= 0");

  KernelSpec k;
  k.name = "hotspot3d";
  k.stencil = Stencil("hotspot3d", {{0, 0, c.cc}, {-1, 0, c.cw}, {1, 0, c.ce}, {0, 1, c.cs}, {0, -1, c.cn}});
  k.w_top = c.ct;
  k.w_bottom = c.cb;
  k.bc = BoundaryCondition::bounce_back();
  if (power && params.peak_heat != 0.0) {
    const double peak = params.peak_heat;
    k.constant = [power = std::move(power), peak](std::size_t x, std::size_t y, std::size_t z) {
      return z == 0 ? peak * power(x, y) : 0.0;
    };
  }
  k.initial = ripple_initial(dims, params.initial_ripple);
  return k;
}

std::vector<std::string> kernel_names() { return {"hotspot3d", "five-point", "average4", "identity"}; }

KernelSpec make_kernel(const std::string& name, const TileDims& dims) {
  if (name == "hotspot3d") return make_hotspot3d_like(dims, ThermalParams{}, default_power_map(dims));
  if (name == "five-point") {
    KernelSpec k = make_five_point(0.2, 0.2, 0.2, 0.2, 0.2);
    k.initial = ripple_initial(dims, 0.05);
    return k;
  }
  if (name == "average4") {
    KernelSpec k = make_five_point(0.0, 0.25, 0.25, 0.25, 0.25);
    k.name = "average4";
    k.initial = ripple_initial(dims, 0.05);
    return k;
  }
  if (name == "identity") {
    KernelSpec k;
    k.name = "identity";
    k.stencil = Stencil("identity", {{0, 0, 1.0}});
    k.initial = ripple_initial(dims, 0.05);
    return k;
  }
  throw InvalidParams("unknown kernel '" + name + "'");
}

}  // namespace stencilguard
