#pragma once

#include <string>
#include <vector>

#include "stencilguard/fault.hpp"
#include "stencilguard/kernel_spec.hpp"

namespace stencilguard {

// 1 + amplitude * s(x, y, z) with a smooth s in [0, 1].
CellFunction ripple_initial(const TileDims& dims, double amplitude);

/// S = {(0,0,w1), (-1,0,w2), (1,0,w3), (0,1,w4), (0,-1,w5)}, bounce-back.
KernelSpec make_five_point(double w1, double w2, double w3, double w4, double w5);

// Material and integration constants of the thermal kernel. Defaults follow
// the Rodinia HotSpot3D constants; the single source of truth for the
// coefficients is thermal_coefficients().
struct ThermalParams {
  double chip_height = 0.016;  // m
  double chip_width = 0.016;   // m
  double chip_thickness = 0.0005;
  double k_si = 100.0;           // thermal conductivity, W/(m K)
  double spec_heat_si = 1.75e6;  // volumetric specific heat, J/(m^3 K)
  double factor_chip = 0.5;
  double max_pd = 3.0e6;         // max power density, W/m^3
  double precision = 0.001;      // allowed temperature step
  // Peak of the per-step heat input C on the powered layer. Temperatures are
  // kept in normalized units around 1.0.
  double peak_heat = 1.0e-3;
  // Relative amplitude of the smooth initial pattern on top of 1.0.
  double initial_ripple = 0.05;
};

struct ThermalCoefficients {
  double step_div_cap = 0.0;
  double ce = 0.0, cw = 0.0;  // x neighbors
  double cn = 0.0, cs = 0.0;  // y neighbors
  double ct = 0.0, cb = 0.0;  // layers above and below
  double cc = 0.0;            // center, 1 - sum of the others
};

ThermalCoefficients thermal_coefficients(const TileDims& dims, const ThermalParams& params);

// Power map in [0, 1] over one layer, applied to layer 0 only.
using PowerMap = std::function<double(std::size_t x, std::size_t y)>;

// Smooth map with a few Gaussian hot spots; the default for make_kernel.
PowerMap default_power_map(const TileDims& dims);

/// Seven-point thermal update: center 1 - (2ce + 2cn + 2ct), four in-layer
/// neighbors, top/bottom coupling, C = peak_heat * power on layer 0,
/// bounce-back everywhere. Throws InvalidParams on a negative weight.
KernelSpec make_hotspot3d_like(const TileDims& dims, const ThermalParams& params, PowerMap power);

// Names accepted by make_kernel.
std::vector<std::string> kernel_names();

/// "hotspot3d", "five-point" (0.2 each), "average4" (0, 0.25 x4), "identity".
KernelSpec make_kernel(const std::string& name, const TileDims& dims);

}  // namespace stencilguard
