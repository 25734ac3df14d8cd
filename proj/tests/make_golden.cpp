// Regenerates tests/data/hotspot3d_64x64x8_128.abftgrid with the test oracle.
// Usage: make_golden <output path>
#include <iostream>

#include "oracle.hpp"
#include "stencilguard/grid_io.hpp"
#include "stencilguard/kernels.hpp"
#include "stencilguard/sweep.hpp"

using namespace stencilguard;

int main(int argc, char** argv) {
  if (argc != 2) {
    std::cerr << "usage: make_golden <out.abftgrid>\n";
    return 1;
  }
  const TileDims dims{64, 64, 8};
  const KernelSpec k = make_kernel("hotspot3d", dims);
  auto t = initial_tile<float>(k, dims);
  for (int i = 0; i < 128; ++i) t = oracle::sweep(t, k);
  write_abftgrid(std::filesystem::path(argv[1]), t);
  return 0;
}
