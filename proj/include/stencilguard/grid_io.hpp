#pragma once

// ABFTGRID v1 binary layout (all integers little-endian u32):
//   "ABFTGRID" | version=1 | nx | ny | nz | dtype (0 = binary32, 1 = binary64)
//   then nz*ny*nx little-endian IEEE-754 values, layer-major, row-major.

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <variant>
#include <vector>

#include "stencilguard/grid.hpp"

namespace stencilguard {

inline constexpr char kGridMagic[8] = {'A', 'B', 'F', 'T', 'G', 'R', 'I', 'D'};
inline constexpr std::uint32_t kGridVersion = 1;
inline constexpr std::size_t kCsvMaxExtent = 64;

struct GridFileHeader {
  std::uint32_t version = kGridVersion;
  std::uint32_t nx = 0;
  std::uint32_t ny = 0;
  std::uint32_t nz = 0;
  ElementType dtype = ElementType::Binary32;
};

template <typename T>
void write_abftgrid(std::ostream& out, const Tile3D<T>& tile);
template <typename T>
void write_abftgrid(const std::filesystem::path& path, const Tile3D<T>& tile);

GridFileHeader read_abftgrid_header(std::istream& in);

// Throws FormatError when the stored dtype is not T.
template <typename T>
Tile3D<T> read_abftgrid(std::istream& in);
template <typename T>
Tile3D<T> read_abftgrid(const std::filesystem::path& path);

using AnyTile = std::variant<Tile3D<float>, Tile3D<double>>;
AnyTile read_abftgrid_any(const std::filesystem::path& path);

// Debug text form for tiles up to 64x64 per layer: one line per row (y
// ascending), comma separated, layers separated by an empty line.
template <typename T>
void write_csv(std::ostream& out, const Tile3D<T>& tile);
template <typename T>
Tile3D<T> read_csv(std::istream& in);

// <base>.abftgrid plus <base>.json {schema, iteration, epsilon, delta, dtype, b}.
template <typename T>
void write_checkpoint_files(const std::filesystem::path& base, const Tile3D<T>& tile,
                            const std::vector<std::vector<T>>& b, std::int64_t iteration, double epsilon,
                            std::int64_t delta);

}  // namespace stencilguard
