#include "stencilguard/grid_io.hpp"

#include <array>
#include <bit>
#include <charconv>
#include <cstring>
#include <fstream>
#include <iomanip>
#include <istream>
#include <limits>
#include <ostream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "stencilguard/error.hpp"

namespace stencilguard {

namespace {

using Bits32 = std::uint32_t;
using Bits64 = std::uint64_t;

template <typename U>
void put_le(std::ostream& out, U v) {
  std::array<char, sizeof(U)> bytes{};
  for (std::size_t i = 0; i < sizeof(U); ++i) bytes[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(bytes.data(), bytes.size());
}

template <typename U>
U get_le(std::istream& in) {
  std::array<unsigned char, sizeof(U)> bytes{};
  in.read(reinterpret_cast<char*>(bytes.data()), bytes.size());
  if (!in) throw FormatError("ABFTGRID: truncated input");
  U v = 0;
  for (std::size_t i = 0; i < sizeof(U); ++i) v |= static_cast<U>(bytes[i]) << (8 * i);
  return v;
}

template <typename T>
using BitsOf = std::conditional_t<sizeof(T) == 4, Bits32, Bits64>;

template <typename T>
Tile3D<T> read_values(std::istream& in, const GridFileHeader& h) {
  Tile3D<T> tile(h.nx, h.ny, h.nz);
  for (std::size_t z = 0; z < h.nz; ++z)
    for (T& v : tile.layer(z).values()) v = std::bit_cast<T>(get_le<BitsOf<T>>(in));
  return tile;
}

std::ifstream open_in(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open " + path.string());
  return in;
}

}  // namespace

template <typename T>
void write_abftgrid(std::ostream& out, const Tile3D<T>& tile) {
  out.write(kGridMagic, sizeof(kGridMagic));
  put_le<Bits32>(out, kGridVersion);
  put_le<Bits32>(out, static_cast<Bits32>(tile.nx()));
  put_le<Bits32>(out, static_cast<Bits32>(tile.ny()));
  put_le<Bits32>(out, static_cast<Bits32>(tile.nz()));
  put_le<Bits32>(out, static_cast<Bits32>(element_type_of<T>()));
  for (const auto& layer : tile.layers())
    for (T v : layer.values()) put_le<BitsOf<T>>(out, std::bit_cast<BitsOf<T>>(v));
  if (!out) throw FormatError("ABFTGRID: write failed");
}

template <typename T>
void write_abftgrid(const std::filesystem::path& path, const Tile3D<T>& tile) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw FormatError("cannot open " + path.string() + " for writing");
  write_abftgrid(out, tile);
}

GridFileHeader read_abftgrid_header(std::istream& in) {
  char magic[sizeof(kGridMagic)];
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kGridMagic, sizeof(magic)) != 0) throw FormatError("ABFTGRID: bad magic");
  GridFileHeader h;
  h.version = get_le<Bits32>(in);
  if (h.version != kGridVersion) throw FormatError("ABFTGRID: unsupported version " + std::to_string(h.version));
  h.nx = get_le<Bits32>(in);
  h.ny = get_le<Bits32>(in);
  h.nz = get_le<Bits32>(in);
  const Bits32 dtype = get_le<Bits32>(in);
  if (dtype > 1) throw FormatError("ABFTGRID: unknown dtype " + std::to_string(dtype));
  if (h.nx == 0 || h.ny == 0 || h.nz == 0) throw FormatError("ABFTGRID: zero extent");
  h.dtype = static_cast<ElementType>(dtype);
  return h;
}

template <typename T>
Tile3D<T> read_abftgrid(std::istream& in) {
  const GridFileHeader h = read_abftgrid_header(in);
  if (h.dtype != element_type_of<T>()) throw FormatError("ABFTGRID: stored dtype differs from requested");
  return read_values<T>(in, h);
}

template <typename T>
Tile3D<T> read_abftgrid(const std::filesystem::path& path) {
  auto in = open_in(path);
  return read_abftgrid<T>(in);
}

AnyTile read_abftgrid_any(const std::filesystem::path& path) {
  auto in = open_in(path);
  const GridFileHeader h = read_abftgrid_header(in);
  if (h.dtype == ElementType::Binary32) return read_values<float>(in, h);
  return read_values<double>(in, h);
}

template <typename T>
void write_csv(std::ostream& out, const Tile3D<T>& tile) {
  if (tile.nx() > kCsvMaxExtent || tile.ny() > kCsvMaxExtent)
    throw FormatError("CSV output is limited to 64x64 layers");
  std::ostringstream s;
  s << std::setprecision(std::numeric_limits<T>::max_digits10);
  for (std::size_t z = 0; z < tile.nz(); ++z) {
    if (z > 0) s << '\n';
    for (std::size_t y = 0; y < tile.ny(); ++y) {
      for (std::size_t x = 0; x < tile.nx(); ++x) {
        if (x > 0) s << ',';
        s << tile.at(x, y, z);
      }
      s << '\n';
    }
  }
  out << s.str();
}

template <typename T>
Tile3D<T> read_csv(std::istream& in) {
  std::vector<Grid2D<T>> layers;
  std::vector<T> values;
  std::size_t nx = 0, ny = 0;
  auto flush = [&] {
    if (ny == 0) return;
    layers.emplace_back(nx, ny, std::move(values));
    values = {};
    ny = 0;
  };
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) {
      flush();
      continue;
    }
    std::size_t count = 0;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      std::istringstream num(cell);
      num.imbue(std::locale::classic());
      long double v = 0;
      if (!(num >> v)) throw FormatError("CSV: bad value '" + cell + "'");
      values.push_back(static_cast<T>(v));
      ++count;
    }
    if (ny == 0 && layers.empty()) nx = count;
    if (ny == 0 && !layers.empty() && count != nx) throw FormatError("CSV: layers differ in width");
    if (count != nx) throw FormatError("CSV: ragged row");
    ++ny;
    if (nx > kCsvMaxExtent || ny > kCsvMaxExtent) throw FormatError("CSV input is limited to 64x64 layers");
  }
  flush();
  if (layers.empty()) throw FormatError("CSV: no data");
  return Tile3D<T>(std::move(layers));
}

template <typename T>
void write_checkpoint_files(const std::filesystem::path& base, const Tile3D<T>& tile,
                            const std::vector<std::vector<T>>& b, std::int64_t iteration, double epsilon,
                            std::int64_t delta) {
  auto grid_path = base;
  grid_path += ".abftgrid";
  write_abftgrid(grid_path, tile);
  nlohmann::json j;
  j["schema"] = 1;
  j["iteration"] = iteration;
  j["epsilon"] = epsilon;
  j["delta"] = delta;
  j["dtype"] = element_type_of<T>() == ElementType::Binary32 ? "f32" : "f64";
  j["grid"] = grid_path.filename().string();
  auto& layers = j["b"] = nlohmann::json::array();
  for (const auto& v : b) {
    nlohmann::json row = nlohmann::json::array();
    for (T x : v) row.push_back(static_cast<double>(x));
    layers.push_back(std::move(row));
  }
  auto json_path = base;
  json_path += ".json";
  std::ofstream out(json_path, std::ios::trunc);
  if (!out) throw FormatError("cannot open " + json_path.string() + " for writing");
  out << j.dump(2) << '\n';
}

#define STENCILGUARD_INSTANTIATE_IO(T)                                                                     \
  template void write_abftgrid<T>(std::ostream&, const Tile3D<T>&);                                       \
  template void write_abftgrid<T>(const std::filesystem::path&, const Tile3D<T>&);                        \
  template Tile3D<T> read_abftgrid<T>(std::istream&);                                                     \
  template Tile3D<T> read_abftgrid<T>(const std::filesystem::path&);                                      \
  template void write_csv<T>(std::ostream&, const Tile3D<T>&);                                            \
  template Tile3D<T> read_csv<T>(std::istream&);                                                          \
  template void write_checkpoint_files<T>(const std::filesystem::path&, const Tile3D<T>&,                 \
                                          const std::vector<std::vector<T>>&, std::int64_t, double,        \
                                          std::int64_t);

STENCILGUARD_INSTANTIATE_IO(float)
STENCILGUARD_INSTANTIATE_IO(double)

#undef STENCILGUARD_INSTANTIATE_IO

}  // namespace stencilguard
