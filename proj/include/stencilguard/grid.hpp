#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <type_traits>
#include <string>
#include <utility>
#include <vector>

#include "stencilguard/error.hpp"

namespace stencilguard {

enum class ElementType : std::uint32_t { Binary32 = 0, Binary64 = 1 };

template <typename T>
constexpr ElementType element_type_of() {
  static_assert(std::is_same_v<T, float> || std::is_same_v<T, double>);
  return std::is_same_v<T, float> ? ElementType::Binary32 : ElementType::Binary64;
}

inline int element_bits(ElementType t) { return t == ElementType::Binary32 ? 32 : 64; }

// Dense nx-by-ny field. Row-major with rows indexed by y: (x, y) lives at
// data[y * nx + x].
template <typename T>
class Grid2D {
 public:
  using value_type = T;

  Grid2D() = default;
  Grid2D(std::size_t nx, std::size_t ny, T fill = T{0})
      : nx_(nx), ny_(ny), data_(nx * ny, fill) {
    if (nx == 0 || ny == 0) throw DimensionMismatch("grid dimensions must be >= 1");
  }
  Grid2D(std::size_t nx, std::size_t ny, std::vector<T> data)
      : nx_(nx), ny_(ny), data_(std::move(data)) {
    if (nx == 0 || ny == 0) throw DimensionMismatch("grid dimensions must be >= 1");
    if (data_.size() != nx * ny)
      throw DimensionMismatch("grid data length " + std::to_string(data_.size()) +
                              " != nx*ny = " + std::to_string(nx * ny));
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t size() const { return data_.size(); }

  std::int64_t iteration() const { return iteration_; }
  void set_iteration(std::int64_t t) { iteration_ = t; }

  T& at(std::size_t x, std::size_t y) { return data_[y * nx_ + x]; }
  const T& at(std::size_t x, std::size_t y) const { return data_[y * nx_ + x]; }

  std::span<T> row(std::size_t y) { return {data_.data() + y * nx_, nx_}; }
  std::span<const T> row(std::size_t y) const { return {data_.data() + y * nx_, nx_}; }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  T* data() { return data_.data(); }
  const T* data() const { return data_.data(); }

  bool same_shape(const Grid2D& other) const { return nx_ == other.nx_ && ny_ == other.ny_; }

  friend bool operator==(const Grid2D&, const Grid2D&) = default;

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<T> data_;
  std::int64_t iteration_ = 0;
};

// The additive term C of the update. Keeps the column sums c_x[x] = sum_y C
// and row sums c_y[y] = sum_x C, accumulated in the element type in the same
// order as the direct checksums.
template <typename T>
class ConstantField {
 public:
  ConstantField() = default;

  static ConstantField uniform(T c, std::size_t nx, std::size_t ny) {
    ConstantField f;
    f.nx_ = nx;
    f.ny_ = ny;
    f.uniform_ = true;
    f.value_ = c;
    f.refresh_sums();
    return f;
  }

  static ConstantField zero(std::size_t nx, std::size_t ny) { return uniform(T{0}, nx, ny); }

  static ConstantField per_cell(Grid2D<T> values) {
    ConstantField f;
    f.nx_ = values.nx();
    f.ny_ = values.ny();
    f.uniform_ = false;
    f.cells_ = std::move(values);
    f.refresh_sums();
    return f;
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  bool is_uniform() const { return uniform_; }
  T uniform_value() const { return value_; }

  T at(std::size_t x, std::size_t y) const { return uniform_ ? value_ : cells_.at(x, y); }
  // nullptr for a uniform field.
  const T* row_ptr(std::size_t y) const { return uniform_ ? nullptr : cells_.row(y).data(); }

  std::span<const T> column_sums() const { return c_x_; }  // length nx
  std::span<const T> row_sums() const { return c_y_; }     // length ny

  void set_uniform(T c) {
    uniform_ = true;
    value_ = c;
    cells_ = Grid2D<T>();
    refresh_sums();
  }
  void set_cells(Grid2D<T> values) {
    if (values.nx() != nx_ || values.ny() != ny_)
      throw DimensionMismatch("constant field dims differ");
    uniform_ = false;
    cells_ = std::move(values);
    refresh_sums();
  }

 private:
  void refresh_sums() {
    c_x_.assign(nx_, T{0});
    c_y_.assign(ny_, T{0});
    for (std::size_t y = 0; y < ny_; ++y) {
      T row = T{0};
      for (std::size_t x = 0; x < nx_; ++x) {
        const T v = at(x, y);
        c_x_[x] += v;
        row += v;
      }
      c_y_[y] = row;
    }
  }

  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  bool uniform_ = true;
  T value_ = T{0};
  Grid2D<T> cells_;
  std::vector<T> c_x_;
  std::vector<T> c_y_;
};

// Stack of nz independently checksummed layers sharing (nx, ny).
template <typename T>
class Tile3D {
 public:
  Tile3D() = default;
  Tile3D(std::size_t nx, std::size_t ny, std::size_t nz, T fill = T{0}) : nx_(nx), ny_(ny) {
    if (nz == 0) throw DimensionMismatch("tile needs at least one layer");
    layers_.reserve(nz);
    for (std::size_t z = 0; z < nz; ++z) layers_.emplace_back(nx, ny, fill);
  }
  explicit Tile3D(std::vector<Grid2D<T>> layers) : layers_(std::move(layers)) {
    if (layers_.empty()) throw DimensionMismatch("tile needs at least one layer");
    nx_ = layers_.front().nx();
    ny_ = layers_.front().ny();
    for (const auto& l : layers_)
      if (l.nx() != nx_ || l.ny() != ny_) throw DimensionMismatch("tile layers differ in shape");
    set_iteration(layers_.front().iteration());
  }

  std::size_t nx() const { return nx_; }
  std::size_t ny() const { return ny_; }
  std::size_t nz() const { return layers_.size(); }
  std::size_t cell_count() const { return nx_ * ny_ * layers_.size(); }

  Grid2D<T>& layer(std::size_t z) { return layers_[z]; }
  const Grid2D<T>& layer(std::size_t z) const { return layers_[z]; }
  std::vector<Grid2D<T>>& layers() { return layers_; }
  const std::vector<Grid2D<T>>& layers() const { return layers_; }

  std::int64_t iteration() const { return layers_.empty() ? 0 : layers_.front().iteration(); }
  void set_iteration(std::int64_t t) {
    for (auto& l : layers_) l.set_iteration(t);
  }

  T& at(std::size_t x, std::size_t y, std::size_t z) { return layers_[z].at(x, y); }
  const T& at(std::size_t x, std::size_t y, std::size_t z) const { return layers_[z].at(x, y); }

  // Layer-major copy of all values.
  std::vector<T> flatten() const {
    std::vector<T> out;
    out.reserve(cell_count());
    for (const auto& l : layers_) out.insert(out.end(), l.values().begin(), l.values().end());
    return out;
  }

  friend bool operator==(const Tile3D&, const Tile3D&) = default;

 private:
  std::size_t nx_ = 0;
  std::size_t ny_ = 0;
  std::vector<Grid2D<T>> layers_;
};

}  // namespace stencilguard
