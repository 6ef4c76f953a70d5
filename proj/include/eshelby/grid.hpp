#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

namespace eshelby {

/// Row-major 2D grid with physical pixel spacing. Rows run along the axial
/// (y) direction and columns along the lateral (x) direction.
template <class T>
struct Grid {
  std::size_t rows = 0;
  std::size_t cols = 0;
  double dx = 1.0;  // cm per column
  double dy = 1.0;  // cm per row
  std::vector<T> values;

  Grid() = default;
  Grid(std::size_t r, std::size_t c, double dx_cm, double dy_cm, T fill = T{})
      : rows(r), cols(c), dx(dx_cm), dy(dy_cm), values(r * c, fill) {}

  T& operator()(std::size_t r, std::size_t c) { return values[r * cols + c]; }
  const T& operator()(std::size_t r, std::size_t c) const { return values[r * cols + c]; }

  std::size_t size() const noexcept { return values.size(); }
  std::span<T> span() noexcept { return values; }
  std::span<const T> span() const noexcept { return values; }

  template <class U>
  bool congruent(const Grid<U>& other) const noexcept {
    return rows == other.rows && cols == other.cols;
  }

  template <class U>
  Grid<U> like(U fill = U{}) const {
    return Grid<U>(rows, cols, dx, dy, fill);
  }
};

using StrainField = Grid<double>;
/// One byte per pixel; nonzero means set.
using BitGrid = Grid<std::uint8_t>;

inline std::size_t count_set(const BitGrid& g) {
  std::size_t n = 0;
  for (auto v : g.values) n += (v != 0);
  return n;
}

/// Axis-aligned pixel rectangle.
struct PixelWindow {
  std::size_t row = 0;
  std::size_t col = 0;
  std::size_t height = 0;
  std::size_t width = 0;

  bool fits(std::size_t rows, std::size_t cols) const noexcept {
    return height > 0 && width > 0 && row + height <= rows && col + width <= cols;
  }
};

}  // namespace eshelby
