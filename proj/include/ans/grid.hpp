#pragma once

#include <algorithm>
#include <cmath>
#include <compare>
#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "ans/errors.hpp"

namespace ans {

// Grid cells used across the stack are 5 cm squares.
inline constexpr double kCellSize = 0.05;
inline constexpr double kCellArea = kCellSize * kCellSize;

struct Cell {
  int row = 0;
  int col = 0;

  friend constexpr auto operator<=>(const Cell&, const Cell&) = default;
};

inline std::string to_string(Cell c) {
  return "(" + std::to_string(c.row) + ", " + std::to_string(c.col) + ")";
}

// Half-open rectangle of cells [row0, row0 + rows) x [col0, col0 + cols).
struct Rect {
  int row0 = 0;
  int col0 = 0;
  int rows = 0;
  int cols = 0;

  bool empty() const { return rows <= 0 || cols <= 0; }
  bool contains(Cell c) const {
    return c.row >= row0 && c.row < row0 + rows && c.col >= col0 &&
           c.col < col0 + cols;
  }
  int row_end() const { return row0 + rows; }
  int col_end() const { return col0 + cols; }

  friend constexpr bool operator==(const Rect&, const Rect&) = default;
};

inline Rect intersect(const Rect& a, const Rect& b) {
  const int r0 = std::max(a.row0, b.row0);
  const int c0 = std::max(a.col0, b.col0);
  const int r1 = std::min(a.row_end(), b.row_end());
  const int c1 = std::min(a.col_end(), b.col_end());
  return {r0, c0, std::max(0, r1 - r0), std::max(0, c1 - c0)};
}

// Smallest rectangle covering both; an empty operand is ignored.
inline Rect bounding_union(const Rect& a, const Rect& b) {
  if (a.empty()) return b;
  if (b.empty()) return a;
  const int r0 = std::min(a.row0, b.row0);
  const int c0 = std::min(a.col0, b.col0);
  const int r1 = std::max(a.row_end(), b.row_end());
  const int c1 = std::max(a.col_end(), b.col_end());
  return {r0, c0, r1 - r0, c1 - c0};
}

inline Rect expand(const Rect& r, int margin) {
  return {r.row0 - margin, r.col0 - margin, r.rows + 2 * margin,
          r.cols + 2 * margin};
}

/// Dense row-major 2D array.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(check_dim(rows)) *
                  static_cast<std::size_t>(check_dim(cols)),
              fill) {}

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  Rect bounds() const { return {0, 0, rows_, cols_}; }

  bool in_bounds(int r, int c) const {
    return r >= 0 && r < rows_ && c >= 0 && c < cols_;
  }
  bool in_bounds(Cell c) const { return in_bounds(c.row, c.col); }

  T& operator()(int r, int c) { return data_[index(r, c)]; }
  const T& operator()(int r, int c) const { return data_[index(r, c)]; }
  T& operator[](Cell c) { return (*this)(c.row, c.col); }
  const T& operator[](Cell c) const { return (*this)(c.row, c.col); }

  std::size_t index(int r, int c) const {
    return static_cast<std::size_t>(r) * static_cast<std::size_t>(cols_) +
           static_cast<std::size_t>(c);
  }

  std::span<T> values() { return data_; }
  std::span<const T> values() const { return data_; }
  std::span<T> row_span(int r) {
    return std::span<T>(data_).subspan(index(r, 0), cols_);
  }
  std::span<const T> row_span(int r) const {
    return std::span<const T>(data_).subspan(index(r, 0), cols_);
  }

  void fill(T v) { std::fill(data_.begin(), data_.end(), v); }

  friend bool operator==(const Grid&, const Grid&) = default;

 private:
  static int check_dim(int n) {
    if (n < 0) throw InvalidArgument("grid dimension must be non-negative");
    return n;
  }

  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> data_;
};

/// Stack of equally sized float layers; layer k is contiguous.
class ChannelGrid {
 public:
  ChannelGrid() = default;
  ChannelGrid(int channels, int rows, int cols, float fill = 0.0F)
      : channels_(channels), rows_(rows), cols_(cols),
        data_(static_cast<std::size_t>(channels) * rows * cols, fill) {
    if (channels < 0 || rows < 0 || cols < 0) {
      throw InvalidArgument("channel grid dimensions must be non-negative");
    }
  }

  int channels() const { return channels_; }
  int rows() const { return rows_; }
  int cols() const { return cols_; }
  Rect bounds() const { return {0, 0, rows_, cols_}; }
  bool in_bounds(int r, int c) const {
    return r >= 0 && r < rows_ && c >= 0 && c < cols_;
  }

  float& at(int ch, int r, int c) { return data_[index(ch, r, c)]; }
  float at(int ch, int r, int c) const { return data_[index(ch, r, c)]; }

  std::size_t index(int ch, int r, int c) const {
    return (static_cast<std::size_t>(ch) * rows_ + r) * cols_ + c;
  }

  std::span<float> channel(int ch) {
    return std::span<float>(data_).subspan(
        static_cast<std::size_t>(ch) * rows_ * cols_,
        static_cast<std::size_t>(rows_) * cols_);
  }
  std::span<const float> channel(int ch) const {
    return std::span<const float>(data_).subspan(
        static_cast<std::size_t>(ch) * rows_ * cols_,
        static_cast<std::size_t>(rows_) * cols_);
  }
  std::span<const float> values() const { return data_; }
  std::span<float> values() { return data_; }

  bool all_zero() const {
    return std::all_of(data_.begin(), data_.end(),
                       [](float v) { return v == 0.0F; });
  }

  friend bool operator==(const ChannelGrid&, const ChannelGrid&) = default;

 private:
  int channels_ = 0;
  int rows_ = 0;
  int cols_ = 0;
  std::vector<float> data_;
};

// Throws InvalidArgument unless every value lies in [0, 1].
inline void require_unit_interval(const ChannelGrid& g, const char* what) {
  for (float v : g.values()) {
    if (!(v >= 0.0F && v <= 1.0F)) {
      throw InvalidArgument(std::string(what) +
                            ": grid values must lie in [0, 1]");
    }
  }
}

}  // namespace ans
