#pragma once

#include <bit>
#include <cstddef>
#include <cstdint>
#include <vector>

#include "capnet/error.hpp"

namespace capnet {

// Dense row-major matrix. Just enough surface for trade tables and RCA grids.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(std::size_t rows, std::size_t cols, T fill = T{})
      : rows_(rows), cols_(cols), cells_(rows * cols, fill) {}

  T& operator()(std::size_t i, std::size_t j) { return cells_[i * cols_ + j]; }
  const T& operator()(std::size_t i, std::size_t j) const { return cells_[i * cols_ + j]; }

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  T row_sum(std::size_t i) const {
    T s{};
    for (std::size_t j = 0; j < cols_; ++j) s += (*this)(i, j);
    return s;
  }
  T col_sum(std::size_t j) const {
    T s{};
    for (std::size_t i = 0; i < rows_; ++i) s += (*this)(i, j);
    return s;
  }
  T total() const {
    T s{};
    for (const T& v : cells_) s += v;
    return s;
  }

  bool operator==(const Grid&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0;
  std::vector<T> cells_;
};

// 0/1 matrix with bit-packed rows. Row-major 64-bit words; unused tail bits
// of each row are kept zero so row-wise popcounts and subset tests can run
// straight over the words.
class BitMatrix {
 public:
  BitMatrix() = default;
  BitMatrix(std::size_t rows, std::size_t cols)
      : rows_(rows), cols_(cols), words_(cols == 0 ? 0 : (cols + 63) / 64),
        bits_(rows * words_, 0) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t words_per_row() const { return words_; }

  bool test(std::size_t i, std::size_t j) const {
    return (bits_[i * words_ + j / 64] >> (j % 64)) & 1ULL;
  }
  void set(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] |= 1ULL << (j % 64); }
  void reset(std::size_t i, std::size_t j) { bits_[i * words_ + j / 64] &= ~(1ULL << (j % 64)); }
  void assign(std::size_t i, std::size_t j, bool value) {
    if (value) {
      set(i, j);
    } else {
      reset(i, j);
    }
  }

  const std::uint64_t* row(std::size_t i) const { return bits_.data() + i * words_; }

  std::size_t ones_in_row(std::size_t i) const {
    std::size_t n = 0;
    const std::uint64_t* w = row(i);
    for (std::size_t k = 0; k < words_; ++k) n += std::popcount(w[k]);
    return n;
  }

  std::size_t count() const {
    std::size_t n = 0;
    for (std::uint64_t w : bits_) n += std::popcount(w);
    return n;
  }

  BitMatrix transposed() const {
    BitMatrix t(cols_, rows_);
    for (std::size_t i = 0; i < rows_; ++i)
      for (std::size_t j = 0; j < cols_; ++j)
        if (test(i, j)) t.set(j, i);
    return t;
  }

  // popcount of the AND of two row spans
  static std::size_t and_popcount(const std::uint64_t* a, const std::uint64_t* b,
                                  std::size_t words) {
    std::size_t n = 0;
    for (std::size_t k = 0; k < words; ++k) n += std::popcount(a[k] & b[k]);
    return n;
  }

  // true iff the set bits of `sub` are a subset of the set bits of `super`
  static bool is_subset(const std::uint64_t* sub, const std::uint64_t* super,
                        std::size_t words) {
    for (std::size_t k = 0; k < words; ++k)
      if (sub[k] & ~super[k]) return false;
    return true;
  }

  bool operator==(const BitMatrix&) const = default;

 private:
  std::size_t rows_ = 0, cols_ = 0, words_ = 0;
  std::vector<std::uint64_t> bits_;
};

}  // namespace capnet
