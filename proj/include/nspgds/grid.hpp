#pragma once

#include <cassert>
#include <cstddef>
#include <cstdint>
#include <vector>

namespace nspgds {

// Row-major dense 2-D array. Small helper instead of a matrix library:
// almost everything in the sampler is element-wise integer counts or
// per-element random draws, so expression templates buy nothing here.
template <typename T>
class Grid {
 public:
  Grid() = default;
  Grid(int rows, int cols, T fill = T{})
      : rows_(rows), cols_(cols), v_(static_cast<size_t>(rows) * cols, fill) {}

  T& operator()(int r, int c) {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return v_[static_cast<size_t>(r) * cols_ + c];
  }
  const T& operator()(int r, int c) const {
    assert(r >= 0 && r < rows_ && c >= 0 && c < cols_);
    return v_[static_cast<size_t>(r) * cols_ + c];
  }

  int rows() const { return rows_; }
  int cols() const { return cols_; }
  size_t size() const { return v_.size(); }
  bool empty() const { return v_.empty(); }

  T* row(int r) { return v_.data() + static_cast<size_t>(r) * cols_; }
  const T* row(int r) const { return v_.data() + static_cast<size_t>(r) * cols_; }

  std::vector<T>& flat() { return v_; }
  const std::vector<T>& flat() const { return v_; }

  void fill(T x) { v_.assign(v_.size(), x); }

  T row_sum(int r) const {
    T s{};
    for (int c = 0; c < cols_; ++c) s += (*this)(r, c);
    return s;
  }
  T col_sum(int c) const {
    T s{};
    for (int r = 0; r < rows_; ++r) s += (*this)(r, c);
    return s;
  }
  T total() const {
    T s{};
    for (const T& x : v_) s += x;
    return s;
  }

  bool operator==(const Grid& o) const {
    return rows_ == o.rows_ && cols_ == o.cols_ && v_ == o.v_;
  }

 private:
  int rows_ = 0;
  int cols_ = 0;
  std::vector<T> v_;
};

// Dense 3-D array, [a][b][c] row-major.
template <typename T>
class Tensor3 {
 public:
  Tensor3() = default;
  Tensor3(int na, int nb, int nc, T fill = T{})
      : na_(na), nb_(nb), nc_(nc),
        v_(static_cast<size_t>(na) * nb * nc, fill) {}

  T& operator()(int a, int b, int c) {
    assert(a >= 0 && a < na_ && b >= 0 && b < nb_ && c >= 0 && c < nc_);
    return v_[(static_cast<size_t>(a) * nb_ + b) * nc_ + c];
  }
  const T& operator()(int a, int b, int c) const {
    assert(a >= 0 && a < na_ && b >= 0 && b < nb_ && c >= 0 && c < nc_);
    return v_[(static_cast<size_t>(a) * nb_ + b) * nc_ + c];
  }

  int na() const { return na_; }
  int nb() const { return nb_; }
  int nc() const { return nc_; }
  size_t size() const { return v_.size(); }

  std::vector<T>& flat() { return v_; }
  const std::vector<T>& flat() const { return v_; }

  void fill(T x) { v_.assign(v_.size(), x); }

  T total() const {
    T s{};
    for (const T& x : v_) s += x;
    return s;
  }

  bool operator==(const Tensor3& o) const {
    return na_ == o.na_ && nb_ == o.nb_ && nc_ == o.nc_ && v_ == o.v_;
  }

 private:
  int na_ = 0, nb_ = 0, nc_ = 0;
  std::vector<T> v_;
};

}  // namespace nspgds
