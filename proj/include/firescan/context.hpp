#pragma once

#include "firescan/grid.hpp"

#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <stdexcept>
#include <string>

namespace firescan {

namespace detail {

/// Unevaluated sum hi + lo carrying roughly twice the working precision.
/// Corner differences of running sums cancel catastrophically in plain
/// floating point; the low word keeps what the high word drops.
template <typename T>
struct TwoFloat {
  T hi = 0;
  T lo = 0;
  T value() const { return hi + lo; }
};

template <typename T>
TwoFloat<T> two_sum(T a, T b) {
  const T s = a + b;
  const T bb = s - a;
  return {s, (a - (s - bb)) + (b - bb)};
}

template <typename T>
TwoFloat<T> fast_two_sum(T a, T b) {
  const T s = a + b;
  return {s, b - (s - a)};
}

template <typename T>
TwoFloat<T> operator+(TwoFloat<T> x, TwoFloat<T> y) {
  auto s = two_sum(x.hi, y.hi);
  return fast_two_sum(s.hi, s.lo + (x.lo + y.lo));
}

template <typename T>
TwoFloat<T> operator-(TwoFloat<T> x, TwoFloat<T> y) {
  return x + TwoFloat<T>{-y.hi, -y.lo};
}

// Dekker split and product; exact without relying on a fused multiply-add.
template <typename T>
TwoFloat<T> split(T a) {
  constexpr T factor = static_cast<T>((1ull << ((std::numeric_limits<T>::digits + 1) / 2)) + 1);
  const T c = factor * a;
  const T hi = c - (c - a);
  return {hi, a - hi};
}

template <typename T>
TwoFloat<T> two_prod(T a, T b) {
  const T p = a * b;
  const auto x = split(a);
  const auto y = split(b);
  return {p, ((x.hi * y.hi - p) + x.hi * y.lo + x.lo * y.hi) + x.lo * y.lo};
}

template <typename T>
TwoFloat<T> operator*(TwoFloat<T> x, TwoFloat<T> y) {
  auto p = two_prod(x.hi, y.hi);
  return fast_two_sum(p.hi, p.lo + (x.hi * y.lo + x.lo * y.hi));
}

}  // namespace detail

/// Summed-area tables of a value field restricted to an inclusion mask:
/// running sums of values, squared values and the inclusion indicator.
/// Tables carry a leading zero row and column, so a rectangle query is four
/// lookups per table. Sums are kept in compensated (hi, lo) form.
template <typename Scalar = double>
class ExclusionSAT {
 public:
  using Compensated = detail::TwoFloat<Scalar>;

  struct Sums {
    Compensated sum;
    Compensated sum_sq;
    std::int64_t count = 0;
  };

  template <typename Derived>
  ExclusionSAT(const Eigen::ArrayBase<Derived>& values, const BoolGrid& include) {
    require_same_shape(values, include, "build_exclusion_sat");
    const Eigen::Index h = values.rows();
    const Eigen::Index w = values.cols();
    sum_hi_ = Grid<Scalar>::Zero(h + 1, w + 1);
    sum_lo_ = Grid<Scalar>::Zero(h + 1, w + 1);
    sq_hi_ = Grid<Scalar>::Zero(h + 1, w + 1);
    sq_lo_ = Grid<Scalar>::Zero(h + 1, w + 1);
    count_ = Grid<std::int32_t>::Zero(h + 1, w + 1);
    for (Eigen::Index r = 0; r < h; ++r) {
      Compensated row_sum;
      Compensated row_sq;
      std::int32_t row_count = 0;
      for (Eigen::Index c = 0; c < w; ++c) {
        if (include(r, c)) {
          const Scalar v = static_cast<Scalar>(values(r, c));
          row_sum = row_sum + Compensated{v, 0};
          row_sq = row_sq + detail::two_prod(v, v);
          ++row_count;
        }
        const Compensated s = Compensated{sum_hi_(r, c + 1), sum_lo_(r, c + 1)} + row_sum;
        const Compensated q = Compensated{sq_hi_(r, c + 1), sq_lo_(r, c + 1)} + row_sq;
        sum_hi_(r + 1, c + 1) = s.hi;
        sum_lo_(r + 1, c + 1) = s.lo;
        sq_hi_(r + 1, c + 1) = q.hi;
        sq_lo_(r + 1, c + 1) = q.lo;
        count_(r + 1, c + 1) = count_(r, c + 1) + row_count;
      }
    }
  }

  Eigen::Index width() const { return count_.cols() - 1; }
  Eigen::Index height() const { return count_.rows() - 1; }

  /// Sums over rows [row0, row1) x cols [col0, col1).
  Sums rect(Eigen::Index row0, Eigen::Index col0, Eigen::Index row1, Eigen::Index col1) const {
    Sums s;
    s.sum = corners(sum_hi_, sum_lo_, row0, col0, row1, col1);
    s.sum_sq = corners(sq_hi_, sq_lo_, row0, col0, row1, col1);
    s.count = std::int64_t{count_(row1, col1)} - count_(row0, col1) - count_(row1, col0) + count_(row0, col0);
    return s;
  }

  const Grid<std::int32_t>& count_table() const { return count_; }

 private:
  static Compensated corners(const Grid<Scalar>& hi, const Grid<Scalar>& lo, Eigen::Index row0, Eigen::Index col0,
                             Eigen::Index row1, Eigen::Index col1) {
    auto at = [&](Eigen::Index r, Eigen::Index c) { return Compensated{hi(r, c), lo(r, c)}; };
    return ((at(row1, col1) - at(row0, col1)) - at(row1, col0)) + at(row0, col0);
  }

  Grid<Scalar> sum_hi_;
  Grid<Scalar> sum_lo_;
  Grid<Scalar> sq_hi_;
  Grid<Scalar> sq_lo_;
  Grid<std::int32_t> count_;
};

template <typename Derived>
ExclusionSAT(const Eigen::ArrayBase<Derived>&, const BoolGrid&)
    -> ExclusionSAT<typename Derived::Scalar>;

template <typename Scalar = double>
struct WindowStats {
  Scalar mean = 0;
  Scalar std = 0;  // population form
  std::int64_t valid_count = 0;
  int window_side = 0;  // nominal, before clipping
};

template <typename Derived>
auto build_exclusion_sat(const Eigen::ArrayBase<Derived>& values, const BoolGrid& include) {
  return ExclusionSAT<typename Derived::Scalar>(values, include);
}

namespace detail {

struct ClippedWindow {
  Eigen::Index row0, col0, row1, col1;
  std::int64_t area() const { return (row1 - row0) * (col1 - col0); }
};

template <typename Scalar>
ClippedWindow clip_window(const ExclusionSAT<Scalar>& sat, Pixel center, Eigen::Index half) {
  if (center.row < 0 || center.col < 0 || center.row >= sat.height() || center.col >= sat.width()) {
    throw std::out_of_range("window center (" + std::to_string(center.row) + ", " +
                            std::to_string(center.col) + ") outside grid");
  }
  return {std::max<Eigen::Index>(0, center.row - half), std::max<Eigen::Index>(0, center.col - half),
          std::min(sat.height(), center.row + half + 1), std::min(sat.width(), center.col + half + 1)};
}

template <typename Scalar>
WindowStats<Scalar> stats_from_sums(const typename ExclusionSAT<Scalar>::Sums& s, Eigen::Index half) {
  using C = TwoFloat<Scalar>;
  WindowStats<Scalar> ws;
  const Scalar n = static_cast<Scalar>(s.count);
  ws.mean = s.sum.hi / n + s.sum.lo / n;
  // n^2 var = n * sum_sq - sum^2, formed in compensated arithmetic.
  const Scalar scaled = (C{n, 0} * s.sum_sq - s.sum * s.sum).value();
  ws.std = std::sqrt(std::max(Scalar(0), scaled / (n * n)));
  ws.valid_count = s.count;
  ws.window_side = static_cast<int>(2 * half + 1);
  return ws;
}

}  // namespace detail

/// Mean and population standard deviation over included pixels of the
/// (2 * half_width + 1)^2 window around center, clipped to the grid.
/// Empty when the clipped window holds no included pixel.
template <typename Scalar>
std::optional<WindowStats<Scalar>> window_stats(const ExclusionSAT<Scalar>& sat, Pixel center,
                                                Eigen::Index half_width) {
  const auto win = detail::clip_window(sat, center, half_width);
  const auto sums = sat.rect(win.row0, win.col0, win.row1, win.col1);
  if (sums.count == 0) return std::nullopt;
  return detail::stats_from_sums<Scalar>(sums, half_width);
}

/// Grows the window side 5, 7, 9, ... up to max_side and returns the stats of
/// the first one whose included count reaches min_valid_fraction of the
/// clipped window area. Empty when no side qualifies.
template <typename Scalar>
std::optional<WindowStats<Scalar>> adaptive_window_stats(const ExclusionSAT<Scalar>& sat, Pixel center,
                                                         int min_side = 5, int max_side = 61,
                                                         double min_valid_fraction = 0.25) {
  if (min_side < 1 || min_side % 2 == 0 || max_side % 2 == 0 || max_side < min_side) {
    throw std::invalid_argument("window sides must be odd with min_side <= max_side");
  }
  for (int side = min_side; side <= max_side; side += 2) {
    const Eigen::Index half = side / 2;
    const auto win = detail::clip_window(sat, center, half);
    const auto sums = sat.rect(win.row0, win.col0, win.row1, win.col1);
    if (sums.count > 0 && static_cast<double>(sums.count) >= min_valid_fraction * static_cast<double>(win.area())) {
      return detail::stats_from_sums<Scalar>(sums, half);
    }
  }
  return std::nullopt;
}

}  // namespace firescan
