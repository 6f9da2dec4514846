#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <stdexcept>
#include <string>

namespace firescan {

/// Dense row-major raster. Indexing is grid(row, col).
template <typename Scalar>
using Grid = Eigen::Array<Scalar, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

using DnGrid = Grid<std::uint16_t>;
using BoolGrid = Grid<bool>;
using FireMask = BoolGrid;

struct Pixel {
  Eigen::Index row = 0;
  Eigen::Index col = 0;
};

/// Half-open row interval [begin, begin + count).
struct RowRange {
  Eigen::Index begin = 0;
  Eigen::Index count = 0;

  Eigen::Index end() const { return begin + count; }
};

template <typename A, typename B>
bool same_shape(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b) {
  return a.rows() == b.rows() && a.cols() == b.cols();
}

template <typename A, typename B>
void require_same_shape(const Eigen::DenseBase<A>& a, const Eigen::DenseBase<B>& b,
                        const std::string& what) {
  if (!same_shape(a, b)) {
    throw std::invalid_argument(what + ": dimension mismatch (" + std::to_string(a.cols()) + "x" +
                                std::to_string(a.rows()) + " vs " + std::to_string(b.cols()) +
                                "x" + std::to_string(b.rows()) + ")");
  }
}

inline std::int64_t popcount(const BoolGrid& mask) { return mask.count(); }

inline std::int64_t popcount(const BoolGrid& mask, RowRange rows) {
  return mask.middleRows(rows.begin, rows.count).count();
}

/// 3x3 binary dilation; output(p) is true iff any pixel of the clipped 3x3
/// block around p is true in the input.
inline BoolGrid dilate3x3(const BoolGrid& in) {
  const Eigen::Index h = in.rows();
  const Eigen::Index w = in.cols();
  // Separable: horizontal pass then vertical pass.
  BoolGrid horiz(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    for (Eigen::Index c = 0; c < w; ++c) {
      bool v = in(r, c);
      if (c > 0) v = v || in(r, c - 1);
      if (c + 1 < w) v = v || in(r, c + 1);
      horiz(r, c) = v;
    }
  }
  BoolGrid out(h, w);
  for (Eigen::Index r = 0; r < h; ++r) {
    out.row(r) = horiz.row(r);
    if (r > 0) out.row(r) = out.row(r) || horiz.row(r - 1);
    if (r + 1 < h) out.row(r) = out.row(r) || horiz.row(r + 1);
  }
  return out;
}

}  // namespace firescan
