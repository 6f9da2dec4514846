#pragma once

// Literal per-pixel reference implementations of the three condition sets.
// Plain double loops over the reflectance grids: no summed-area tables, no
// array expressions, no shared code with the library detectors.

#include "firescan/reflectance.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

namespace firescan::oracle {

struct NaiveStats {
  double mean;
  double std;
  long count;
};

class Naive {
 public:
  explicit Naive(const ReflectanceStack& s) : s_(s), h_(s.height()), w_(s.width()) {}

  double rho(int ch, long r, long c) const { return s_.channels.at(ch)(r, c); }
  bool valid(long r, long c) const { return s_.valid(r, c); }
  bool inside(long r, long c) const { return r >= 0 && c >= 0 && r < h_ && c < w_; }

  std::optional<double> ratio(int i, int j, long r, long c) const {
    const double den = rho(j, r, c);
    if (den <= 0.0) return std::nullopt;
    return rho(i, r, c) / den;
  }
  // A clause over an undefined ratio is false.
  bool ratio_gt(int i, int j, long r, long c, double t) const {
    auto q = ratio(i, j, r, c);
    return q && *q > t;
  }
  bool ratio_ge(int i, int j, long r, long c, double t) const {
    auto q = ratio(i, j, r, c);
    return q && *q >= t;
  }

  // Sums over included pixels of the clipped square window.
  template <typename Included>
  std::optional<NaiveStats> window(long r, long c, long half, int field, Included included) const {
    double s = 0, s2 = 0;
    long n = 0;
    for (long y = r - half; y <= r + half; ++y) {
      for (long x = c - half; x <= c + half; ++x) {
        if (!inside(y, x) || !included(y, x)) continue;
        const double v = field == 75 ? rho(7, y, x) / rho(5, y, x) : rho(7, y, x);
        s += v;
        s2 += v * v;
        ++n;
      }
    }
    if (n == 0) return std::nullopt;
    const double mean = s / static_cast<double>(n);
    return NaiveStats{mean, std::sqrt(std::max(0.0, s2 / static_cast<double>(n) - mean * mean)), n};
  }

  template <typename Included>
  long window_count(long r, long c, long half, Included included) const {
    long n = 0;
    for (long y = r - half; y <= r + half; ++y) {
      for (long x = c - half; x <= c + half; ++x) {
        if (inside(y, x) && included(y, x)) ++n;
      }
    }
    return n;
  }

  long clipped_area(long r, long c, long half) const {
    const long rows = std::min(h_ - 1, r + half) - std::max(0L, r - half) + 1;
    const long cols = std::min(w_ - 1, c + half) - std::max(0L, c - half) + 1;
    return rows * cols;
  }

  // ---- fixed 61 x 61 window condition set (uncorrected reflectance) ----

  bool s_water(long r, long c) const {
    if (!valid(r, c)) return false;
    const double p1 = rho(1, r, c), p2 = rho(2, r, c), p3 = rho(3, r, c), p4 = rho(4, r, c);
    const double p5 = rho(5, r, c), p6 = rho(6, r, c), p7 = rho(7, r, c);
    return (p4 > p5) && (p5 > p6) && (p6 > p7) && (p1 - p7 < 0.2) &&
           ((p3 > p2) || ((p1 > p2) && (p2 > p3) && (p3 > p4)));
  }

  bool s_unambiguous(long r, long c) const {
    if (!valid(r, c)) return false;
    const double p1 = rho(1, r, c), p5 = rho(5, r, c), p6 = rho(6, r, c), p7 = rho(7, r, c);
    const bool first = ratio_gt(7, 5, r, c, 2.5) && (p7 - p5 > 0.3) && (p7 > 0.5);
    const bool second = (p6 > 0.8) && (p1 < 0.2) && (p5 > 0.4 || p7 < 0.1);
    return first || second;
  }

  bool s_candidate(long r, long c) const {
    if (!valid(r, c) || s_unambiguous(r, c)) return false;
    return ratio_gt(7, 5, r, c, 1.8) && (rho(7, r, c) - rho(5, r, c) > 0.17) && ratio_gt(7, 6, r, c, 1.6);
  }

  BoolGrid schroeder() const {
    BoolGrid water(h_, w_), unamb(h_, w_), cand(h_, w_);
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        water(r, c) = s_water(r, c);
        unamb(r, c) = s_unambiguous(r, c);
        cand(r, c) = s_candidate(r, c);
      }
    }
    auto included = [&](long y, long x) {
      return valid(y, x) && !water(y, x) && !unamb(y, x) && !cand(y, x) && rho(5, y, x) > 0.0;
    };
    BoolGrid fire(h_, w_);
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        fire(r, c) = unamb(r, c);
        if (!cand(r, c)) continue;
        const auto st75 = window(r, c, 30, 75, included);
        const auto st7 = window(r, c, 30, 7, included);
        if (!st75 || !st7) continue;
        const double r75 = rho(7, r, c) / rho(5, r, c);
        if (r75 > st75->mean + std::max(3 * st75->std, 0.8) && rho(7, r, c) > st7->mean + std::max(3 * st7->std, 0.08)) {
          fire(r, c) = true;
        }
      }
    }
    return fire;
  }

  // ---- non-contextual condition set (corrected reflectance) ----

  BoolGrid murphy(const BoolGrid& sat6, const BoolGrid& sat7) const {
    BoolGrid unamb(h_, w_), potential(h_, w_);
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        unamb(r, c) = valid(r, c) && ratio_ge(7, 6, r, c, 1.4) && ratio_ge(7, 5, r, c, 1.4) && rho(7, r, c) >= 0.15;
        potential(r, c) = valid(r, c) && ((ratio_ge(6, 5, r, c, 2.0) && rho(6, r, c) >= 0.5) || sat7(r, c) || sat6(r, c));
      }
    }
    BoolGrid fire(h_, w_);
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        bool near_unamb = false;
        for (long dy = -1; dy <= 1; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            if (inside(r + dy, c + dx) && unamb(r + dy, c + dx)) near_unamb = true;
          }
        }
        fire(r, c) = unamb(r, c) || (potential(r, c) && near_unamb);
      }
    }
    return fire;
  }

  // ---- adaptive-window condition set (corrected reflectance) ----

  BoolGrid kumarroy() const {
    BoolGrid u1(h_, w_), u2(h_, w_), potential(h_, w_), water(h_, w_);
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        u1(r, c) = valid(r, c) && rho(4, r, c) <= 0.53 * rho(7, r, c) - 0.214;
      }
    }
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        bool next_to_u1 = false;
        for (long dy = -1; dy <= 1; ++dy) {
          for (long dx = -1; dx <= 1; ++dx) {
            if ((dy || dx) && inside(r + dy, c + dx) && u1(r + dy, c + dx)) next_to_u1 = true;
          }
        }
        u2(r, c) = valid(r, c) && !u1(r, c) && next_to_u1 && rho(4, r, c) <= 0.35 * rho(6, r, c) - 0.044;
      }
    }
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        const double p4 = rho(4, r, c), p6 = rho(6, r, c), p7 = rho(7, r, c);
        potential(r, c) = valid(r, c) && !u1(r, c) && !u2(r, c) &&
                          ((p4 <= 0.53 * p7 - 0.125) || (p6 <= 1.08 * p7 - 0.048));
        water(r, c) = valid(r, c) && rho(2, r, c) >= rho(3, r, c) && rho(3, r, c) >= rho(4, r, c) &&
                      rho(4, r, c) >= rho(5, r, c);
      }
    }
    auto included = [&](long y, long x) {
      return valid(y, x) && !water(y, x) && !u1(y, x) && !u2(y, x) && !potential(y, x) && rho(5, y, x) > 0.0;
    };
    BoolGrid fire(h_, w_);
    for (long r = 0; r < h_; ++r) {
      for (long c = 0; c < w_; ++c) {
        fire(r, c) = u1(r, c) || u2(r, c);
        if (!potential(r, c) || rho(5, r, c) <= 0.0) continue;
        for (long side = 5; side <= 61; side += 2) {
          const long half = side / 2;
          const long n = window_count(r, c, half, included);
          if (n == 0 || static_cast<double>(n) < 0.25 * static_cast<double>(clipped_area(r, c, half))) continue;
          const auto st75 = window(r, c, half, 75, included);
          const auto st7 = window(r, c, half, 7, included);
          const double r75 = rho(7, r, c) / rho(5, r, c);
          if (r75 > st75->mean + std::max(3 * st75->std, 0.8) && rho(7, r, c) > st7->mean + std::max(3 * st7->std, 0.08)) {
            fire(r, c) = true;
          }
          break;
        }
      }
    }
    return fire;
  }

 private:
  const ReflectanceStack& s_;
  long h_;
  long w_;
};

}  // namespace firescan::oracle
