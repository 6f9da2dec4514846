#pragma once

#include "firescan/grid.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace firescan {

/// Global pixel counters; true negatives are deliberately not tracked.
struct EvalAccumulator {
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;

  EvalAccumulator& operator+=(const EvalAccumulator& o) {
    tp += o.tp;
    fp += o.fp;
    fn += o.fn;
    return *this;
  }
  friend EvalAccumulator operator+(EvalAccumulator a, const EvalAccumulator& b) { return a += b; }
  bool operator==(const EvalAccumulator&) const = default;
};

struct MetricsReport {
  double precision = 0;
  double recall = 0;
  double iou = 0;
  double f_score = 0;
  std::uint64_t tp = 0;
  std::uint64_t fp = 0;
  std::uint64_t fn = 0;
  /// Set when any metric had a zero denominator and was reported as 0.
  bool degenerate = false;
};

/// Adds tp/fp/fn over pixels where `valid` is true.
EvalAccumulator accumulate(const FireMask& pred, const FireMask& truth, const BoolGrid& valid,
                           EvalAccumulator acc = {});
/// Same with every pixel valid.
EvalAccumulator accumulate(const FireMask& pred, const FireMask& truth, EvalAccumulator acc = {});

/// P = tp/(tp+fp), R = tp/(tp+fn), F = harmonic mean of P and R,
/// IoU = tp/(tp+fp+fn).
MetricsReport finalize(const EvalAccumulator& acc);

struct LabelledReport {
  std::string label;
  MetricsReport report;
};

/// `label,tp,fp,fn,P,R,IoU,F` header plus one row per report.
void write_metrics_csv(const std::vector<LabelledReport>& rows, std::ostream& out);

}  // namespace firescan
