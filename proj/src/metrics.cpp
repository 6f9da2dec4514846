#include "firescan/metrics.hpp"

#include <cstdio>
#include <ostream>

namespace firescan {

EvalAccumulator accumulate(const FireMask& pred, const FireMask& truth, const BoolGrid& valid,
                           EvalAccumulator acc) {
  require_same_shape(pred, truth, "accumulate (prediction vs reference)");
  require_same_shape(pred, valid, "accumulate (prediction vs valid mask)");
  acc.tp += static_cast<std::uint64_t>((valid && pred && truth).count());
  acc.fp += static_cast<std::uint64_t>((valid && pred && !truth).count());
  acc.fn += static_cast<std::uint64_t>((valid && !pred && truth).count());
  return acc;
}

EvalAccumulator accumulate(const FireMask& pred, const FireMask& truth, EvalAccumulator acc) {
  return accumulate(pred, truth, BoolGrid::Constant(pred.rows(), pred.cols(), true), acc);
}

MetricsReport finalize(const EvalAccumulator& acc) {
  MetricsReport m;
  m.tp = acc.tp;
  m.fp = acc.fp;
  m.fn = acc.fn;
  const auto tp = static_cast<double>(acc.tp);
  const auto fp = static_cast<double>(acc.fp);
  const auto fn = static_cast<double>(acc.fn);

  if (acc.tp + acc.fp > 0) {
    m.precision = tp / (tp + fp);
  } else {
    m.degenerate = true;
  }
  if (acc.tp + acc.fn > 0) {
    m.recall = tp / (tp + fn);
  } else {
    m.degenerate = true;
  }
  if (acc.tp + acc.fp + acc.fn > 0) {
    m.iou = tp / (tp + fn + fp);
  } else {
    m.degenerate = true;
  }
  // With tp = 0 the harmonic mean's limit is 0; only P or R undefined is degenerate.
  if (m.precision > 0 && m.recall > 0) m.f_score = 2.0 / (1.0 / m.precision + 1.0 / m.recall);
  return m;
}

void write_metrics_csv(const std::vector<LabelledReport>& rows, std::ostream& out) {
  out << "label,tp,fp,fn,P,R,IoU,F\n";
  char buf[128];
  for (const auto& [label, r] : rows) {
    std::snprintf(buf, sizeof buf, "%.6f,%.6f,%.6f,%.6f", r.precision, r.recall, r.iou, r.f_score);
    out << label << "," << r.tp << "," << r.fp << "," << r.fn << "," << buf << "\n";
  }
}

}  // namespace firescan
