#include "doctest.h"

#include "firescan/metrics.hpp"
#include "synthetic.hpp"

#include <sstream>

using namespace firescan;

TEST_CASE("pixel counting") {
  FireMask truth = FireMask::Zero(3, 3);
  FireMask pred = FireMask::Zero(3, 3);
  CHECK(accumulate(pred, truth) == EvalAccumulator{});

  truth(0, 0) = truth(1, 1) = true;
  pred(0, 0) = pred(1, 1) = pred(2, 2) = true;
  CHECK(accumulate(pred, truth) == EvalAccumulator{2, 1, 0});
  CHECK(accumulate(FireMask::Zero(3, 3), truth) == EvalAccumulator{0, 0, 2});

  BoolGrid valid = BoolGrid::Constant(3, 3, true);
  valid(2, 2) = false;
  CHECK(accumulate(pred, truth, valid) == EvalAccumulator{2, 0, 0});
  CHECK(accumulate(pred, truth, valid, {1, 1, 1}) == EvalAccumulator{3, 1, 1});
  CHECK_THROWS_AS(accumulate(pred, FireMask::Zero(3, 2)), std::invalid_argument);
  CHECK_THROWS_AS(accumulate(pred, truth, BoolGrid::Constant(2, 3, true)), std::invalid_argument);
}

TEST_CASE("accumulation is additive across scenes") {
  const auto p1 = testing::make_random_mask(20, 20, 0.2, 1), t1 = testing::make_random_mask(20, 20, 0.2, 2);
  const auto p2 = testing::make_random_mask(20, 20, 0.2, 3), t2 = testing::make_random_mask(20, 20, 0.2, 4);
  CHECK(accumulate(p2, t2, accumulate(p1, t1)) == accumulate(p1, t1) + accumulate(p2, t2));
}

TEST_CASE("symmetric counts") {
  const auto m = finalize({50, 50, 50});
  CHECK(m.precision == doctest::Approx(0.5));
  CHECK(m.recall == doctest::Approx(0.5));
  CHECK(m.f_score == doctest::Approx(0.5));
  CHECK(m.iou == doctest::Approx(1.0 / 3.0));
  CHECK_FALSE(m.degenerate);
}

TEST_CASE("degenerate evaluations report zeros and a flag") {
  const auto empty = finalize({});
  CHECK(empty.precision == 0);
  CHECK(empty.recall == 0);
  CHECK(empty.iou == 0);
  CHECK(empty.f_score == 0);
  CHECK(empty.degenerate);

  const auto no_pred = finalize({0, 0, 5});
  CHECK(no_pred.degenerate);
  CHECK(no_pred.recall == 0);
  CHECK(no_pred.iou == 0);

  // All denominators defined, no hit: zero but not degenerate.
  const auto misses = finalize({0, 3, 4});
  CHECK_FALSE(misses.degenerate);
  CHECK(misses.f_score == 0);
}

TEST_CASE("published precision and recall reproduce the published F and IoU") {
  // P = 0.872 and R = 0.924 exactly.
  const auto m = finalize({805728, 118272, 66272});
  CHECK(m.precision == doctest::Approx(0.872).epsilon(1e-12));
  CHECK(m.recall == doctest::Approx(0.924).epsilon(1e-12));
  CHECK(std::abs(m.f_score - 0.897) <= 0.0005);
  CHECK(std::abs(m.iou - 0.814) <= 0.0005);
}

TEST_CASE("metrics CSV layout") {
  std::ostringstream os;
  write_metrics_csv({{"voting", finalize({50, 50, 50})}, {"none", finalize({})}}, os);
  CHECK(os.str() ==
        "label,tp,fp,fn,P,R,IoU,F\n"
        "voting,50,50,50,0.500000,0.500000,0.333333,0.500000\n"
        "none,0,0,0,0.000000,0.000000,0.000000,0.000000\n");
}
