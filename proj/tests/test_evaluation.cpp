#include <gtest/gtest.h>

#include <random>

#include "helpers.hpp"
#include "oracles.hpp"
#include "vicfuse/errors.hpp"
#include "vicfuse/evaluation.hpp"

using namespace vicfuse;
using testing_helpers::det;

namespace {

struct Instance {
  std::vector<Detections> dets;
  std::vector<Detections> gt;
};

// Up to 10 frames and 20 boxes in total; scores are distinct so the
// threshold sweep and the rank sweep coincide.
Instance random_instance(std::mt19937_64& rng) {
  std::uniform_int_distribution<int> nframes(1, 10), cls(0, 2), coin(0, 3);
  std::uniform_real_distribution<double> pos(0, 60), jitter(-1.2, 1.2), yaw(-kPi, kPi);
  Instance in;
  const int f = nframes(rng);
  in.dets.resize(f);
  in.gt.resize(f);
  std::vector<double> scores(20);
  for (int i = 0; i < 20; ++i) scores[i] = (i + 1) / 21.0;
  std::shuffle(scores.begin(), scores.end(), rng);
  int budget = 20;
  std::size_t next_score = 0;
  while (budget > 0) {
    const int frame = std::uniform_int_distribution<int>(0, f - 1)(rng);
    Detection g = det(pos(rng), pos(rng) - 30, 1.0, static_cast<std::uint8_t>(cls(rng)));
    g.box.yaw = yaw(rng);
    in.gt[frame].push_back(g);
    --budget;
    const int kind = coin(rng);
    if (kind == 0 || budget == 0) continue;  // missed
    Detection d = g;
    d.box.center.x() += jitter(rng);
    d.box.center.y() += jitter(rng);
    d.box.yaw += jitter(rng) * 0.3;
    d.score = scores[next_score++];
    if (kind == 3) d.class_id = static_cast<std::uint8_t>((d.class_id + 1) % 3);
    in.dets[frame].push_back(d);
    --budget;
  }
  return in;
}

EvalConfig cfg_with(MetricKind m, Interpolation i = Interpolation::kRecall40) {
  EvalConfig c;
  c.metric = m;
  c.interpolation = i;
  return c;
}

}  // namespace

TEST(FilterArea, ClosedRectangle) {
  const Area area;
  EXPECT_EQ(filter_area(Detections{det(50, 0)}, area).size(), 1u);
  EXPECT_TRUE(filter_area(Detections{det(105, 0)}, area).empty());
  EXPECT_EQ(filter_area(Detections{det(100, 39.12)}, area).size(), 1u);
  EXPECT_TRUE(filter_area(Detections{det(-0.1, 0)}, area).empty());
}

TEST(FilterArea, Idempotent) {
  std::mt19937_64 rng(50);
  std::uniform_real_distribution<double> u(-150, 150);
  Detections ds;
  for (int i = 0; i < 200; ++i) ds.push_back(det(u(rng), u(rng)));
  const auto once = filter_area(ds, Area{});
  EXPECT_EQ(filter_area(once, Area{}), once);
}

TEST(EvalConfig, Validation) {
  EvalConfig c;
  c.iou_threshold = 0.0;
  EXPECT_THROW(validate(c), InvalidArgument);
  c = {};
  c.range_bins = {{30, 30}};
  EXPECT_THROW(validate(c), InvalidArgument);
}

TEST(AveragePrecision, PerfectDetector) {
  const std::vector<Detections> gt = {{det(10, 0), det(20, 5)}, {det(30, -5)}};
  EXPECT_DOUBLE_EQ(*average_precision(gt, gt, EvalConfig{}), 1.0);
}

TEST(AveragePrecision, NoDetections) {
  const std::vector<Detections> gt = {{det(10, 0)}};
  const std::vector<Detections> none = {{}};
  EXPECT_DOUBLE_EQ(*average_precision(none, gt, EvalConfig{}), 0.0);
}

TEST(AveragePrecision, NoGroundTruthIsAbsent) {
  const std::vector<Detections> dets = {{det(10, 0)}};
  const std::vector<Detections> gt = {{}};
  EXPECT_FALSE(average_precision(dets, gt, EvalConfig{}).has_value());
}

TEST(AveragePrecision, LowerRankedFalsePositiveIsHarmless) {
  Detection a = det(10.2, 0, 0.9);
  Detection b = det(50, 20, 0.8);
  const std::vector<Detections> dets = {{a, b}};
  const std::vector<Detections> gt = {{det(10, 0)}};
  EXPECT_GT(iou_3d(a.box, gt[0][0].box), 0.5);
  EXPECT_DOUBLE_EQ(*average_precision(dets, gt, EvalConfig{}), 1.0);
  EXPECT_DOUBLE_EQ(*oracle::brute_force_ap(dets, gt, EvalConfig{}), 1.0);
}

TEST(AveragePrecision, HandTracedCurve) {
  // Ranks: TP, FP, TP over 2 GT. Recall 0.5 at precision 1, recall 1 at 2/3.
  const std::vector<Detections> dets = {{det(10, 0, 0.9), det(60, 0, 0.8), det(30, 0, 0.7)}};
  const std::vector<Detections> gt = {{det(10, 0), det(30, 0)}};
  const double expected = (20 * 1.0 + 20 * (2.0 / 3.0)) / 40.0;
  EXPECT_NEAR(*average_precision(dets, gt, EvalConfig{}), expected, 1e-12);
  const double r11 = (6 * 1.0 + 5 * (2.0 / 3.0)) / 11.0;
  EXPECT_NEAR(*average_precision(dets, gt, cfg_with(MetricKind::kAp3d, Interpolation::kRecall11)), r11, 1e-12);
}

TEST(AveragePrecision, DuplicateDetectionIsFalsePositive) {
  const std::vector<Detections> dets = {{det(10, 0, 0.9), det(10, 0, 0.8)}};
  const std::vector<Detections> gt = {{det(10, 0)}};
  const auto c = evaluate_ap(dets, gt, EvalConfig{});
  EXPECT_EQ(c.tp, 1u);
  EXPECT_EQ(c.fp, 1u);
}

TEST(AveragePrecision, ClassMustAgree) {
  const std::vector<Detections> dets = {{det(10, 0, 0.9, 4)}};
  const std::vector<Detections> gt = {{det(10, 0, 1.0, 0)}};
  EXPECT_DOUBLE_EQ(*average_precision(dets, gt, EvalConfig{}), 0.0);
  EvalConfig only_cars;
  only_cars.class_id = 0;
  EXPECT_EQ(evaluate_ap(dets, gt, only_cars).fp, 0u);
}

TEST(AveragePrecision, MatchesBruteForceReference) {
  std::mt19937_64 rng(51);
  for (int t = 0; t < 100; ++t) {
    const auto in = random_instance(rng);
    for (auto m : {MetricKind::kAp3d, MetricKind::kApBev}) {
      for (auto interp : {Interpolation::kRecall40, Interpolation::kRecall11}) {
        const auto cfg = cfg_with(m, interp);
        const auto got = average_precision(in.dets, in.gt, cfg);
        const auto ref = oracle::brute_force_ap(in.dets, in.gt, cfg);
        ASSERT_EQ(got.has_value(), ref.has_value());
        if (got) {
          EXPECT_NEAR(*got, *ref, 1e-12) << "instance " << t;
        }
      }
    }
  }
}

TEST(AveragePrecision, RankOnlyDependence) {
  std::mt19937_64 rng(52);
  for (int t = 0; t < 50; ++t) {
    auto in = random_instance(rng);
    const auto base = average_precision(in.dets, in.gt, EvalConfig{});
    for (auto& frame : in.dets) {
      for (auto& d : frame) d.score = std::pow(d.score, 3.0) * 0.5;
    }
    EXPECT_EQ(average_precision(in.dets, in.gt, EvalConfig{}), base);
  }
}

TEST(AveragePrecision, LowestScoreFalsePositiveNeverHelps) {
  std::mt19937_64 rng(53);
  for (int t = 0; t < 50; ++t) {
    auto in = random_instance(rng);
    const auto base = average_precision(in.dets, in.gt, EvalConfig{});
    in.dets[0].push_back(det(-500, 0, 0.0));
    const auto after = average_precision(in.dets, in.gt, EvalConfig{});
    if (base) {
      EXPECT_LE(*after, *base + 1e-15);
    }
  }
}

TEST(RangeBinnedAp, EmptyBinIsAbsent) {
  const std::vector<Detections> gt = {{det(10, 0), det(8, 3)}};
  const auto r = range_binned_ap(gt, gt, EvalConfig{});
  EXPECT_EQ(r.overall.label, "Overall");
  EXPECT_DOUBLE_EQ(*r.overall.ap, 1.0);
  ASSERT_EQ(r.bins.size(), 3u);
  EXPECT_EQ(r.bins[0].label, "0-30m");
  EXPECT_DOUBLE_EQ(*r.bins[0].ap, 1.0);
  EXPECT_FALSE(r.bins[1].ap.has_value());
  EXPECT_FALSE(r.bins[2].ap.has_value());
}

TEST(RangeBinnedAp, OverallEqualsAreaFilteredAp) {
  std::mt19937_64 rng(54);
  for (int t = 0; t < 30; ++t) {
    const auto in = random_instance(rng);
    const auto r = range_binned_ap(in.dets, in.gt, EvalConfig{});
    std::vector<Detections> d, g;
    for (std::size_t f = 0; f < in.dets.size(); ++f) {
      d.push_back(filter_area(in.dets[f], Area{}));
      g.push_back(filter_area(in.gt[f], Area{}));
    }
    EXPECT_EQ(r.overall.ap, average_precision(d, g, EvalConfig{}));
  }
}

TEST(RangeBinnedAp, BinsRestrictByDistance) {
  const std::vector<Detections> gt = {{det(10, 0), det(40, 0), det(70, 0)}};
  const std::vector<Detections> dets = {{det(10, 0, 0.9), det(70, 0, 0.8)}};
  const auto r = range_binned_ap(dets, gt, EvalConfig{});
  EXPECT_DOUBLE_EQ(*r.bins[0].ap, 1.0);
  EXPECT_DOUBLE_EQ(*r.bins[1].ap, 0.0);
  EXPECT_DOUBLE_EQ(*r.bins[2].ap, 1.0);
  EXPECT_EQ(r.bins[1].num_gt, 1u);
}

TEST(AverageByte, Examples) {
  EXPECT_DOUBLE_EQ(average_byte(std::vector<WirePayload>{}), 0.0);
  WirePayload a, b;
  a.bytes.resize(8);
  b.bytes.resize(74);
  EXPECT_DOUBLE_EQ(average_byte(std::vector<WirePayload>{a, b}), 41.0);
  const auto two = encode_objects(Detections{det(1, 1), det(2, 2)});
  EXPECT_DOUBLE_EQ(average_byte(std::vector<WirePayload>{two, two, two}), 74.0);
}

TEST(AverageByte, PerFrameSumsMessages) {
  WirePayload a, b;
  a.bytes.resize(10);
  b.bytes.resize(30);
  const std::vector<std::vector<WirePayload>> frames = {{a, b}, {}, {a}};
  EXPECT_DOUBLE_EQ(average_byte(frames), 50.0 / 3.0);
  EXPECT_DOUBLE_EQ(average_byte(std::vector<std::vector<WirePayload>>{{}, {}}), 0.0);
}

TEST(EvalReport, JsonCarriesBins) {
  const std::vector<Detections> gt = {{det(10, 0)}};
  const auto j = to_json(range_binned_ap(gt, gt, EvalConfig{}));
  EXPECT_EQ(j["metric"], "AP_3D");
  EXPECT_TRUE(j["bins"][1]["ap"].is_null());
}
