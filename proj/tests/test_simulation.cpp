#include <gtest/gtest.h>

#include <cmath>

#include "vicfuse/bench.hpp"
#include "vicfuse/errors.hpp"
#include "vicfuse/pairing.hpp"
#include "vicfuse/simulation.hpp"

using namespace vicfuse;

namespace {

ObjectTrack cv_track(int id, Eigen::Vector3d p0, Eigen::Vector2d v, std::uint8_t cls = 0) {
  ObjectTrack t;
  t.id = id;
  t.class_id = cls;
  t.size = class_prior(cls);
  ConstantVelocity m;
  m.p0 = p0;
  m.velocity = v;
  t.motion = m;
  return t;
}

SensorModel ideal(const std::string& id, Platform platform, Pose mount = {}) {
  SensorModel s;
  s.id = id;
  s.platform = platform;
  s.mount = mount;
  s.rate_hz = 10.0;
  return s;
}

ScenarioConfig base_scenario() {
  ScenarioConfig cfg;
  cfg.name = "unit";
  cfg.duration = 2.0;
  cfg.seed = 5;
  cfg.vehicle = ideal("vehicle", Platform::kVehicle);
  cfg.infrastructure = ideal("infrastructure", Platform::kStatic, Pose::from_yaw(kPi, {60, 0, 5}));
  cfg.vehicle_gt = VehicleGroundTruth::kSensor;
  return cfg;
}

}  // namespace

TEST(GroundTruthAt, ConstantVelocity) {
  ScenarioConfig cfg = base_scenario();
  cfg.tracks = {cv_track(0, {0, 0, 0}, {10, 0})};
  const auto gt = ground_truth_at(cfg, 0.5);
  ASSERT_EQ(gt.size(), 1u);
  EXPECT_NEAR((gt[0].box.center - Eigen::Vector3d(5, 0, 0)).norm(), 0.0, 1e-12);
  EXPECT_EQ(gt[0].score, 1.0);
}

TEST(GroundTruthAt, SpawnWindow) {
  ScenarioConfig cfg = base_scenario();
  cfg.tracks = {cv_track(0, {0, 0, 0}, {1, 0})};
  cfg.tracks[0].spawn = 1.0;
  cfg.tracks[0].despawn = 1.5;
  EXPECT_TRUE(ground_truth_at(cfg, 0.5).empty());
  EXPECT_EQ(ground_truth_at(cfg, 1.2).size(), 1u);
  EXPECT_TRUE(ground_truth_at(cfg, 1.8).empty());
}

TEST(GroundTruthAt, ConstantTurnFollowsCircularArc) {
  ScenarioConfig cfg = base_scenario();
  ObjectTrack t;
  t.id = 0;
  t.size = class_prior(0);
  const double heading0 = 0.4, speed = 10.0, omega = kPi / 2;
  t.motion = ConstantTurn{{3, -2, 0.8}, heading0, speed, omega};
  cfg.tracks = {t};
  const auto gt = ground_truth_at(cfg, 1.0);
  ASSERT_EQ(gt.size(), 1u);
  const double r = speed / omega;
  const Eigen::Vector2d local(r * std::sin(omega), r * (1 - std::cos(omega)));
  const Eigen::Rotation2Dd rot(heading0);
  const Eigen::Vector2d expected = Eigen::Vector2d(3, -2) + rot * local;
  EXPECT_NEAR(gt[0].box.center.x(), expected.x(), 1e-12);
  EXPECT_NEAR(gt[0].box.center.y(), expected.y(), 1e-12);
  EXPECT_NEAR(gt[0].box.yaw, normalize_angle(heading0 + kPi / 2), 1e-12);
}

TEST(GroundTruthAt, ObserverFrame) {
  ScenarioConfig cfg = base_scenario();
  cfg.tracks = {cv_track(0, {10, 0, 0}, {0, 0})};
  const auto gt = ground_truth_at(cfg, 0.0, Pose::from_yaw(kPi / 2, {0, 0, 0}));
  EXPECT_NEAR(gt[0].box.center.x(), 0.0, 1e-12);
  EXPECT_NEAR(gt[0].box.center.y(), -10.0, 1e-12);
}

TEST(GroundTruthAt, OutOfRange) {
  const ScenarioConfig cfg = base_scenario();
  EXPECT_THROW(ground_truth_at(cfg, 2.5), OutOfTimeRange);
  EXPECT_THROW(ground_truth_at(cfg, -0.1), OutOfTimeRange);
}

TEST(RenderFrame, NoiselessDegenerateSensorEqualsGroundTruth) {
  ScenarioConfig cfg = base_scenario();
  cfg.tracks = {cv_track(0, {20, 5, 0.8}, {3, 0}), cv_track(1, {-30, -8, 0.9}, {0, 2}, 4)};
  const Frame f = render_frame(cfg, cfg.vehicle, 0.3, 3);
  ASSERT_TRUE(f.detections);
  EXPECT_EQ(*f.detections, *f.annotations);
  EXPECT_EQ(*f.detections, ground_truth_at(cfg, 0.3, sensor_pose_at(cfg, cfg.vehicle, 0.3)));
}

TEST(RenderFrame, RangeLimit) {
  ScenarioConfig cfg = base_scenario();
  cfg.vehicle.max_range = 200.0;
  cfg.tracks = {cv_track(0, {250, 0, 0.8}, {0, 0}), cv_track(1, {150, 0, 0.8}, {0, 0})};
  const Frame f = render_frame(cfg, cfg.vehicle, 0.0, 0);
  ASSERT_EQ(f.detections->size(), 1u);
  EXPECT_NEAR(f.detections->front().box.center.x(), 150.0, 1e-9);
}

TEST(RenderFrame, FieldOfView) {
  ScenarioConfig cfg = base_scenario();
  cfg.vehicle.hfov_deg = 90.0;
  cfg.tracks = {cv_track(0, {20, 0, 0.8}, {0, 0}), cv_track(1, {0, 20, 0.8}, {0, 0})};
  EXPECT_EQ(render_frame(cfg, cfg.vehicle, 0.0, 0).detections->size(), 1u);
}

TEST(RenderFrame, OcclusionHidesFarObjectOnSightline) {
  ScenarioConfig cfg = base_scenario();
  cfg.vehicle.occlusion = true;
  cfg.tracks = {cv_track(0, {40, 0, 0.8}, {0, 0}), cv_track(1, {20, 0, 0.8}, {0, 0})};
  const auto visible = visible_tracks(cfg, cfg.vehicle, 0.0);
  EXPECT_EQ(visible, std::vector<std::size_t>{1});
  cfg.vehicle.occlusion = false;
  EXPECT_EQ(visible_tracks(cfg, cfg.vehicle, 0.0).size(), 2u);
}

TEST(RenderFrame, OcclusionIsMonotone) {
  ScenarioConfig cfg = make_preset("blind_spot", 3);
  for (double t : {0.0, 1.0, 2.5}) {
    const auto before = visible_tracks(cfg, cfg.vehicle, t);
    ScenarioConfig more = cfg;
    more.tracks.push_back(cv_track(999, {15, 1.5, 1.5}, {0, 0}, 1));
    const auto after = visible_tracks(more, more.vehicle, t);
    for (auto i : after) {
      if (i < cfg.tracks.size()) {
        EXPECT_NE(std::find(before.begin(), before.end(), i), before.end());
      }
    }
  }
}

TEST(RenderFrame, PointCountConservation) {
  ScenarioConfig cfg = base_scenario();
  cfg.vehicle.cloud = {true, 17, 123, 50.0};
  cfg.tracks = {cv_track(0, {20, 5, 0.8}, {3, 0}), cv_track(1, {-30, -8, 0.9}, {0, 2}),
                cv_track(2, {300, 0, 0.8}, {0, 0})};
  cfg.vehicle.max_range = 100.0;
  const Frame f = render_frame(cfg, cfg.vehicle, 0.0, 0);
  ASSERT_TRUE(f.cloud);
  const auto visible = visible_tracks(cfg, cfg.vehicle, 0.0);
  EXPECT_EQ(f.cloud->size(), 17 * visible.size() + 123);
  EXPECT_EQ(f.cloud->intensity->size(), f.cloud->size());
}

TEST(RenderFrame, FalsePositiveScoresStayLow) {
  ScenarioConfig cfg = base_scenario();
  cfg.vehicle.noise.fp_rate = 5.0;
  cfg.tracks = {};
  std::size_t count = 0;
  for (std::uint64_t i = 0; i < 20; ++i) {
    const Frame f = render_frame(cfg, cfg.vehicle, 0.1 * i, i);
    for (const auto& d : *f.detections) {
      EXPECT_GE(d.score, 0.05);
      EXPECT_LE(d.score, 0.5);
      ++count;
    }
  }
  EXPECT_GT(count, 50u);
}

TEST(RenderFrame, NoisyScoresInRange) {
  ScenarioConfig cfg = make_preset("moving", 4);
  const auto streams = sample_streams(cfg);
  for (const auto& f : streams.vehicle) {
    for (const auto& d : *f.detections) EXPECT_NO_THROW(validate(d));
  }
}

TEST(SampleStreams, SynchronousOffsets) {
  ScenarioConfig cfg = base_scenario();
  cfg.tracks = {cv_track(0, {20, 5, 0.8}, {3, 0})};
  auto s = sample_streams(cfg);
  auto pairs = pair_streams(share_frames(s.vehicle), share_frames(s.infrastructure), {}).pairs;
  ASSERT_EQ(pairs.size(), s.vehicle.size());
  for (const auto& p : pairs) EXPECT_EQ(p.delta_t, 0.0);

  cfg.vehicle.trigger_offset = 0.004;
  s = sample_streams(cfg);
  pairs = pair_streams(share_frames(s.vehicle), share_frames(s.infrastructure), {}).pairs;
  ASSERT_FALSE(pairs.empty());
  for (const auto& p : pairs) {
    EXPECT_NEAR(p.delta_t, 0.004, 1e-12);
    EXPECT_EQ(classify_sync(p), SyncClass::kSynchronous);
  }
}

TEST(SampleStreams, MixedRatesGivePeriodicOffsets) {
  SensorModel v = ideal("v", Platform::kVehicle), i = ideal("i", Platform::kStatic);
  i.rate_hz = 25.0;
  const auto tv = sensor_timestamps(v, 1.0), ti = sensor_timestamps(i, 1.0);
  EXPECT_EQ(tv.size(), 11u);
  EXPECT_EQ(ti.size(), 26u);
  // Nearest-earlier offsets cycle 0, 0.02, 0, 0.02, ...
  for (std::size_t n = 0; n < tv.size(); ++n) {
    double best = -1.0;
    for (double t : ti) {
      if (t <= tv[n] + 1e-12) best = t;
    }
    EXPECT_NEAR(tv[n] - best, n % 2 == 0 ? 0.0 : 0.02, 1e-9) << n;
  }
}

TEST(SampleStreams, DeterministicAcrossWorkers) {
  const ScenarioConfig cfg = make_preset("default", 9);
  const auto a = sample_streams(cfg, 1);
  const auto b = sample_streams(cfg, 4);
  EXPECT_EQ(dump_frames(a.vehicle), dump_frames(b.vehicle));
  EXPECT_EQ(dump_frames(a.infrastructure), dump_frames(b.infrastructure));
}

TEST(SampleStreams, SeedChangesNoise) {
  const auto a = sample_streams(make_preset("moving", 1));
  const auto b = sample_streams(make_preset("moving", 2));
  EXPECT_NE(dump_frames(a.vehicle), dump_frames(b.vehicle));
}

TEST(SampleStreams, CooperativeGroundTruthIncludesInfrastructureView) {
  ScenarioConfig cfg = make_preset("blind_spot", 1);
  const auto s = sample_streams(cfg);
  std::size_t extra = 0;
  for (const auto& f : s.vehicle) {
    const auto own = visible_tracks(cfg, cfg.vehicle, f.timestamp).size();
    EXPECT_GE(f.annotations->size(), own);
    extra += f.annotations->size() - own;
  }
  EXPECT_GT(extra, 0u);
}

TEST(NoiselessScenario, EveryPipelineIsPerfect) {
  ScenarioConfig cfg = base_scenario();
  cfg.duration = 1.0;
  cfg.vehicle.cloud = {true, 32, 100, 60.0};
  cfg.infrastructure.cloud = {true, 32, 100, 60.0};
  cfg.vehicle_gt = VehicleGroundTruth::kCooperative;
  cfg.tracks = {cv_track(0, {20, 5, 0.8}, {0, 0}), cv_track(1, {40, -8, 0.8}, {0, 0}),
                cv_track(2, {70, 10, 0.85}, {0, 0}, 4)};
  const auto s = sample_streams(cfg);
  BenchConfig bc;
  bc.pipelines = {Pipeline::kVehOnly, Pipeline::kLate, Pipeline::kEarly, Pipeline::kTclf};
  bc.async_ks = {0, 1};
  const auto report = run_bench(s.vehicle, s.infrastructure, bc);
  for (const auto& row : report.rows) {
    for (const auto& r : row.reports) {
      ASSERT_TRUE(r.overall.ap) << to_string(row.pipeline);
      EXPECT_DOUBLE_EQ(*r.overall.ap, 1.0) << to_string(row.pipeline) << " k=" << row.k;
    }
  }
}

TEST(ScenarioConfig, ValidationNamesField) {
  ScenarioConfig cfg = base_scenario();
  cfg.vehicle.rate_hz = 0.0;
  try {
    validate(cfg);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_NE(e.field().find("rate_hz"), std::string::npos);
  }
}

TEST(ScenarioConfig, JsonRoundTrip) {
  for (const auto& name : preset_names()) {
    const ScenarioConfig cfg = make_preset(name, 11);
    const ScenarioConfig back = scenario_from_json(to_json(cfg));
    EXPECT_EQ(to_json(back), to_json(cfg)) << name;
    EXPECT_EQ(dump_frames(sample_streams(back).vehicle), dump_frames(sample_streams(cfg).vehicle)) << name;
  }
}

TEST(ScenarioConfig, UnknownMotionKindNamesField) {
  auto j = to_json(make_preset("minimal", 0));
  j["tracks"][0]["motion"]["kind"] = "teleport";
  try {
    scenario_from_json(j);
    FAIL();
  } catch (const ConfigError& e) {
    EXPECT_EQ(e.field(), "tracks[0].motion.kind");
  }
}

TEST(Presets, UnknownName) { EXPECT_THROW(make_preset("nope", 0), ConfigError); }

TEST(Presets, TracksKeepTheirDistance) {
  for (const auto& name : preset_names()) {
    for (std::uint64_t seed : {1u, 2u, 3u}) {
      const auto cfg = make_preset(name, seed);
      for (double t = 0.0; t <= cfg.duration; t += 0.1) {
        for (std::size_t a = 0; a < cfg.tracks.size(); ++a) {
          for (std::size_t b = a + 1; b < cfg.tracks.size(); ++b) {
            const double d =
                (track_box_at(cfg.tracks[a], t).center - track_box_at(cfg.tracks[b], t).center).head<2>().norm();
            ASSERT_GE(d, 5.0) << name << " seed " << seed << " tracks " << a << "," << b << " t=" << t;
          }
        }
      }
    }
  }
}
