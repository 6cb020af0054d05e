#include <cmath>
#include <functional>
#include <map>
#include <random>

#include "vicfuse/errors.hpp"
#include "vicfuse/simulation.hpp"

namespace vicfuse {
namespace {

constexpr std::uint8_t kCar = 0;
constexpr std::uint8_t kTruck = 1;
constexpr std::uint8_t kPedestrian = 4;
constexpr std::uint8_t kCyclist = 5;

double deg(double d) { return d * kPi / 180.0; }

SensorModel vehicle_lidar(double max_range) {
  SensorModel s;
  s.id = "vehicle";
  s.platform = Platform::kVehicle;
  s.mount = Pose::from_yaw(0.0, {0.0, 0.0, 1.8});
  s.rate_hz = 10.0;
  // The vehicle triggers 4 ms after the roadside unit, well inside the
  // synchronous window.
  s.trigger_offset = 0.004;
  s.max_range = max_range;
  s.hfov_deg = 360.0;
  s.occlusion = true;
  s.noise = {0.12, 0.05, 0.03, 0.05, 0.3, 1.0};
  return s;
}

SensorModel roadside_lidar() {
  SensorModel s;
  s.id = "infrastructure";
  s.platform = Platform::kStatic;
  s.mount = Pose::from_yaw(deg(150.0), {115.0, -22.0, 6.0});
  s.rate_hz = 10.0;
  s.trigger_offset = 0.0;
  s.max_range = 160.0;
  s.hfov_deg = 100.0;
  s.occlusion = true;
  s.noise = {0.15, 0.05, 0.03, 0.05, 0.3, 1.0};
  return s;
}

Trajectory straight_drive(double speed, double duration) {
  Trajectory t;
  t.keys.push_back({0.0, {0.0, 0.0, 0.0}, 0.0});
  t.keys.push_back({duration, {speed * duration, 0.0, 0.0}, 0.0});
  return t;
}

void make_noiseless(SensorModel& s) { s.noise = NoiseModel{}; }

struct Placement {
  std::uint8_t cls;
  Eigen::Vector2d pos;
};

// Scatters objects over the road region ahead of the ego path, rejecting
// spawns closer than `spacing` to an earlier one.
std::vector<Placement> scatter(std::mt19937_64& rng, std::size_t count, double x_lo, double x_hi,
                               double y_abs, double spacing) {
  std::uniform_real_distribution<double> ux(x_lo, x_hi), uy(-y_abs, y_abs), u(0.0, 1.0);
  std::vector<Placement> out;
  for (std::size_t attempt = 0; out.size() < count && attempt < 100 * count; ++attempt) {
    const Eigen::Vector2d p(ux(rng), uy(rng));
    // Keep the ego lane clear.
    if (std::abs(p.y()) < 2.5) continue;
    bool crowded = false;
    for (const auto& o : out) crowded = crowded || (o.pos - p).norm() < spacing;
    if (crowded) continue;
    const double c = u(rng);
    const std::uint8_t cls = c < 0.7 ? kCar : (c < 0.85 ? kPedestrian : kCyclist);
    out.push_back({cls, p});
  }
  return out;
}

ObjectTrack moving_track(int id, std::uint8_t cls, const Eigen::Vector2d& pos, double speed, double heading) {
  ObjectTrack tr;
  tr.id = id;
  tr.class_id = cls;
  tr.size = class_prior(cls);
  ConstantVelocity cv;
  cv.p0 = {pos.x(), pos.y(), 0.5 * tr.size.height};
  cv.velocity = speed * Eigen::Vector2d(std::cos(heading), std::sin(heading));
  cv.heading = heading;
  tr.motion = cv;
  return tr;
}

// Parked trucks flanking the first stretch of road; they hide the side
// streets from the ego vehicle.
void add_occluders(ScenarioConfig& cfg, int& next_id) {
  for (double x : {12.0, 28.0}) {
    for (double y : {-5.5, 5.5}) {
      cfg.tracks.push_back(moving_track(next_id++, kTruck, {x, y}, 0.0, 0.0));
    }
  }
}

// Objects never come closer than kClearance (center to center) during the
// run, so no two footprints overlap.
constexpr double kClearance = 6.0;

bool clear_of(const ScenarioConfig& cfg, const ObjectTrack& candidate) {
  for (double t = 0.0; t <= cfg.duration + 1e-9; t += 0.05) {
    const Eigen::Vector3d c = track_box_at(candidate, t).center;
    for (const auto& other : cfg.tracks) {
      if ((track_box_at(other, t).center - c).head<2>().norm() < kClearance) return false;
    }
  }
  return true;
}

// Objects move along the road axis in both directions; objects heading
// toward the ego start further out so the layout stays populated.
void add_traffic(ScenarioConfig& cfg, std::mt19937_64& rng, std::size_t count, double min_speed,
                 double max_speed, int& next_id) {
  std::uniform_real_distribution<double> speed(min_speed, max_speed), u(0.0, 1.0);
  for (const auto& p : scatter(rng, count, 15.0, 150.0, 36.0, 7.0)) {
    const double heading = u(rng) < 0.5 ? 0.0 : kPi;
    const double limit = p.cls == kPedestrian ? std::min(max_speed, std::max(min_speed, 2.0)) : max_speed;
    const double v = std::min(speed(rng), limit);
    ObjectTrack tr = moving_track(next_id, p.cls, p.pos, v, heading);
    if (!clear_of(cfg, tr)) continue;
    cfg.tracks.push_back(tr);
    ++next_id;
  }
}

ScenarioConfig blind_spot(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "blind_spot";
  cfg.seed = seed;
  cfg.duration = 6.0;
  cfg.vehicle_trajectory = straight_drive(6.0, cfg.duration);
  cfg.vehicle = vehicle_lidar(60.0);
  cfg.infrastructure = roadside_lidar();
  std::mt19937_64 rng(seed);
  int id = 0;
  add_occluders(cfg, id);
  add_traffic(cfg, rng, 36, 0.0, 6.0, id);
  return cfg;
}

ScenarioConfig moving(std::uint64_t seed, bool noiseless) {
  ScenarioConfig cfg;
  cfg.name = noiseless ? "moving_noiseless" : "moving";
  cfg.seed = seed;
  cfg.duration = 6.0;
  cfg.vehicle_trajectory = straight_drive(6.0, cfg.duration);
  cfg.vehicle = vehicle_lidar(50.0);
  cfg.infrastructure = roadside_lidar();
  if (noiseless) {
    make_noiseless(cfg.vehicle);
    make_noiseless(cfg.infrastructure);
  }
  std::mt19937_64 rng(seed);
  int id = 0;
  add_occluders(cfg, id);
  add_traffic(cfg, rng, 30, 5.0, 15.0, id);
  return cfg;
}

// Every object visible to both sensors for the whole run: no occlusion, full
// field of view, unbounded range, exact detections.
ScenarioConfig constant_velocity(std::uint64_t seed) {
  ScenarioConfig cfg = moving(seed, true);
  cfg.name = "constant_velocity";
  for (auto* s : {&cfg.vehicle, &cfg.infrastructure}) {
    s->occlusion = false;
    s->hfov_deg = 360.0;
    s->max_range = std::numeric_limits<double>::infinity();
  }
  // Drop the parked trucks; only moving objects remain.
  std::erase_if(cfg.tracks, [](const ObjectTrack& t) { return t.class_id == kTruck; });
  return cfg;
}

ScenarioConfig with_clouds(ScenarioConfig cfg) {
  cfg.vehicle.cloud = {true, 48, 2500, 80.0};
  cfg.infrastructure.cloud = {true, 48, 6000, 120.0};
  return cfg;
}

ScenarioConfig default_scenario(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "default";
  cfg.seed = seed;
  cfg.duration = 3.0;
  cfg.vehicle_trajectory = straight_drive(8.0, cfg.duration);
  cfg.vehicle = vehicle_lidar(60.0);
  cfg.infrastructure = roadside_lidar();
  std::mt19937_64 rng(seed);
  int id = 0;
  add_occluders(cfg, id);
  add_traffic(cfg, rng, 30, 2.0, 12.0, id);
  return with_clouds(cfg);
}

ScenarioConfig minimal(std::uint64_t seed) {
  ScenarioConfig cfg;
  cfg.name = "minimal";
  cfg.seed = seed;
  cfg.duration = 1.0;
  cfg.vehicle = vehicle_lidar(80.0);
  cfg.infrastructure = roadside_lidar();
  make_noiseless(cfg.vehicle);
  make_noiseless(cfg.infrastructure);
  cfg.tracks.push_back(moving_track(0, kCar, {30.0, 6.0}, 5.0, 0.0));
  return cfg;
}

const std::map<std::string, std::function<ScenarioConfig(std::uint64_t)>>& registry() {
  static const std::map<std::string, std::function<ScenarioConfig(std::uint64_t)>> presets = {
      {"default", default_scenario},
      {"blind_spot", blind_spot},
      {"moving", [](std::uint64_t s) { return moving(s, false); }},
      {"moving_noiseless", [](std::uint64_t s) { return moving(s, true); }},
      {"constant_velocity", constant_velocity},
      {"minimal", minimal},
  };
  return presets;
}

}  // namespace

std::vector<std::string> preset_names() {
  std::vector<std::string> names;
  for (const auto& [name, fn] : registry()) names.push_back(name);
  return names;
}

ScenarioConfig make_preset(const std::string& name, std::uint64_t seed) {
  const auto it = registry().find(name);
  if (it == registry().end()) throw ConfigError("preset", "unknown preset '" + name + "'");
  ScenarioConfig cfg = it->second(seed);
  validate(cfg);
  return cfg;
}

}  // namespace vicfuse
