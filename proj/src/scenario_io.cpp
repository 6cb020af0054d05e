#include <cmath>
#include <fstream>
#include <limits>

#include "vicfuse/errors.hpp"
#include "vicfuse/simulation.hpp"

namespace vicfuse {
namespace {

using nlohmann::json;

constexpr double kInf = std::numeric_limits<double>::infinity();

// Field access that reports the JSON path on failure.
class Reader {
 public:
  Reader(const json& j, std::string path) : j_(j), path_(std::move(path)) {}

  bool has(const char* key) const { return j_.is_object() && j_.contains(key) && !j_[key].is_null(); }

  Reader at(const char* key) const {
    if (!j_.is_object() || !j_.contains(key)) throw ConfigError(sub(key), "missing field");
    return Reader(j_[key], sub(key));
  }
  Reader at(std::size_t i) const {
    return Reader(j_.at(i), path_ + "[" + std::to_string(i) + "]");
  }

  template <typename T>
  T get() const {
    try {
      return j_.get<T>();
    } catch (const json::exception& e) {
      throw ConfigError(path_, e.what());
    }
  }
  template <typename T>
  T get_or(const char* key, T fallback) const {
    return has(key) ? at(key).get<T>() : fallback;
  }
  double number_or_inf(const char* key) const { return has(key) ? at(key).get<double>() : kInf; }

  Eigen::Vector3d vec3() const {
    const auto v = get<std::vector<double>>();
    if (v.size() != 3) throw ConfigError(path_, "expected 3 numbers");
    return {v[0], v[1], v[2]};
  }
  Eigen::Vector2d vec2() const {
    const auto v = get<std::vector<double>>();
    if (v.size() != 2) throw ConfigError(path_, "expected 2 numbers");
    return {v[0], v[1]};
  }

  std::size_t size() const { return j_.is_array() ? j_.size() : 0; }
  const json& raw() const { return j_; }
  const std::string& path() const { return path_; }

 private:
  std::string sub(const char* key) const { return path_.empty() ? key : path_ + "." + key; }

  const json& j_;
  std::string path_;
};

json inf_or_number(double v) { return std::isinf(v) ? json(nullptr) : json(v); }

std::uint8_t read_class(const Reader& r) {
  if (r.raw().is_string()) {
    try {
      return ClassTable::standard().id_of(r.get<std::string>());
    } catch (const InvalidArgument& e) {
      throw ConfigError(r.path(), e.what());
    }
  }
  return r.get<std::uint8_t>();
}

Motion read_motion(const Reader& r) {
  const auto kind = r.at("kind").get<std::string>();
  if (kind == "constant_velocity") {
    ConstantVelocity cv;
    cv.p0 = r.at("p0").vec3();
    cv.velocity = r.at("v").vec2();
    cv.heading = r.get_or("heading", 0.0);
    return cv;
  }
  if (kind == "constant_turn") {
    ConstantTurn ct;
    ct.p0 = r.at("p0").vec3();
    ct.heading0 = r.get_or("heading0", 0.0);
    ct.speed = r.at("speed").get<double>();
    ct.turn_rate = r.at("turn_rate").get<double>();
    return ct;
  }
  throw ConfigError(r.path() + ".kind", "unknown motion kind '" + kind + "'");
}

json motion_json(const Motion& m) {
  if (const auto* cv = std::get_if<ConstantVelocity>(&m)) {
    return {{"kind", "constant_velocity"},
            {"p0", {cv->p0.x(), cv->p0.y(), cv->p0.z()}},
            {"v", {cv->velocity.x(), cv->velocity.y()}},
            {"heading", cv->heading}};
  }
  const auto& ct = std::get<ConstantTurn>(m);
  return {{"kind", "constant_turn"},
          {"p0", {ct.p0.x(), ct.p0.y(), ct.p0.z()}},
          {"heading0", ct.heading0},
          {"speed", ct.speed},
          {"turn_rate", ct.turn_rate}};
}

Pose read_mount(const Reader& r) {
  try {
    if (r.has("r")) return pose_from_json(r.raw());
    return Pose::from_yaw(r.get_or("yaw", 0.0), r.has("xyz") ? r.at("xyz").vec3() : Eigen::Vector3d::Zero());
  } catch (const InvalidPose& e) {
    throw ConfigError(r.path(), e.what());
  } catch (const InvalidArgument& e) {
    throw ConfigError(r.path(), e.what());
  }
}

SensorModel read_sensor(const Reader& r, const std::string& default_id, Platform platform) {
  SensorModel s;
  s.id = r.get_or<std::string>("id", default_id);
  s.platform = platform;
  if (r.has("mount")) s.mount = read_mount(r.at("mount"));
  s.rate_hz = r.get_or("rate_hz", 10.0);
  s.trigger_offset = r.get_or("trigger_offset", 0.0);
  s.max_range = r.number_or_inf("max_range");
  s.hfov_deg = r.get_or("hfov_deg", 360.0);
  s.occlusion = r.get_or("occlusion", false);
  if (r.has("noise")) {
    const Reader n = r.at("noise");
    s.noise.sigma_xy = n.get_or("sigma_xy", 0.0);
    s.noise.sigma_z = n.get_or("sigma_z", 0.0);
    s.noise.sigma_yaw = n.get_or("sigma_yaw", 0.0);
    s.noise.drop_prob = n.get_or("drop_prob", 0.0);
    s.noise.fp_rate = n.get_or("fp_rate", 0.0);
    s.noise.score_scale = n.get_or("score_scale", 1.0);
  }
  if (r.has("cloud")) {
    const Reader c = r.at("cloud");
    s.cloud.enabled = c.get_or("enabled", true);
    s.cloud.points_per_box = c.get_or<std::size_t>("points_per_box", s.cloud.points_per_box);
    s.cloud.ground_points = c.get_or<std::size_t>("ground_points", s.cloud.ground_points);
    s.cloud.ground_radius = c.get_or("ground_radius", s.cloud.ground_radius);
  }
  return s;
}

json sensor_json(const SensorModel& s) {
  return {{"id", s.id},
          {"mount", to_json(s.mount)},
          {"rate_hz", s.rate_hz},
          {"trigger_offset", s.trigger_offset},
          {"max_range", inf_or_number(s.max_range)},
          {"hfov_deg", s.hfov_deg},
          {"occlusion", s.occlusion},
          {"noise",
           {{"sigma_xy", s.noise.sigma_xy},
            {"sigma_z", s.noise.sigma_z},
            {"sigma_yaw", s.noise.sigma_yaw},
            {"drop_prob", s.noise.drop_prob},
            {"fp_rate", s.noise.fp_rate},
            {"score_scale", s.noise.score_scale}}},
          {"cloud",
           {{"enabled", s.cloud.enabled},
            {"points_per_box", s.cloud.points_per_box},
            {"ground_points", s.cloud.ground_points},
            {"ground_radius", s.cloud.ground_radius}}}};
}

}  // namespace

json to_json(const ScenarioConfig& cfg) {
  json tracks = json::array();
  for (const auto& t : cfg.tracks) {
    tracks.push_back({{"id", t.id},
                      {"class", ClassTable::standard().names.at(t.class_id)},
                      {"size", {t.size.width, t.size.length, t.size.height}},
                      {"motion", motion_json(t.motion)},
                      {"spawn", t.spawn},
                      {"despawn", inf_or_number(t.despawn)}});
  }
  json traj = json::array();
  for (const auto& k : cfg.vehicle_trajectory.keys) {
    traj.push_back({{"t", k.t}, {"xyz", {k.position.x(), k.position.y(), k.position.z()}}, {"yaw", k.yaw}});
  }
  return {{"name", cfg.name},
          {"duration", cfg.duration},
          {"seed", cfg.seed},
          {"vehicle_gt", cfg.vehicle_gt == VehicleGroundTruth::kCooperative ? "cooperative" : "sensor"},
          {"tracks", tracks},
          {"vehicle_trajectory", traj},
          {"sensors", {{"vehicle", sensor_json(cfg.vehicle)}, {"infrastructure", sensor_json(cfg.infrastructure)}}}};
}

ScenarioConfig scenario_from_json(const json& j) {
  const Reader r(j, "");
  ScenarioConfig cfg;
  cfg.name = r.get_or<std::string>("name", "scenario");
  cfg.duration = r.at("duration").get<double>();
  cfg.seed = r.get_or<std::uint64_t>("seed", 0);
  const auto gt_mode = r.get_or<std::string>("vehicle_gt", "cooperative");
  if (gt_mode == "cooperative") {
    cfg.vehicle_gt = VehicleGroundTruth::kCooperative;
  } else if (gt_mode == "sensor") {
    cfg.vehicle_gt = VehicleGroundTruth::kSensor;
  } else {
    throw ConfigError("vehicle_gt", "expected 'cooperative' or 'sensor'");
  }

  if (r.has("tracks")) {
    const Reader tracks = r.at("tracks");
    for (std::size_t i = 0; i < tracks.size(); ++i) {
      const Reader t = tracks.at(i);
      ObjectTrack tr;
      tr.id = t.get_or("id", static_cast<int>(i));
      tr.class_id = t.has("class") ? read_class(t.at("class")) : 0;
      tr.size = t.has("size") ? [&] {
        const auto v = t.at("size").vec3();
        return BoxSize{v.x(), v.y(), v.z()};
      }()
                              : class_prior(tr.class_id);
      tr.motion = read_motion(t.at("motion"));
      tr.spawn = t.get_or("spawn", 0.0);
      tr.despawn = t.number_or_inf("despawn");
      cfg.tracks.push_back(tr);
    }
  }
  if (r.has("vehicle_trajectory")) {
    const Reader traj = r.at("vehicle_trajectory");
    for (std::size_t i = 0; i < traj.size(); ++i) {
      const Reader k = traj.at(i);
      cfg.vehicle_trajectory.keys.push_back(
          {k.at("t").get<double>(), k.at("xyz").vec3(), k.get_or("yaw", 0.0)});
    }
  }
  const Reader sensors = r.at("sensors");
  cfg.vehicle = read_sensor(sensors.at("vehicle"), "vehicle", Platform::kVehicle);
  cfg.infrastructure = read_sensor(sensors.at("infrastructure"), "infrastructure", Platform::kStatic);
  validate(cfg);
  return cfg;
}

ScenarioConfig load_scenario(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError(path, "cannot open scenario file");
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw ConfigError(path, e.what());
  }
  return scenario_from_json(j);
}

}  // namespace vicfuse
