#pragma once

#include <cstddef>
#include <cstdint>
#include <limits>
#include <optional>
#include <string>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "json.hpp"

#include "vicfuse/frames.hpp"

namespace vicfuse {

// Straight-line motion. Position is p0 at t = 0; heading follows the velocity
// unless the object is stationary, in which case `heading` is used.
struct ConstantVelocity {
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();
  double heading = 0.0;
};

// Circular arc at constant speed and yaw rate, starting at p0 with heading0
// at t = 0. A zero turn rate degenerates to straight motion.
struct ConstantTurn {
  Eigen::Vector3d p0 = Eigen::Vector3d::Zero();
  double heading0 = 0.0;
  double speed = 0.0;
  double turn_rate = 0.0;
};

using Motion = std::variant<ConstantVelocity, ConstantTurn>;

struct ObjectTrack {
  int id = 0;
  std::uint8_t class_id = 0;
  BoxSize size;
  Motion motion;
  double spawn = 0.0;
  double despawn = std::numeric_limits<double>::infinity();

  bool alive(double t) const { return t >= spawn && t <= despawn; }
};

// World-frame box of a track at time t (ignores spawn/despawn).
BBox3D track_box_at(const ObjectTrack& track, double t);

// Typical footprint per class, used for false positives.
BoxSize class_prior(std::uint8_t class_id);

// Piecewise constant-velocity platform path. Poses outside the key range
// hold the nearest key.
struct TrajectoryKey {
  double t = 0.0;
  Eigen::Vector3d position = Eigen::Vector3d::Zero();
  double yaw = 0.0;
};

struct Trajectory {
  std::vector<TrajectoryKey> keys;

  Pose at(double t) const;
};

struct NoiseModel {
  double sigma_xy = 0.0;
  double sigma_z = 0.0;
  double sigma_yaw = 0.0;
  double drop_prob = 0.0;
  double fp_rate = 0.0;      // expected false positives per frame (Poisson)
  double score_scale = 1.0;  // m of position error that drives the score to its floor
};

struct CloudModel {
  bool enabled = false;
  std::size_t points_per_box = 64;
  std::size_t ground_points = 2000;
  double ground_radius = 100.0;
};

enum class Platform { kStatic, kVehicle };

struct SensorModel {
  std::string id;
  Platform platform = Platform::kStatic;
  Pose mount;  // world pose for static sensors, body-relative for vehicle sensors
  double rate_hz = 10.0;
  double trigger_offset = 0.0;
  double max_range = std::numeric_limits<double>::infinity();
  double hfov_deg = 360.0;
  NoiseModel noise;
  bool occlusion = false;
  CloudModel cloud;
};

enum class VehicleGroundTruth {
  kSensor,       // objects the vehicle sensor itself can see
  kCooperative,  // union of what either sensor could see at the vehicle timestamp
};

struct ScenarioConfig {
  std::string name = "scenario";
  double duration = 10.0;
  std::uint64_t seed = 0;
  std::vector<ObjectTrack> tracks;
  Trajectory vehicle_trajectory;
  SensorModel vehicle;
  SensorModel infrastructure;
  VehicleGroundTruth vehicle_gt = VehicleGroundTruth::kCooperative;
};

// Throws ConfigError naming the offending field.
void validate(const ScenarioConfig& cfg);

Pose sensor_pose_at(const ScenarioConfig& cfg, const SensorModel& sensor, double t);

// Boxes of live tracks at t, in world coordinates or, when `observer`
// (sensor-to-world) is given, in that sensor's frame. Score 1.0.
Detections ground_truth_at(const ScenarioConfig& cfg, double t,
                           const std::optional<Pose>& observer = std::nullopt);

// Indices of live tracks the sensor sees at t: within range and FOV and, with
// occlusion enabled, no other live footprint crossing the center sight line.
std::vector<std::size_t> visible_tracks(const ScenarioConfig& cfg, const SensorModel& sensor,
                                        double t);

// Capture times offset + n / rate within [0, duration].
std::vector<double> sensor_timestamps(const SensorModel& sensor, double duration);

// Oracle detector output for one capture. Deterministic in
// (seed, sensor id, frame index).
Frame render_frame(const ScenarioConfig& cfg, const SensorModel& sensor, double t,
                   std::uint64_t frame_index);

struct Streams {
  std::vector<Frame> vehicle;
  std::vector<Frame> infrastructure;
};

Streams sample_streams(const ScenarioConfig& cfg, std::size_t workers = 1);

// Structured-text scenario format.
nlohmann::json to_json(const ScenarioConfig& cfg);
ScenarioConfig scenario_from_json(const nlohmann::json& j);
ScenarioConfig load_scenario(const std::string& path);

// Built-in scenario families.
std::vector<std::string> preset_names();
ScenarioConfig make_preset(const std::string& name, std::uint64_t seed);

}  // namespace vicfuse
