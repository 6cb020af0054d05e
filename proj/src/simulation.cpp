#include "vicfuse/simulation.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <set>
#include <string>

#include "vicfuse/errors.hpp"
#include "vicfuse/parallel.hpp"

namespace vicfuse {
namespace {

constexpr double kTimeEps = 1e-9;

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

std::mt19937_64 frame_rng(std::uint64_t seed, const std::string& sensor_id, std::uint64_t index) {
  const std::uint64_t id = fnv1a(sensor_id);
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(id), static_cast<std::uint32_t>(id >> 32),
                    static_cast<std::uint32_t>(index), static_cast<std::uint32_t>(index >> 32)};
  return std::mt19937_64(seq);
}

void check_time(const ScenarioConfig& cfg, double t) {
  if (!(t >= -kTimeEps && t <= cfg.duration + kTimeEps)) {
    throw OutOfTimeRange("t = " + std::to_string(t) + " outside [0, " +
                         std::to_string(cfg.duration) + "]");
  }
}

// Live track boxes in the sensor frame, index-aligned with cfg.tracks.
std::vector<std::optional<BBox3D>> boxes_in_frame(const ScenarioConfig& cfg, const Pose& world_to_sensor,
                                                  double t) {
  std::vector<std::optional<BBox3D>> out(cfg.tracks.size());
  for (std::size_t i = 0; i < cfg.tracks.size(); ++i) {
    if (cfg.tracks[i].alive(t)) out[i] = transform_box(world_to_sensor, track_box_at(cfg.tracks[i], t));
  }
  return out;
}

std::vector<std::size_t> visible_in(const SensorModel& sensor,
                                    const std::vector<std::optional<BBox3D>>& boxes) {
  std::vector<std::size_t> out;
  const double half_fov = 0.5 * sensor.hfov_deg * kPi / 180.0;
  const Eigen::Vector2d origin = Eigen::Vector2d::Zero();
  for (std::size_t i = 0; i < boxes.size(); ++i) {
    if (!boxes[i]) continue;
    const Eigen::Vector2d c(boxes[i]->center.x(), boxes[i]->center.y());
    if (c.norm() > sensor.max_range) continue;
    if (sensor.hfov_deg < 360.0 && std::abs(std::atan2(c.y(), c.x())) > half_fov) continue;
    bool hidden = false;
    if (sensor.occlusion) {
      for (std::size_t j = 0; j < boxes.size() && !hidden; ++j) {
        if (j != i && boxes[j]) hidden = segment_hits_box(origin, c, *boxes[j]);
      }
    }
    if (!hidden) out.push_back(i);
  }
  return out;
}

Eigen::Vector3d sample_on_surface(const BBox3D& b, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> unit(-0.5, 0.5);
  std::uniform_real_distribution<double> pick(0.0, 1.0);
  const double l = b.size.length, w = b.size.width, h = b.size.height;
  const double a_lw = l * w, a_lh = l * h, a_wh = w * h;
  const double total = 2.0 * (a_lw + a_lh + a_wh);
  const double sel = pick(rng) * total;
  const double sign = pick(rng) < 0.5 ? -0.5 : 0.5;
  Eigen::Vector3d local;
  if (sel < 2.0 * a_lw) {
    local = {unit(rng) * l, unit(rng) * w, sign * h};
  } else if (sel < 2.0 * (a_lw + a_lh)) {
    local = {unit(rng) * l, sign * w, unit(rng) * h};
  } else {
    local = {sign * l, unit(rng) * w, unit(rng) * h};
  }
  return rot_z(b.yaw) * local + b.center;
}

double fov_angle(const SensorModel& sensor, std::mt19937_64& rng) {
  const double half = sensor.hfov_deg >= 360.0 ? kPi : 0.5 * sensor.hfov_deg * kPi / 180.0;
  return std::uniform_real_distribution<double>(-half, half)(rng);
}

}  // namespace

BBox3D track_box_at(const ObjectTrack& track, double t) {
  BBox3D box;
  box.size = track.size;
  if (const auto* cv = std::get_if<ConstantVelocity>(&track.motion)) {
    box.center = cv->p0 + Eigen::Vector3d(cv->velocity.x() * t, cv->velocity.y() * t, 0.0);
    box.yaw = cv->velocity.squaredNorm() > 0.0 ? std::atan2(cv->velocity.y(), cv->velocity.x())
                                               : cv->heading;
  } else {
    const auto& ct = std::get<ConstantTurn>(track.motion);
    Eigen::Vector2d local;
    if (std::abs(ct.turn_rate) < 1e-12) {
      local = {ct.speed * t, 0.0};
    } else {
      const double r = ct.speed / ct.turn_rate;
      local = {r * std::sin(ct.turn_rate * t), r * (1.0 - std::cos(ct.turn_rate * t))};
    }
    const double c = std::cos(ct.heading0), s = std::sin(ct.heading0);
    box.center = ct.p0 + Eigen::Vector3d(c * local.x() - s * local.y(), s * local.x() + c * local.y(), 0.0);
    box.yaw = ct.heading0 + ct.turn_rate * t;
  }
  box.yaw = normalize_angle(box.yaw);
  return box;
}

BoxSize class_prior(std::uint8_t class_id) {
  static const BoxSize priors[] = {
      {1.8, 4.5, 1.6},  {2.5, 8.0, 3.0},  {2.0, 5.0, 2.0}, {2.8, 11.0, 3.2}, {0.6, 0.6, 1.7},
      {0.7, 1.8, 1.7},  {1.2, 2.5, 1.7},  {0.8, 2.0, 1.6}, {0.8, 1.2, 1.2},  {0.4, 0.4, 0.7}};
  return class_id < std::size(priors) ? priors[class_id] : priors[0];
}

Pose Trajectory::at(double t) const {
  if (keys.empty()) return Pose::identity();
  if (t <= keys.front().t) return Pose::from_yaw(keys.front().yaw, keys.front().position);
  if (t >= keys.back().t) return Pose::from_yaw(keys.back().yaw, keys.back().position);
  const auto next = std::upper_bound(keys.begin(), keys.end(), t,
                                     [](double v, const TrajectoryKey& k) { return v < k.t; });
  const auto& b = *next;
  const auto& a = *(next - 1);
  const double s = (t - a.t) / (b.t - a.t);
  const Eigen::Vector3d pos = a.position + s * (b.position - a.position);
  const double yaw = normalize_angle(a.yaw + s * normalize_angle(b.yaw - a.yaw));
  return Pose::from_yaw(yaw, pos);
}

void validate(const ScenarioConfig& cfg) {
  if (!(cfg.duration > 0.0)) throw ConfigError("duration", "must be positive");
  std::set<int> ids;
  for (std::size_t i = 0; i < cfg.tracks.size(); ++i) {
    const auto& tr = cfg.tracks[i];
    const std::string at = "tracks[" + std::to_string(i) + "]";
    if (!(tr.size.width > 0.0 && tr.size.length > 0.0 && tr.size.height > 0.0)) {
      throw ConfigError(at + ".size", "dimensions must be positive");
    }
    if (!(tr.despawn > tr.spawn)) throw ConfigError(at + ".despawn", "must be after spawn");
    if (!ClassTable::standard().contains(tr.class_id)) throw ConfigError(at + ".class", "unknown class");
    if (!ids.insert(tr.id).second) throw ConfigError(at + ".id", "duplicate track id");
  }
  for (std::size_t i = 1; i < cfg.vehicle_trajectory.keys.size(); ++i) {
    if (!(cfg.vehicle_trajectory.keys[i].t > cfg.vehicle_trajectory.keys[i - 1].t)) {
      throw ConfigError("vehicle_trajectory[" + std::to_string(i) + "].t", "must increase");
    }
  }
  for (const auto* s : {&cfg.vehicle, &cfg.infrastructure}) {
    const std::string at = "sensors." + s->id;
    if (s->id.empty()) throw ConfigError("sensors", "sensor id must not be empty");
    if (!(s->rate_hz > 0.0)) throw ConfigError(at + ".rate_hz", "must be positive");
    if (!(s->max_range > 0.0)) throw ConfigError(at + ".max_range", "must be positive");
    if (!(s->hfov_deg > 0.0 && s->hfov_deg <= 360.0)) throw ConfigError(at + ".hfov_deg", "must be in (0, 360]");
    const auto& n = s->noise;
    if (n.sigma_xy < 0.0 || n.sigma_z < 0.0 || n.sigma_yaw < 0.0) {
      throw ConfigError(at + ".noise", "sigmas must be non-negative");
    }
    if (!(n.drop_prob >= 0.0 && n.drop_prob <= 1.0)) throw ConfigError(at + ".noise.drop_prob", "must be in [0, 1]");
    if (!(n.fp_rate >= 0.0)) throw ConfigError(at + ".noise.fp_rate", "must be non-negative");
    if (!(n.score_scale > 0.0)) throw ConfigError(at + ".noise.score_scale", "must be positive");
    if (std::acos(std::clamp(s->mount.rotation()(2, 2), -1.0, 1.0)) > kDefaultPlanarityTolRad) {
      throw ConfigError(at + ".mount", "sensor mount must be gravity-aligned");
    }
  }
  if (cfg.vehicle.id == cfg.infrastructure.id) throw ConfigError("sensors", "sensor ids must differ");
}

Pose sensor_pose_at(const ScenarioConfig& cfg, const SensorModel& sensor, double t) {
  if (sensor.platform == Platform::kStatic) return sensor.mount;
  return compose(cfg.vehicle_trajectory.at(t), sensor.mount);
}

Detections ground_truth_at(const ScenarioConfig& cfg, double t, const std::optional<Pose>& observer) {
  check_time(cfg, t);
  const Pose to_frame = observer ? inverse(*observer) : Pose::identity();
  Detections out;
  for (const auto& tr : cfg.tracks) {
    if (!tr.alive(t)) continue;
    BBox3D b = track_box_at(tr, t);
    if (observer) b = transform_box(to_frame, b);
    out.push_back({b, tr.class_id, 1.0});
  }
  return out;
}

std::vector<std::size_t> visible_tracks(const ScenarioConfig& cfg, const SensorModel& sensor, double t) {
  check_time(cfg, t);
  const Pose to_sensor = inverse(sensor_pose_at(cfg, sensor, t));
  return visible_in(sensor, boxes_in_frame(cfg, to_sensor, t));
}

std::vector<double> sensor_timestamps(const SensorModel& sensor, double duration) {
  std::vector<double> ts;
  for (std::uint64_t n = 0;; ++n) {
    const double t = sensor.trigger_offset + static_cast<double>(n) / sensor.rate_hz;
    if (t > duration + kTimeEps) break;
    if (t >= 0.0) ts.push_back(t);
  }
  return ts;
}

Frame render_frame(const ScenarioConfig& cfg, const SensorModel& sensor, double t,
                   std::uint64_t frame_index) {
  check_time(cfg, t);
  auto rng = frame_rng(cfg.seed, sensor.id, frame_index);
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::uniform_real_distribution<double> unit(0.0, 1.0);

  const Pose pose = sensor_pose_at(cfg, sensor, t);
  const Pose to_sensor = inverse(pose);
  const auto boxes = boxes_in_frame(cfg, to_sensor, t);
  const auto visible = visible_in(sensor, boxes);

  Frame frame;
  frame.sensor_id = sensor.id;
  frame.timestamp = t;
  frame.pose = pose;
  frame.scene_id = cfg.name;

  // Ground truth annotations.
  std::vector<std::size_t> labelled = visible;
  if (sensor.platform == Platform::kVehicle && cfg.vehicle_gt == VehicleGroundTruth::kCooperative) {
    const auto inf_visible = visible_tracks(cfg, cfg.infrastructure, t);
    std::vector<std::size_t> merged;
    std::set_union(visible.begin(), visible.end(), inf_visible.begin(), inf_visible.end(),
                   std::back_inserter(merged));
    labelled = std::move(merged);
  }
  Detections gt;
  for (auto i : labelled) gt.push_back({*boxes[i], cfg.tracks[i].class_id, 1.0});
  frame.annotations = std::move(gt);

  // Oracle detections: perturbed, possibly dropped, plus clutter.
  const NoiseModel& nm = sensor.noise;
  Detections dets;
  for (auto i : visible) {
    const double u_drop = unit(rng);
    const double dx = nm.sigma_xy * gauss(rng);
    const double dy = nm.sigma_xy * gauss(rng);
    const double dz = nm.sigma_z * gauss(rng);
    const double dyaw = nm.sigma_yaw * gauss(rng);
    if (u_drop < nm.drop_prob) continue;
    Detection d{*boxes[i], cfg.tracks[i].class_id, 1.0};
    d.box.center += Eigen::Vector3d(dx, dy, dz);
    d.box.yaw = normalize_angle(d.box.yaw + dyaw);
    const double err = std::sqrt(dx * dx + dy * dy + dz * dz);
    d.score = std::clamp(1.0 - err / nm.score_scale, 0.05, 1.0);
    dets.push_back(d);
  }
  if (nm.fp_rate > 0.0) {
    std::vector<std::uint8_t> classes;
    for (const auto& tr : cfg.tracks) classes.push_back(tr.class_id);
    std::sort(classes.begin(), classes.end());
    classes.erase(std::unique(classes.begin(), classes.end()), classes.end());
    if (classes.empty()) classes.push_back(0);

    const int n_fp = std::poisson_distribution<int>(nm.fp_rate)(rng);
    const double reach = std::min(sensor.max_range, 120.0);
    const double ground_z = transform_point(to_sensor, Eigen::Vector3d(pose.translation().x(),
                                                                      pose.translation().y(), 0.0))
                                .z();
    for (int k = 0; k < n_fp; ++k) {
      const double r = reach * std::sqrt(unit(rng));
      const double theta = fov_angle(sensor, rng);
      const auto cls = classes[std::uniform_int_distribution<std::size_t>(0, classes.size() - 1)(rng)];
      Detection d;
      d.class_id = cls;
      d.box.size = class_prior(cls);
      d.box.center = {r * std::cos(theta), r * std::sin(theta), ground_z + 0.5 * d.box.size.height};
      d.box.yaw = normalize_angle(std::uniform_real_distribution<double>(-kPi, kPi)(rng));
      d.score = std::uniform_real_distribution<double>(0.05, 0.5)(rng);
      dets.push_back(d);
    }
  }
  frame.detections = std::move(dets);

  if (sensor.cloud.enabled) {
    PointCloud pc;
    std::vector<double> inten;
    const std::size_t total = sensor.cloud.points_per_box * visible.size() + sensor.cloud.ground_points;
    pc.points.reserve(total);
    inten.reserve(total);
    for (auto i : visible) {
      for (std::size_t k = 0; k < sensor.cloud.points_per_box; ++k) {
        pc.points.push_back(sample_on_surface(*boxes[i], rng));
        inten.push_back(unit(rng));
      }
    }
    const double reach = std::min(sensor.cloud.ground_radius, sensor.max_range);
    const double ground_z = transform_point(to_sensor, Eigen::Vector3d(pose.translation().x(),
                                                                      pose.translation().y(), 0.0))
                                .z();
    for (std::size_t k = 0; k < sensor.cloud.ground_points; ++k) {
      const double r = reach * std::sqrt(unit(rng));
      const double theta = fov_angle(sensor, rng);
      pc.points.emplace_back(r * std::cos(theta), r * std::sin(theta), ground_z);
      inten.push_back(0.3 * unit(rng));
    }
    pc.intensity = std::move(inten);
    frame.cloud = std::move(pc);
  }
  return frame;
}

Streams sample_streams(const ScenarioConfig& cfg, std::size_t workers) {
  validate(cfg);
  const auto tv = sensor_timestamps(cfg.vehicle, cfg.duration);
  const auto ti = sensor_timestamps(cfg.infrastructure, cfg.duration);
  Streams out;
  out.vehicle.resize(tv.size());
  out.infrastructure.resize(ti.size());
  parallel_for(tv.size() + ti.size(), workers, [&](std::size_t job) {
    if (job < tv.size()) {
      out.vehicle[job] = render_frame(cfg, cfg.vehicle, tv[job], job);
    } else {
      const std::size_t n = job - tv.size();
      out.infrastructure[n] = render_frame(cfg, cfg.infrastructure, ti[n], n);
    }
  });
  return out;
}

}  // namespace vicfuse
