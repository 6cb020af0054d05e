#pragma once

#include <memory>

#include "vicfuse/frames.hpp"
#include "vicfuse/pairing.hpp"

namespace testing_helpers {

inline vicfuse::BBox3D box(double x, double y, double z = 0.0, double w = 2.0, double l = 4.0, double h = 1.5,
                           double yaw = 0.0) {
  vicfuse::BBox3D b;
  b.center = {x, y, z};
  b.size = {w, l, h};
  b.yaw = yaw;
  return b;
}

inline vicfuse::Detection det(double x, double y, double score = 1.0, std::uint8_t cls = 0) {
  return {box(x, y), cls, score};
}

inline vicfuse::Frame frame(std::string id, double t, vicfuse::Pose pose = {}, vicfuse::Detections dets = {}) {
  vicfuse::Frame f;
  f.sensor_id = std::move(id);
  f.timestamp = t;
  f.pose = pose;
  f.detections = std::move(dets);
  return f;
}

inline vicfuse::FrameRef ref(vicfuse::Frame f) { return std::make_shared<const vicfuse::Frame>(std::move(f)); }

inline vicfuse::FramePair pair(vicfuse::Frame veh, vicfuse::Frame inf, std::vector<vicfuse::Frame> history = {}) {
  vicfuse::FramePair p;
  p.delta_t = veh.timestamp - inf.timestamp;
  p.vehicle = ref(std::move(veh));
  p.infrastructure = ref(std::move(inf));
  for (auto& h : history) p.inf_history.push_back(ref(std::move(h)));
  return p;
}

}  // namespace testing_helpers
