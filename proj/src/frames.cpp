#include "vicfuse/frames.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <sstream>

#include "vicfuse/errors.hpp"

namespace vicfuse {

using nlohmann::json;

const ClassTable& ClassTable::standard() {
  static const ClassTable table{{"Car", "Truck", "Van", "Bus", "Pedestrian", "Cyclist",
                                 "Tricyclist", "Motorcyclist", "Barrowlist", "TrafficCone"}};
  return table;
}

std::uint8_t ClassTable::id_of(std::string_view name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return static_cast<std::uint8_t>(i);
  }
  throw InvalidArgument("unknown class name '" + std::string(name) + "'");
}

void validate(const Detection& det, const ClassTable& classes) {
  validate(det.box);
  if (!(det.score >= 0.0 && det.score <= 1.0)) {
    throw InvalidArgument("detection score must be in [0, 1]");
  }
  if (!classes.contains(det.class_id)) {
    throw InvalidArgument("class id " + std::to_string(det.class_id) + " not in class table");
  }
}

void validate(const Frame& frame) {
  if (!frame.detections && !frame.cloud && !frame.annotations) {
    throw InvariantError("frame '" + frame.sensor_id + "' carries no detections, cloud or annotations");
  }
  if (!std::isfinite(frame.timestamp)) throw InvariantError("frame timestamp is not finite");
  if (frame.detections) {
    for (const auto& d : *frame.detections) validate(d);
  }
  if (frame.annotations) {
    for (const auto& d : *frame.annotations) validate(d);
  }
  if (frame.cloud && frame.cloud->intensity) {
    const auto& inten = *frame.cloud->intensity;
    if (inten.size() != frame.cloud->points.size()) {
      throw InvariantError("cloud intensity count differs from point count");
    }
    for (double v : inten) {
      if (!(v >= 0.0 && v <= 1.0)) throw InvariantError("cloud intensity outside [0, 1]");
    }
  }
}

json to_json(const Detection& det) {
  const auto& b = det.box;
  return json{{"cls", det.class_id},
              {"score", det.score},
              {"x", b.center.x()},
              {"y", b.center.y()},
              {"z", b.center.z()},
              {"w", b.size.width},
              {"l", b.size.length},
              {"h", b.size.height},
              {"yaw", b.yaw}};
}

Detection detection_from_json(const json& j) {
  Detection d;
  d.class_id = j.at("cls").get<std::uint8_t>();
  d.score = j.at("score").get<double>();
  d.box.center = {j.at("x").get<double>(), j.at("y").get<double>(), j.at("z").get<double>()};
  d.box.size = {j.at("w").get<double>(), j.at("l").get<double>(), j.at("h").get<double>()};
  d.box.yaw = j.at("yaw").get<double>();
  return d;
}

json to_json(const Detections& dets) {
  json arr = json::array();
  for (const auto& d : dets) arr.push_back(to_json(d));
  return arr;
}

Detections detections_from_json(const json& j) {
  Detections out;
  out.reserve(j.size());
  for (const auto& e : j) out.push_back(detection_from_json(e));
  return out;
}

json to_json(const Pose& pose) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) r.push_back(pose.rotation()(i, k));
  }
  const auto& t = pose.translation();
  return json{{"r", r}, {"t", {t.x(), t.y(), t.z()}}};
}

Pose pose_from_json(const json& j) {
  const auto& r = j.at("r");
  const auto& t = j.at("t");
  if (r.size() != 9 || t.size() != 3) throw InvalidArgument("pose needs r[9] and t[3]");
  Eigen::Matrix3d rot;
  for (int i = 0; i < 3; ++i) {
    for (int k = 0; k < 3; ++k) rot(i, k) = r.at(3 * i + k).get<double>();
  }
  return Pose(rot, {t[0].get<double>(), t[1].get<double>(), t[2].get<double>()});
}

json to_json(const Frame& frame) {
  json j;
  j["sensor_id"] = frame.sensor_id;
  j["t"] = frame.timestamp;
  j["pose"] = to_json(frame.pose);
  if (frame.scene_id) j["scene_id"] = *frame.scene_id;
  if (frame.detections) j["dets"] = to_json(*frame.detections);
  if (frame.cloud) {
    json pts = json::array();
    for (const auto& p : frame.cloud->points) {
      pts.push_back(p.x());
      pts.push_back(p.y());
      pts.push_back(p.z());
    }
    json cloud{{"pts", std::move(pts)}};
    if (frame.cloud->intensity) cloud["inten"] = *frame.cloud->intensity;
    j["cloud"] = std::move(cloud);
  }
  if (frame.annotations) j["gt"] = to_json(*frame.annotations);
  return j;
}

Frame frame_from_json(const json& j) {
  Frame f;
  f.sensor_id = j.at("sensor_id").get<std::string>();
  f.timestamp = j.at("t").get<double>();
  f.pose = pose_from_json(j.at("pose"));
  if (j.contains("scene_id")) f.scene_id = j["scene_id"].get<std::string>();
  if (j.contains("dets")) f.detections = detections_from_json(j["dets"]);
  if (j.contains("cloud")) {
    const auto& c = j["cloud"];
    const auto& pts = c.at("pts");
    if (pts.size() % 3 != 0) throw InvalidArgument("cloud.pts length is not a multiple of 3");
    PointCloud pc;
    pc.points.reserve(pts.size() / 3);
    for (std::size_t i = 0; i < pts.size(); i += 3) {
      pc.points.emplace_back(pts[i].get<double>(), pts[i + 1].get<double>(),
                             pts[i + 2].get<double>());
    }
    if (c.contains("inten")) pc.intensity = c["inten"].get<std::vector<double>>();
    f.cloud = std::move(pc);
  }
  if (j.contains("gt")) f.annotations = detections_from_json(j["gt"]);
  return f;
}

std::string dump_frames(std::span<const Frame> frames) {
  std::string out;
  for (const auto& f : frames) {
    out += to_json(f).dump();
    out += '\n';
  }
  return out;
}

std::vector<Frame> parse_frames(std::string_view text) {
  std::vector<Frame> frames;
  std::map<std::string, double, std::less<>> last_t;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < text.size()) {
    std::size_t end = text.find('\n', pos);
    if (end == std::string_view::npos) end = text.size();
    const std::string_view line = text.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string_view::npos) continue;

    Frame f;
    try {
      f = frame_from_json(json::parse(line));
      validate(f);
    } catch (const json::exception& e) {
      throw ParseError(line_no, e.what());
    } catch (const InvalidArgument& e) {
      throw ParseError(line_no, e.what());
    } catch (const InvalidPose& e) {
      throw ParseError(line_no, e.what());
    } catch (const InvariantError& e) {
      throw InvariantError("line " + std::to_string(line_no) + ": " + e.what());
    }

    auto it = last_t.find(f.sensor_id);
    if (it != last_t.end() && !(f.timestamp > it->second)) {
      throw InvariantError("line " + std::to_string(line_no) + ": timestamp " +
                           std::to_string(f.timestamp) + " does not increase in stream '" +
                           f.sensor_id + "'");
    }
    last_t[f.sensor_id] = f.timestamp;
    frames.push_back(std::move(f));
  }
  std::stable_sort(frames.begin(), frames.end(),
                   [](const Frame& a, const Frame& b) { return a.timestamp < b.timestamp; });
  return frames;
}

std::vector<Frame> read_frames(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open frame file " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_frames(buf.str());
}

void write_frames(std::span<const Frame> frames, const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error("cannot write frame file " + path.string());
  out << dump_frames(frames);
  if (!out) throw Error("short write to " + path.string());
}

}  // namespace vicfuse
