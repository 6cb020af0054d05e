#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

#include "vicfuse/geometry.hpp"

namespace vicfuse {

// Category table shared by detections and annotations. The default mirrors
// the ten labelled categories of the roadside dataset this library targets.
struct ClassTable {
  std::vector<std::string> names;

  static const ClassTable& standard();
  std::size_t size() const { return names.size(); }
  bool contains(std::uint32_t id) const { return id < names.size(); }
  // Throws InvalidArgument for unknown names.
  std::uint8_t id_of(std::string_view name) const;
};

struct Detection {
  BBox3D box;
  std::uint8_t class_id = 0;
  double score = 1.0;

  bool operator==(const Detection&) const = default;
};

using Detections = std::vector<Detection>;

void validate(const Detection& det, const ClassTable& classes = ClassTable::standard());

// One timestamped capture. `pose` is sensor-to-world. At least one of the
// three payloads must be present; an empty list still counts as present.
struct Frame {
  std::string sensor_id;
  double timestamp = 0.0;
  Pose pose;
  std::optional<Detections> detections;
  std::optional<PointCloud> cloud;
  std::optional<Detections> annotations;
  std::optional<std::string> scene_id;

  bool operator==(const Frame&) const = default;
};

void validate(const Frame& frame);

// JSON-lines record codec. Doubles are written in shortest round-trip form,
// so read(write(x)) is bit-exact.
nlohmann::json to_json(const Detection& det);
Detection detection_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Detections& dets);
Detections detections_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Pose& pose);
Pose pose_from_json(const nlohmann::json& j);
nlohmann::json to_json(const Frame& frame);
Frame frame_from_json(const nlohmann::json& j);

std::string dump_frames(std::span<const Frame> frames);
// Parses JSON-lines text. Blank lines are skipped. ParseError carries the
// 1-based line number; InvariantError flags non-increasing timestamps within
// one sensor stream. The result is stably sorted by timestamp.
std::vector<Frame> parse_frames(std::string_view text);

std::vector<Frame> read_frames(const std::filesystem::path& path);
void write_frames(std::span<const Frame> frames, const std::filesystem::path& path);

}  // namespace vicfuse
