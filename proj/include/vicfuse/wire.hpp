#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "vicfuse/frames.hpp"

namespace vicfuse {

// Transmission levels carried in the header's level byte. Level 2 is held for
// an intermediate-feature form that no codec produces yet.
enum class WireLevel : std::uint8_t { kObjects = 0, kRawCloud = 1, kReservedIntermediate = 2 };

inline constexpr std::uint8_t kWireVersion = 1;
inline constexpr std::size_t kWireHeaderBytes = 8;
inline constexpr std::size_t kObjectRecordBytes = 33;
inline constexpr std::size_t kPointRecordBytes = 16;

// Header: "VICW", level, version, two reserved zero bytes. Records follow,
// little-endian IEEE-754 binary32 throughout.
//   object record: class u8, score, x, y, z, w, l, h, yaw
//   point record:  x, y, z, intensity
struct WirePayload {
  WireLevel level = WireLevel::kObjects;
  std::vector<std::uint8_t> bytes;

  std::size_t size() const { return bytes.size(); }
  bool operator==(const WirePayload&) const = default;
};

WirePayload encode_objects(std::span<const Detection> dets);
// Throws MalformedPayload on a bad header, wrong level or truncated record.
Detections decode_objects(const WirePayload& payload);

// Clouds without intensity are sent with intensity 0.
WirePayload encode_cloud(const PointCloud& pc);
PointCloud decode_cloud(const WirePayload& payload);

}  // namespace vicfuse
