#include "vicfuse/wire.hpp"

#include <bit>
#include <string>

#include "vicfuse/errors.hpp"

namespace vicfuse {
namespace {

constexpr std::uint8_t kMagic[4] = {'V', 'I', 'C', 'W'};

class ByteWriter {
 public:
  explicit ByteWriter(std::size_t reserve) { out_.reserve(reserve); }

  void u8(std::uint8_t v) { out_.push_back(v); }
  void f32(double v) {
    const auto bits = std::bit_cast<std::uint32_t>(static_cast<float>(v));
    for (int shift = 0; shift < 32; shift += 8) out_.push_back(static_cast<std::uint8_t>(bits >> shift));
  }
  std::vector<std::uint8_t> take() { return std::move(out_); }

 private:
  std::vector<std::uint8_t> out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::span<const std::uint8_t> in) : in_(in) {}

  std::uint8_t u8() { return in_[pos_++]; }
  double f32() {
    std::uint32_t bits = 0;
    for (int shift = 0; shift < 32; shift += 8) bits |= static_cast<std::uint32_t>(in_[pos_++]) << shift;
    return static_cast<double>(std::bit_cast<float>(bits));
  }

 private:
  std::span<const std::uint8_t> in_;
  std::size_t pos_ = 0;
};

void write_header(ByteWriter& w, WireLevel level) {
  for (auto c : kMagic) w.u8(c);
  w.u8(static_cast<std::uint8_t>(level));
  w.u8(kWireVersion);
  w.u8(0);
  w.u8(0);
}

// Returns the record count after validating the header and the body length.
std::size_t check_header(const WirePayload& p, WireLevel expected, std::size_t record_bytes) {
  const auto& b = p.bytes;
  if (b.size() < kWireHeaderBytes) throw MalformedPayload("payload shorter than header");
  for (std::size_t i = 0; i < 4; ++i) {
    if (b[i] != kMagic[i]) throw MalformedPayload("bad magic");
  }
  if (b[4] != static_cast<std::uint8_t>(expected) || p.level != expected) {
    throw MalformedPayload("unexpected level byte " + std::to_string(b[4]));
  }
  if (b[5] != kWireVersion) throw MalformedPayload("unsupported version " + std::to_string(b[5]));
  if (b[6] != 0 || b[7] != 0) throw MalformedPayload("reserved header bytes are not zero");
  const std::size_t body = b.size() - kWireHeaderBytes;
  if (body % record_bytes != 0) throw MalformedPayload("truncated record");
  return body / record_bytes;
}

}  // namespace

WirePayload encode_objects(std::span<const Detection> dets) {
  ByteWriter w(kWireHeaderBytes + kObjectRecordBytes * dets.size());
  write_header(w, WireLevel::kObjects);
  for (const auto& d : dets) {
    w.u8(d.class_id);
    w.f32(d.score);
    w.f32(d.box.center.x());
    w.f32(d.box.center.y());
    w.f32(d.box.center.z());
    w.f32(d.box.size.width);
    w.f32(d.box.size.length);
    w.f32(d.box.size.height);
    w.f32(d.box.yaw);
  }
  return {WireLevel::kObjects, w.take()};
}

Detections decode_objects(const WirePayload& payload) {
  const std::size_t n = check_header(payload, WireLevel::kObjects, kObjectRecordBytes);
  ByteReader r(std::span(payload.bytes).subspan(kWireHeaderBytes));
  Detections out(n);
  for (auto& d : out) {
    d.class_id = r.u8();
    d.score = r.f32();
    const double x = r.f32();
    const double y = r.f32();
    const double z = r.f32();
    d.box.center = {x, y, z};
    d.box.size.width = r.f32();
    d.box.size.length = r.f32();
    d.box.size.height = r.f32();
    d.box.yaw = r.f32();
  }
  return out;
}

WirePayload encode_cloud(const PointCloud& pc) {
  ByteWriter w(kWireHeaderBytes + kPointRecordBytes * pc.size());
  write_header(w, WireLevel::kRawCloud);
  for (std::size_t i = 0; i < pc.points.size(); ++i) {
    const auto& p = pc.points[i];
    w.f32(p.x());
    w.f32(p.y());
    w.f32(p.z());
    w.f32(pc.intensity ? (*pc.intensity)[i] : 0.0);
  }
  return {WireLevel::kRawCloud, w.take()};
}

PointCloud decode_cloud(const WirePayload& payload) {
  const std::size_t n = check_header(payload, WireLevel::kRawCloud, kPointRecordBytes);
  ByteReader r(std::span(payload.bytes).subspan(kWireHeaderBytes));
  PointCloud pc;
  pc.points.resize(n);
  pc.intensity.emplace(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double x = r.f32();
    const double y = r.f32();
    const double z = r.f32();
    pc.points[i] = {x, y, z};
    (*pc.intensity)[i] = r.f32();
  }
  return pc;
}

}  // namespace vicfuse
