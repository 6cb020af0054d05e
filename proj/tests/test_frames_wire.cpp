#include <gtest/gtest.h>

#include <bit>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <random>

#include "helpers.hpp"
#include "vicfuse/errors.hpp"
#include "vicfuse/frames.hpp"
#include "vicfuse/wire.hpp"

using namespace vicfuse;
using testing_helpers::det;
using testing_helpers::frame;

namespace {

// Values that survive the float32 wire records unchanged.
float f32(std::mt19937_64& rng, float lo, float hi) { return std::uniform_real_distribution<float>(lo, hi)(rng); }

Detection random_wire_detection(std::mt19937_64& rng) {
  Detection d;
  d.box.center = {f32(rng, -100, 100), f32(rng, -100, 100), f32(rng, -3, 3)};
  d.box.size = {f32(rng, 0.3f, 3), f32(rng, 0.3f, 12), f32(rng, 0.5f, 4)};
  d.box.yaw = f32(rng, -3.14f, 3.14f);
  d.class_id = static_cast<std::uint8_t>(std::uniform_int_distribution<int>(0, 9)(rng));
  d.score = f32(rng, 0, 1);
  return d;
}

std::filesystem::path temp_file(const std::string& name) {
  return std::filesystem::temp_directory_path() / ("vicfuse_test_" + name);
}

std::uint32_t read_u32le(const std::vector<std::uint8_t>& b, std::size_t off) {
  return static_cast<std::uint32_t>(b[off]) | static_cast<std::uint32_t>(b[off + 1]) << 8 |
         static_cast<std::uint32_t>(b[off + 2]) << 16 | static_cast<std::uint32_t>(b[off + 3]) << 24;
}

}  // namespace

TEST(ClassTable, TenStandardClasses) {
  const auto& t = ClassTable::standard();
  EXPECT_EQ(t.size(), 10u);
  EXPECT_EQ(t.id_of("Car"), 0);
  EXPECT_EQ(t.id_of("Pedestrian"), 4);
  EXPECT_THROW(t.id_of("Tank"), InvalidArgument);
}

TEST(Frame, ValidateNeedsPayload) {
  Frame f;
  f.sensor_id = "v";
  EXPECT_THROW(validate(f), InvariantError);
  f.detections = Detections{};
  EXPECT_NO_THROW(validate(f));
}

TEST(Frame, ValidateChecksIntensityLength) {
  Frame f;
  f.cloud = PointCloud{{{0, 0, 0}, {1, 1, 1}}, std::vector<double>{0.5}};
  EXPECT_THROW(validate(f), InvariantError);
}

TEST(Detection, ValidateScoreAndClass) {
  Detection d = det(0, 0, 1.5);
  EXPECT_THROW(validate(d), InvalidArgument);
  d.score = 0.5;
  d.class_id = 10;
  EXPECT_THROW(validate(d), InvalidArgument);
}

TEST(FrameIo, EmptyFileGivesNoFrames) {
  const auto path = temp_file("empty.jsonl");
  { std::ofstream(path).close(); }
  EXPECT_TRUE(read_frames(path).empty());
}

TEST(FrameIo, RoundTripSingleFrame) {
  const auto path = temp_file("one.jsonl");
  std::vector<Frame> frames = {frame("vehicle", 0.1, Pose::identity(), {det(1.25, -3.5, 0.75, 2)})};
  write_frames(frames, path);
  EXPECT_EQ(read_frames(path), frames);
}

TEST(FrameIo, RoundTripIsBitExact) {
  std::mt19937_64 rng(11);
  std::uniform_real_distribution<double> u(-1e3, 1e3);
  std::vector<Frame> frames;
  for (int i = 0; i < 20; ++i) {
    Frame f = frame(i % 2 ? "a" : "b", 0.1 * i + 1e-13 * i, Pose::from_yaw(u(rng) / 300.0, {u(rng), u(rng), u(rng)}));
    Detections ds;
    for (int j = 0; j < 5; ++j) {
      Detection d = det(u(rng), u(rng), std::uniform_real_distribution<double>(0, 1)(rng), j % 10);
      d.box.yaw = normalize_angle(u(rng));
      ds.push_back(d);
    }
    f.detections = ds;
    f.annotations = ds;
    f.scene_id = "scene-" + std::to_string(i / 5);
    PointCloud pc;
    pc.points = {{u(rng), u(rng), u(rng)}, {u(rng), u(rng), u(rng)}};
    pc.intensity = std::vector<double>{0.1, 0.9};
    f.cloud = pc;
    frames.push_back(f);
  }
  const auto parsed = parse_frames(dump_frames(frames));
  ASSERT_EQ(parsed.size(), frames.size());
  for (std::size_t i = 0; i < frames.size(); ++i) EXPECT_EQ(parsed[i], frames[i]) << i;
}

TEST(FrameIo, RepeatedTimestampInStreamIsInvariantError) {
  std::vector<Frame> frames = {frame("v", 0.1, {}, {}), frame("v", 0.1, {}, {})};
  EXPECT_THROW(parse_frames(dump_frames(frames)), InvariantError);
}

TEST(FrameIo, DecreasingTimestampIsInvariantError) {
  const std::string text = dump_frames(std::vector<Frame>{frame("v", 0.2, {}, {})}) +
                           dump_frames(std::vector<Frame>{frame("v", 0.1, {}, {})});
  EXPECT_THROW(parse_frames(text), InvariantError);
}

TEST(FrameIo, InterleavedStreamsAreSortedByTime) {
  const std::string text = dump_frames(std::vector<Frame>{frame("a", 0.2, {}, {})}) +
                           dump_frames(std::vector<Frame>{frame("b", 0.1, {}, {})});
  const auto frames = parse_frames(text);
  ASSERT_EQ(frames.size(), 2u);
  EXPECT_EQ(frames[0].sensor_id, "b");
}

TEST(FrameIo, ParseErrorCarriesLineNumber) {
  const std::string good = dump_frames(std::vector<Frame>{frame("v", 0.1, {}, {})});
  try {
    parse_frames(good + "{not json}\n");
    FAIL() << "expected ParseError";
  } catch (const ParseError& e) {
    EXPECT_EQ(e.record(), 2u);
  }
}

TEST(FrameIo, BadPoseIsParseError) {
  const std::string line =
      R"({"sensor_id":"v","t":0.0,"pose":{"r":[2,0,0,0,1,0,0,0,1],"t":[0,0,0]},"dets":[]})";
  EXPECT_THROW(parse_frames(line), ParseError);
}

TEST(Wire, ObjectPayloadSizes) {
  EXPECT_EQ(encode_objects(Detections{}).size(), 8u);
  Detections three = {det(1, 2), det(3, 4), det(5, 6)};
  EXPECT_EQ(encode_objects(three).size(), 107u);
  std::mt19937_64 rng(12);
  Detections ds;
  for (std::size_t n = 0; n <= 100; ++n) {
    EXPECT_EQ(encode_objects(ds).size(), 8 + 33 * n);
    ds.push_back(random_wire_detection(rng));
  }
}

TEST(Wire, CloudPayloadSizes) {
  EXPECT_EQ(encode_cloud(PointCloud{}).size(), 8u);
  PointCloud pc;
  pc.points.assign(100000, Eigen::Vector3d(1, 2, 3));
  EXPECT_EQ(encode_cloud(pc).size(), 1600008u);
}

TEST(Wire, HeaderLayout) {
  const auto p = encode_objects(Detections{det(1, 2)});
  ASSERT_GE(p.bytes.size(), 8u);
  EXPECT_EQ(std::string(p.bytes.begin(), p.bytes.begin() + 4), "VICW");
  EXPECT_EQ(p.bytes[4], 0);
  EXPECT_EQ(p.bytes[5], 1);
  EXPECT_EQ(p.bytes[6], 0);
  EXPECT_EQ(p.bytes[7], 0);
  EXPECT_EQ(encode_cloud(PointCloud{}).bytes[4], 1);
}

TEST(Wire, RecordLayoutIsLittleEndianFloat32) {
  Detection d = det(1.5, -2.25, 0.5, 3);
  d.box.center.z() = 0.75;
  d.box.yaw = 0.125;
  const auto p = encode_objects(Detections{d});
  EXPECT_EQ(p.bytes[8], 3);
  const float expected[] = {0.5f, 1.5f, -2.25f, 0.75f, 2.0f, 4.0f, 1.5f, 0.125f};
  for (std::size_t i = 0; i < 8; ++i) {
    EXPECT_EQ(read_u32le(p.bytes, 9 + 4 * i), std::bit_cast<std::uint32_t>(expected[i])) << i;
  }
}

TEST(Wire, ObjectRoundTripBitExact) {
  std::mt19937_64 rng(13);
  for (int trial = 0; trial < 200; ++trial) {
    Detections ds;
    const int n = std::uniform_int_distribution<int>(0, 30)(rng);
    for (int i = 0; i < n; ++i) ds.push_back(random_wire_detection(rng));
    const auto p = encode_objects(ds);
    EXPECT_EQ(decode_objects(p), ds);
    EXPECT_EQ(encode_objects(decode_objects(p)), p);
  }
}

TEST(Wire, CloudRoundTripBitExact) {
  std::mt19937_64 rng(14);
  PointCloud pc;
  std::vector<double> inten;
  for (int i = 0; i < 500; ++i) {
    pc.points.emplace_back(f32(rng, -100, 100), f32(rng, -100, 100), f32(rng, -5, 5));
    inten.push_back(f32(rng, 0, 1));
  }
  pc.intensity = inten;
  const auto p = encode_cloud(pc);
  EXPECT_EQ(decode_cloud(p), pc);
  EXPECT_EQ(encode_cloud(decode_cloud(p)), p);
}

TEST(Wire, MalformedInputs) {
  auto p = encode_objects(Detections{det(1, 2)});
  auto truncated = p;
  truncated.bytes.pop_back();
  EXPECT_THROW(decode_objects(truncated), MalformedPayload);
  auto bad_magic = p;
  bad_magic.bytes[0] = 'X';
  EXPECT_THROW(decode_objects(bad_magic), MalformedPayload);
  auto short_header = p;
  short_header.bytes.resize(5);
  EXPECT_THROW(decode_objects(short_header), MalformedPayload);
  EXPECT_THROW(decode_cloud(p), MalformedPayload);
  auto bad_version = p;
  bad_version.bytes[5] = 9;
  EXPECT_THROW(decode_objects(bad_version), MalformedPayload);
  auto reserved = p;
  reserved.bytes[4] = 2;
  EXPECT_THROW(decode_objects(reserved), MalformedPayload);
}
