#pragma once

#include <array>
#include <optional>
#include <vector>

#include <Eigen/Core>
#include <Eigen/Geometry>

namespace vicfuse {

inline constexpr double kPi = 3.14159265358979323846;
inline constexpr double kOrthonormalTol = 1e-9;
inline constexpr double kDefaultPlanarityTolRad = kPi / 180.0;

// Wraps an angle into [-pi, pi).
double normalize_angle(double a);

Eigen::Matrix3d rot_x(double angle);
Eigen::Matrix3d rot_y(double angle);
Eigen::Matrix3d rot_z(double angle);

// Rigid transform x -> R x + t. Construction rejects rotations that are not
// orthonormal with determinant +1 (within kOrthonormalTol).
class Pose {
 public:
  Pose();
  Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation);

  static Pose identity() { return Pose(); }
  // Planar pose: rotation about +z by `yaw`, then translation.
  static Pose from_yaw(double yaw, const Eigen::Vector3d& translation);

  const Eigen::Matrix3d& rotation() const { return rotation_; }
  const Eigen::Vector3d& translation() const { return translation_; }

  // Heading of the rotated x-axis in the xy-plane.
  double yaw() const;

  bool operator==(const Pose&) const = default;

 private:
  Eigen::Matrix3d rotation_;
  Eigen::Vector3d translation_;
};

// Result maps a point through `b` first, then `a`.
Pose compose(const Pose& a, const Pose& b);
Pose inverse(const Pose& p);

struct BoxSize {
  double width = 1.0;   // along local y
  double length = 1.0;  // along local x (heading)
  double height = 1.0;

  bool operator==(const BoxSize&) const = default;
};

// 7-DoF cuboid. Yaw is measured CCW from +x of the containing frame and the
// length edge points along the heading.
struct BBox3D {
  Eigen::Vector3d center = Eigen::Vector3d::Zero();
  BoxSize size;
  double yaw = 0.0;

  double volume() const { return size.width * size.length * size.height; }
  bool operator==(const BBox3D&) const = default;
};

// Throws InvalidArgument when a dimension is not strictly positive or yaw is
// outside [-pi, pi).
void validate(const BBox3D& box);

struct PointCloud {
  std::vector<Eigen::Vector3d> points;
  std::optional<std::vector<double>> intensity;

  std::size_t size() const { return points.size(); }
  bool operator==(const PointCloud&) const = default;
};

Eigen::Vector3d transform_point(const Pose& p, const Eigen::Vector3d& x);
PointCloud transform_points(const Pose& p, const PointCloud& pc);

// Moves a box into another frame. The pose must keep the z-axis within
// `planarity_tol` radians of vertical, otherwise NonPlanarRotation.
BBox3D transform_box(const Pose& p, const BBox3D& b,
                     double planarity_tol = kDefaultPlanarityTolRad);

using BevPolygon = std::vector<Eigen::Vector2d>;

// Footprint corners, counter-clockwise, starting at the front-right corner.
std::array<Eigen::Vector2d, 4> bev_corners(const BBox3D& b);

double polygon_area(const BevPolygon& poly);

// Sutherland-Hodgman clip of a convex `subject` against a convex CCW `clip`.
BevPolygon clip_convex(const BevPolygon& subject, const BevPolygon& clip);

double bev_intersection_area(const BBox3D& a, const BBox3D& b);
double iou_bev(const BBox3D& a, const BBox3D& b);
double iou_3d(const BBox3D& a, const BBox3D& b);

// Euclidean distance of box centers in the xy-plane.
double bev_distance(const BBox3D& a, const BBox3D& b);

// True when segment [p, q] touches the footprint of `b`.
bool segment_hits_box(const Eigen::Vector2d& p, const Eigen::Vector2d& q,
                      const BBox3D& b);

}  // namespace vicfuse
