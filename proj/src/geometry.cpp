#include "vicfuse/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "vicfuse/errors.hpp"

namespace vicfuse {

double normalize_angle(double a) {
  double r = a - 2.0 * kPi * std::floor((a + kPi) / (2.0 * kPi));
  // floor() rounding can land exactly on the open end.
  if (r >= kPi) r -= 2.0 * kPi;
  if (r < -kPi) r += 2.0 * kPi;
  return r;
}

Eigen::Matrix3d rot_x(double angle) {
  return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitX()).toRotationMatrix();
}

Eigen::Matrix3d rot_y(double angle) {
  return Eigen::AngleAxisd(angle, Eigen::Vector3d::UnitY()).toRotationMatrix();
}

Eigen::Matrix3d rot_z(double angle) {
  const double c = std::cos(angle);
  const double s = std::sin(angle);
  Eigen::Matrix3d r;
  r << c, -s, 0.0, s, c, 0.0, 0.0, 0.0, 1.0;
  return r;
}

Pose::Pose() : rotation_(Eigen::Matrix3d::Identity()), translation_(Eigen::Vector3d::Zero()) {}

Pose::Pose(const Eigen::Matrix3d& rotation, const Eigen::Vector3d& translation)
    : rotation_(rotation), translation_(translation) {
  if (!rotation.allFinite() || !translation.allFinite()) {
    throw InvalidPose("pose has non-finite entries");
  }
  const Eigen::Matrix3d gram = rotation.transpose() * rotation;
  const double err = (gram - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff();
  if (err > kOrthonormalTol) {
    throw InvalidPose("rotation not orthonormal (max |R^T R - I| = " + std::to_string(err) + ")");
  }
  if (std::abs(rotation.determinant() - 1.0) > kOrthonormalTol) {
    throw InvalidPose("rotation determinant is not +1");
  }
}

Pose Pose::from_yaw(double yaw, const Eigen::Vector3d& translation) {
  return Pose(rot_z(yaw), translation);
}

double Pose::yaw() const { return std::atan2(rotation_(1, 0), rotation_(0, 0)); }

Pose compose(const Pose& a, const Pose& b) {
  return Pose(a.rotation() * b.rotation(), a.rotation() * b.translation() + a.translation());
}

Pose inverse(const Pose& p) {
  const Eigen::Matrix3d rt = p.rotation().transpose();
  return Pose(rt, -(rt * p.translation()));
}

void validate(const BBox3D& box) {
  if (!(box.size.width > 0.0) || !(box.size.length > 0.0) || !(box.size.height > 0.0)) {
    throw InvalidArgument("box dimensions must be strictly positive");
  }
  if (!box.center.allFinite() || !(box.yaw >= -kPi && box.yaw < kPi)) {
    throw InvalidArgument("box yaw must be finite and in [-pi, pi)");
  }
}

Eigen::Vector3d transform_point(const Pose& p, const Eigen::Vector3d& x) {
  return p.rotation() * x + p.translation();
}

PointCloud transform_points(const Pose& p, const PointCloud& pc) {
  PointCloud out;
  out.points.reserve(pc.points.size());
  for (const auto& x : pc.points) out.points.push_back(transform_point(p, x));
  out.intensity = pc.intensity;
  return out;
}

BBox3D transform_box(const Pose& p, const BBox3D& b, double planarity_tol) {
  const Eigen::Vector3d z = p.rotation().col(2);
  const double tilt = std::acos(std::clamp(z.z(), -1.0, 1.0));
  if (tilt > planarity_tol) {
    throw NonPlanarRotation("pose tilts the z-axis by " + std::to_string(tilt) + " rad");
  }
  BBox3D out = b;
  out.center = transform_point(p, b.center);
  out.yaw = normalize_angle(b.yaw + p.yaw());
  return out;
}

std::array<Eigen::Vector2d, 4> bev_corners(const BBox3D& b) {
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  const double hl = 0.5 * b.size.length;
  const double hw = 0.5 * b.size.width;
  const Eigen::Vector2d center(b.center.x(), b.center.y());
  const std::array<Eigen::Vector2d, 4> local = {
      Eigen::Vector2d(hl, -hw), Eigen::Vector2d(hl, hw), Eigen::Vector2d(-hl, hw),
      Eigen::Vector2d(-hl, -hw)};
  std::array<Eigen::Vector2d, 4> out;
  for (std::size_t i = 0; i < 4; ++i) {
    out[i] = center + Eigen::Vector2d(c * local[i].x() - s * local[i].y(),
                                      s * local[i].x() + c * local[i].y());
  }
  return out;
}

double polygon_area(const BevPolygon& poly) {
  if (poly.size() < 3) return 0.0;
  double twice = 0.0;
  for (std::size_t i = 0; i < poly.size(); ++i) {
    const auto& p = poly[i];
    const auto& q = poly[(i + 1) % poly.size()];
    twice += p.x() * q.y() - q.x() * p.y();
  }
  return 0.5 * std::abs(twice);
}

namespace {

// >0 when `p` is left of the directed edge a->b.
double side(const Eigen::Vector2d& a, const Eigen::Vector2d& b, const Eigen::Vector2d& p) {
  return (b.x() - a.x()) * (p.y() - a.y()) - (b.y() - a.y()) * (p.x() - a.x());
}

Eigen::Vector2d edge_cross(const Eigen::Vector2d& p, const Eigen::Vector2d& q, double sp,
                           double sq) {
  const double t = sp / (sp - sq);
  return p + t * (q - p);
}

BevPolygon to_polygon(const std::array<Eigen::Vector2d, 4>& c) { return {c.begin(), c.end()}; }

}  // namespace

BevPolygon clip_convex(const BevPolygon& subject, const BevPolygon& clip) {
  BevPolygon out = subject;
  for (std::size_t e = 0; e < clip.size() && !out.empty(); ++e) {
    const auto& a = clip[e];
    const auto& b = clip[(e + 1) % clip.size()];
    BevPolygon in;
    in.swap(out);
    for (std::size_t i = 0; i < in.size(); ++i) {
      const auto& p = in[i];
      const auto& q = in[(i + 1) % in.size()];
      const double sp = side(a, b, p);
      const double sq = side(a, b, q);
      if (sp >= 0.0) {
        out.push_back(p);
        if (sq < 0.0) out.push_back(edge_cross(p, q, sp, sq));
      } else if (sq >= 0.0) {
        out.push_back(edge_cross(p, q, sp, sq));
      }
    }
  }
  return out;
}

double bev_intersection_area(const BBox3D& a, const BBox3D& b) {
  const BevPolygon inter = clip_convex(to_polygon(bev_corners(a)), to_polygon(bev_corners(b)));
  const double area = polygon_area(inter);
  // Edge or corner contact leaves a sliver made of rounding noise.
  const double scale = std::min(a.size.width * a.size.length, b.size.width * b.size.length);
  return area <= 1e-12 * scale ? 0.0 : area;
}

double iou_bev(const BBox3D& a, const BBox3D& b) {
  const double area_a = a.size.width * a.size.length;
  const double area_b = b.size.width * b.size.length;
  const double inter = bev_intersection_area(a, b);
  if (inter <= 0.0) return 0.0;
  return std::clamp(inter / (area_a + area_b - inter), 0.0, 1.0);
}

double iou_3d(const BBox3D& a, const BBox3D& b) {
  const double a_lo = a.center.z() - 0.5 * a.size.height;
  const double a_hi = a.center.z() + 0.5 * a.size.height;
  const double b_lo = b.center.z() - 0.5 * b.size.height;
  const double b_hi = b.center.z() + 0.5 * b.size.height;
  const double dz = std::min(a_hi, b_hi) - std::max(a_lo, b_lo);
  if (dz <= 0.0) return 0.0;
  const double inter = bev_intersection_area(a, b) * dz;
  if (inter <= 0.0) return 0.0;
  return std::clamp(inter / (a.volume() + b.volume() - inter), 0.0, 1.0);
}

double bev_distance(const BBox3D& a, const BBox3D& b) {
  return std::hypot(a.center.x() - b.center.x(), a.center.y() - b.center.y());
}

bool segment_hits_box(const Eigen::Vector2d& p, const Eigen::Vector2d& q, const BBox3D& b) {
  // Liang-Barsky in the box's local frame.
  const double c = std::cos(b.yaw);
  const double s = std::sin(b.yaw);
  const auto to_local = [&](const Eigen::Vector2d& w) {
    const double dx = w.x() - b.center.x();
    const double dy = w.y() - b.center.y();
    return Eigen::Vector2d(c * dx + s * dy, -s * dx + c * dy);
  };
  const Eigen::Vector2d lp = to_local(p);
  const Eigen::Vector2d d = to_local(q) - lp;
  const double hl = 0.5 * b.size.length;
  const double hw = 0.5 * b.size.width;
  double t0 = 0.0;
  double t1 = 1.0;
  const std::array<double, 4> pe = {-d.x(), d.x(), -d.y(), d.y()};
  const std::array<double, 4> qe = {lp.x() + hl, hl - lp.x(), lp.y() + hw, hw - lp.y()};
  for (std::size_t i = 0; i < 4; ++i) {
    if (pe[i] == 0.0) {
      if (qe[i] < 0.0) return false;
      continue;
    }
    const double r = qe[i] / pe[i];
    if (pe[i] < 0.0) {
      t0 = std::max(t0, r);
    } else {
      t1 = std::min(t1, r);
    }
    if (t0 > t1) return false;
  }
  return true;
}

}  // namespace vicfuse
