#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <span>
#include <vector>

namespace lidarcut {

using Point3 = Eigen::Vector3d;
using Points = std::vector<Point3, Eigen::aligned_allocator<Point3>>;

/// Rigid transform x -> rotation * x + translation.
struct RigidPose {
  Eigen::Matrix3d rotation = Eigen::Matrix3d::Identity();
  Eigen::Vector3d translation = Eigen::Vector3d::Zero();

  Point3 apply(const Point3& p) const { return rotation * p + translation; }
  RigidPose inverse() const {
    RigidPose inv;
    inv.rotation = rotation.transpose();
    inv.translation = -(inv.rotation * translation);
    return inv;
  }
  /// this ∘ other
  RigidPose compose(const RigidPose& other) const {
    RigidPose out;
    out.rotation = rotation * other.rotation;
    out.translation = rotation * other.translation + translation;
    return out;
  }
  /// Orthonormal with determinant +1 within `tol`, all entries finite.
  bool is_valid(double tol = 1e-6) const;
};

/// Axis-aligned box given by min/max corners.
struct Aabb {
  Point3 min = Point3::Zero();
  Point3 max = Point3::Zero();

  double volume() const {
    const Point3 e = (max - min).cwiseMax(0.0);
    return e.x() * e.y() * e.z();
  }
  void extend(const Point3& p) {
    min = min.cwiseMin(p);
    max = max.cwiseMax(p);
  }
  bool operator==(const Aabb& o) const { return min == o.min && max == o.max; }
};

inline bool all_finite(const Point3& p) { return p.allFinite(); }

}  // namespace lidarcut
