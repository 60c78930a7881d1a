#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <stdexcept>

#include "panmap/image.hpp"

namespace panmap {

// Pinhole camera model; pixel coordinates are taken at integer positions,
// back-projection of pixel (u, v) at depth d is d * ((u-cx)/fx, (v-cy)/fy, 1).
struct PinholeIntrinsics {
  double fx = 0, fy = 0, cx = 0, cy = 0;

  Eigen::Vector3d backproject(double u, double v, double depth) const {
    return {depth * (u - cx) / fx, depth * (v - cy) / fy, depth};
  }
  // Ray direction with unit z component; scaling it by a depth value gives
  // the camera-frame point at that z-depth.
  Eigen::Vector3d ray(double u, double v) const {
    return {(u - cx) / fx, (v - cy) / fy, 1.0};
  }
  Eigen::Matrix3d matrix() const {
    Eigen::Matrix3d k = Eigen::Matrix3d::Identity();
    k(0, 0) = fx; k(1, 1) = fy; k(0, 2) = cx; k(1, 2) = cy;
    return k;
  }
};

// One RGB-D frame with a camera-to-world pose. Depth is in meters with 0
// marking invalid pixels.
struct CameraFrame {
  PinholeIntrinsics intrinsics;
  Eigen::Matrix4d pose = Eigen::Matrix4d::Identity();  // camera -> world
  DepthImage depth;
  ColorImage color;

  Eigen::Matrix3d rotation() const { return pose.topLeftCorner<3, 3>(); }
  Eigen::Vector3d translation() const { return pose.topRightCorner<3, 1>(); }

  Eigen::Vector3d camera_to_world(const Eigen::Vector3d& p_cam) const {
    return rotation() * p_cam + translation();
  }

  // Rigid-pose check: rotation orthonormal within tol, det +1, bottom row
  // (0,0,0,1).
  bool pose_is_rigid(double tol = 1e-6) const {
    Eigen::Matrix3d r = rotation();
    if (((r * r.transpose()) - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > tol)
      return false;
    if (std::abs(r.determinant() - 1.0) > tol) return false;
    Eigen::RowVector4d bottom = pose.row(3);
    return (bottom - Eigen::RowVector4d(0, 0, 0, 1)).cwiseAbs().maxCoeff() <= tol;
  }

  void validate() const {
    if (!pose_is_rigid()) throw std::invalid_argument("camera pose is not rigid");
    if (!depth.same_size(color) && !color.empty())
      throw std::invalid_argument("depth/color dimension mismatch");
    for (size_t i = 0; i < depth.size(); ++i)
      if (depth[i] < 0.0f)
        throw std::invalid_argument("negative depth value");
  }
};

}  // namespace panmap
