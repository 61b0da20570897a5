#pragma once

#include <Eigen/Dense>
#include <stdexcept>
#include <string>
#include <vector>

namespace semcom {

using Vec2 = Eigen::Vector2d;
using Vec3 = Eigen::Vector3d;
using Mat3 = Eigen::Matrix3d;

/// Pinhole camera on the capture ring. World -> camera is x_c = R*x_w + t;
/// pixels are u = fx*x/z + cx, v = fy*y/z + cy with z > 0 in front.
struct CameraConfig {
  int view_id = 0;
  double theta = 0.0; // azimuth on the ring, radians
  Mat3 rotation = Mat3::Identity();
  Vec3 translation = Vec3::Zero();
  double fx = 0.0, fy = 0.0;
  double cx = 0.0, cy = 0.0;
  int width = 0, height = 0;

  Vec3 center() const { return -rotation.transpose() * translation; }

  /// ||R^T R - I||_inf, checked at construction/load against 1e-9.
  double orthonormality_error() const;
  void validate() const;
};

struct ProjectionError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Project a world point; throws ProjectionError on non-positive depth.
Vec2 project_point(const CameraConfig& cam, const Vec3& p);

/// Ray through pixel (u,v): origin = camera center, unit direction in world.
struct Ray {
  Vec3 origin;
  Vec3 direction;
};
Ray back_project(const CameraConfig& cam, const Vec2& pixel);

struct RingLayout {
  int count = 36;
  double radius = 7.0;
  double height = 3.0;
  Vec3 look_at = Vec3(2.0, 2.0, 1.2);
  double focal = 500.0;
  int width = 1200;
  int height_px = 600;
};

/// Evenly spaced azimuth ring (count cameras, 2*pi/count apart) around the
/// scene volume, all aimed at look_at.
std::vector<CameraConfig> build_camera_ring(const RingLayout& layout = {});

std::string cameras_to_json(const std::vector<CameraConfig>& cams);
std::vector<CameraConfig> cameras_from_json(const std::string& text);

} // namespace semcom
