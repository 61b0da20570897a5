#include "semcom/camera.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace semcom {

double CameraConfig::orthonormality_error() const {
  Mat3 residual = rotation.transpose() * rotation - Mat3::Identity();
  return residual.cwiseAbs().maxCoeff();
}

void CameraConfig::validate() const {
  if (orthonormality_error() >= 1e-9)
    throw std::invalid_argument("camera " + std::to_string(view_id) +
                                ": rotation is not orthonormal");
  if (fx <= 0.0 || fy <= 0.0)
    throw std::invalid_argument("camera: focal lengths must be positive");
  if (cx < 0.0 || cx >= width || cy < 0.0 || cy >= height)
    throw std::invalid_argument("camera: principal point outside image");
}

Vec2 project_point(const CameraConfig& cam, const Vec3& p) {
  const Vec3 pc = cam.rotation * p + cam.translation;
  if (pc.z() <= 0.0)
    throw ProjectionError("point behind camera (depth " +
                          std::to_string(pc.z()) + ")");
  return {cam.fx * pc.x() / pc.z() + cam.cx,
          cam.fy * pc.y() / pc.z() + cam.cy};
}

Ray back_project(const CameraConfig& cam, const Vec2& pixel) {
  const Vec3 dir_cam((pixel.x() - cam.cx) / cam.fx,
                     (pixel.y() - cam.cy) / cam.fy, 1.0);
  Ray ray;
  ray.origin = cam.center();
  ray.direction = (cam.rotation.transpose() * dir_cam).normalized();
  return ray;
}

std::vector<CameraConfig> build_camera_ring(const RingLayout& layout) {
  std::vector<CameraConfig> cams;
  cams.reserve(layout.count);
  const Vec3 ring_center(layout.look_at.x(), layout.look_at.y(), 0.0);
  for (int i = 0; i < layout.count; ++i) {
    const double theta = 2.0 * M_PI * i / layout.count;
    CameraConfig cam;
    cam.view_id = i;
    cam.theta = theta;
    const Vec3 eye = ring_center + Vec3(layout.radius * std::cos(theta),
                                        layout.radius * std::sin(theta),
                                        layout.height);
    const Vec3 forward = (layout.look_at - eye).normalized();
    const Vec3 right = forward.cross(Vec3(0, 0, 1)).normalized();
    const Vec3 down = forward.cross(right);
    cam.rotation.row(0) = right;
    cam.rotation.row(1) = down;
    cam.rotation.row(2) = forward;
    cam.translation = -cam.rotation * eye;
    cam.fx = cam.fy = layout.focal;
    cam.cx = layout.width / 2.0;
    cam.cy = layout.height_px / 2.0;
    cam.width = layout.width;
    cam.height = layout.height_px;
    cam.validate();
    cams.push_back(cam);
  }
  return cams;
}

std::string cameras_to_json(const std::vector<CameraConfig>& cams) {
  nlohmann::json doc = nlohmann::json::array();
  for (const auto& c : cams) {
    nlohmann::json j;
    j["view_id"] = c.view_id;
    j["theta"] = c.theta;
    j["rotation"] = std::vector<double>(c.rotation.data(),
                                        c.rotation.data() + 9); // column-major
    j["translation"] = std::vector<double>{c.translation.x(),
                                           c.translation.y(),
                                           c.translation.z()};
    j["focal"] = std::vector<double>{c.fx, c.fy};
    j["principal"] = std::vector<double>{c.cx, c.cy};
    j["image_size"] = std::vector<int>{c.width, c.height};
    doc.push_back(std::move(j));
  }
  return doc.dump(2);
}

std::vector<CameraConfig> cameras_from_json(const std::string& text) {
  const auto doc = nlohmann::json::parse(text);
  std::vector<CameraConfig> cams;
  for (const auto& j : doc) {
    CameraConfig c;
    c.view_id = j.at("view_id").get<int>();
    c.theta = j.at("theta").get<double>();
    const auto rot = j.at("rotation").get<std::vector<double>>();
    if (rot.size() != 9)
      throw std::invalid_argument("camera json: rotation needs 9 entries");
    c.rotation = Eigen::Map<const Mat3>(rot.data());
    const auto tr = j.at("translation").get<std::vector<double>>();
    c.translation = Vec3(tr.at(0), tr.at(1), tr.at(2));
    const auto f = j.at("focal").get<std::vector<double>>();
    c.fx = f.at(0);
    c.fy = f.at(1);
    const auto pp = j.at("principal").get<std::vector<double>>();
    c.cx = pp.at(0);
    c.cy = pp.at(1);
    const auto sz = j.at("image_size").get<std::vector<int>>();
    c.width = sz.at(0);
    c.height = sz.at(1);
    c.validate();
    cams.push_back(c);
  }
  return cams;
}

} // namespace semcom
