#include "semcom/camera.hpp"

#include "semcom/triangulate.hpp"

#include <doctest.h>

#include <cmath>

using namespace semcom;

namespace {

CameraConfig axis_camera(double fx, double fy, double cx, double cy) {
  CameraConfig cam;
  cam.rotation = Mat3::Identity();
  cam.translation = Vec3::Zero();
  cam.fx = fx;
  cam.fy = fy;
  cam.cx = cx;
  cam.cy = cy;
  cam.width = 1200;
  cam.height = 600;
  return cam;
}

} // namespace

TEST_CASE("points on the optical axis hit the principal point") {
  const CameraConfig cam = axis_camera(500, 500, 600, 300);
  const Vec2 uv = project_point(cam, Vec3(0, 0, 3.7));
  CHECK(uv.x() == doctest::Approx(600.0));
  CHECK(uv.y() == doctest::Approx(300.0));
}

TEST_CASE("unit-slope projection") {
  const CameraConfig cam = axis_camera(100, 100, 0, 0);
  const Vec2 uv = project_point(cam, Vec3(1, 1, 1));
  CHECK(uv.x() == doctest::Approx(100.0));
  CHECK(uv.y() == doctest::Approx(100.0));
}

TEST_CASE("points behind the camera are rejected") {
  const CameraConfig cam = axis_camera(500, 500, 600, 300);
  CHECK_THROWS_AS(project_point(cam, Vec3(0, 0, -1.0)), ProjectionError);
  CHECK_THROWS_AS(project_point(cam, Vec3(0.5, 0.5, 0.0)), ProjectionError);
}

TEST_CASE("ring cameras are orthonormal and validated at load") {
  const auto cams = build_camera_ring();
  CHECK(cams.size() == 36);
  for (const auto& cam : cams) {
    CHECK(cam.orthonormality_error() < 1e-9);
    CHECK(cam.fx > 0);
    CHECK(cam.cx >= 0);
    CHECK(cam.cx < cam.width);
  }
  // evenly spaced azimuths
  CHECK(cams[1].theta - cams[0].theta ==
        doctest::Approx(2.0 * M_PI / 36).epsilon(1e-12));
}

TEST_CASE("project then back-project recovers the point at known depth") {
  const auto cams = build_camera_ring();
  const Vec3 p(1.3, 2.7, 0.9);
  for (const auto& cam : cams) {
    const Vec2 uv = project_point(cam, p);
    const Ray ray = back_project(cam, uv);
    // intersect the ray at the known depth along the viewing direction
    const double depth = (p - ray.origin).dot(ray.direction);
    const Vec3 recovered = ray.origin + depth * ray.direction;
    CHECK((recovered - p).norm() < 1e-9);
  }
}

TEST_CASE("two orthogonal views triangulate exactly") {
  const auto cams = build_camera_ring();
  const Vec3 p(1, 1, 1);
  const std::vector<Ray> rays{back_project(cams[0], project_point(cams[0], p)),
                              back_project(cams[9], project_point(cams[9], p))};
  const auto tri = scene::triangulate_rays(rays);
  CHECK(tri.status == scene::PointStatus::ok);
  CHECK((tri.position - p).norm() < 1e-6);
}

TEST_CASE("parallel rays are singular, single rays underdetermined") {
  Ray a{Vec3(0, 0, 0), Vec3(0, 0, 1)};
  Ray b{Vec3(1, 0, 0), Vec3(0, 0, 1)};
  CHECK(scene::triangulate_rays({a, b}).status == scene::PointStatus::singular);
  CHECK(scene::triangulate_rays({a}).status ==
        scene::PointStatus::too_few_views);
}

TEST_CASE("camera json round trip") {
  const auto cams = build_camera_ring();
  const std::string text = cameras_to_json(cams);
  const auto loaded = cameras_from_json(text);
  REQUIRE(loaded.size() == cams.size());
  for (std::size_t i = 0; i < cams.size(); ++i) {
    CHECK((loaded[i].rotation - cams[i].rotation).cwiseAbs().maxCoeff() <
          1e-12);
    CHECK((loaded[i].translation - cams[i].translation).norm() < 1e-12);
    CHECK(loaded[i].fx == cams[i].fx);
    CHECK(loaded[i].width == cams[i].width);
  }

  // a sheared rotation must be rejected at load
  auto bad = cams;
  bad[3].rotation(0, 1) += 1e-3;
  CHECK_THROWS_AS(cameras_from_json(cameras_to_json(bad)),
                  std::invalid_argument);
}
