#include "semcom/triangulate.hpp"

#include <cmath>
#include <stdexcept>

namespace semcom::scene {

TriangulatedPoint triangulate_rays(const std::vector<Ray>& rays) {
  TriangulatedPoint result;
  if (rays.size() < 2) {
    result.status = PointStatus::too_few_views;
    return result;
  }
  // x* = argmin sum_i || (I - d_i d_i^T)(x - o_i) ||^2
  Mat3 a = Mat3::Zero();
  Vec3 b = Vec3::Zero();
  for (const Ray& ray : rays) {
    const Mat3 proj = Mat3::Identity() - ray.direction * ray.direction.transpose();
    a += proj;
    b += proj * ray.origin;
  }
  // all-parallel rays leave a rank-2 system
  if (std::abs(a.determinant()) < 1e-12) {
    result.status = PointStatus::singular;
    return result;
  }
  result.position = a.ldlt().solve(b);
  double sq = 0.0;
  for (const Ray& ray : rays) {
    const Vec3 diff = result.position - ray.origin;
    sq += (diff - ray.direction * ray.direction.dot(diff)).squaredNorm();
  }
  result.residual = std::sqrt(sq / double(rays.size()));
  result.status = PointStatus::ok;
  return result;
}

ReconstructedObjects triangulate(const std::vector<KeypointFrame>& frames,
                                 const std::vector<CameraConfig>& cameras) {
  if (frames.size() != cameras.size())
    throw std::invalid_argument("triangulate: frame/camera count mismatch");
  if (frames.size() < 2)
    throw std::invalid_argument("triangulate needs at least two views");
  ReconstructedObjects out;
  std::vector<Ray> rays;
  rays.reserve(frames.size());
  for (int k = 0; k < kKeypointCount; ++k) {
    rays.clear();
    for (std::size_t v = 0; v < frames.size(); ++v) {
      if (!frames[v].validity[k]) continue;
      if (frames[v].view_id != cameras[v].view_id)
        throw std::invalid_argument("triangulate: view ids do not match");
      rays.push_back(back_project(cameras[v], frames[v].keypoints[k]));
    }
    const TriangulatedPoint point = triangulate_rays(rays);
    out.points[k] = point.position;
    out.status[k] = point.status;
    out.residual[k] = point.residual;
  }
  return out;
}

TrackTriangulation triangulate_tracks(
    const std::vector<std::vector<Vec2>>& tracks_per_view,
    const std::vector<CameraConfig>& cameras) {
  if (tracks_per_view.size() != cameras.size())
    throw std::invalid_argument("triangulate_tracks: view count mismatch");
  if (tracks_per_view.empty())
    throw std::invalid_argument("triangulate_tracks: no views");
  const std::size_t n_tracks = tracks_per_view.front().size();
  for (const auto& view : tracks_per_view)
    if (view.size() != n_tracks)
      throw std::invalid_argument("triangulate_tracks: ragged track lists");

  TrackTriangulation out;
  out.points.resize(n_tracks);
  out.status.resize(n_tracks);
  std::vector<Ray> rays(cameras.size());
  for (std::size_t k = 0; k < n_tracks; ++k) {
    for (std::size_t v = 0; v < cameras.size(); ++v)
      rays[v] = back_project(cameras[v], tracks_per_view[v][k]);
    const TriangulatedPoint point = triangulate_rays(rays);
    out.points[k] = point.position;
    out.status[k] = point.status;
  }
  return out;
}

} // namespace semcom::scene
