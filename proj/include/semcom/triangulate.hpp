#pragma once

#include "semcom/camera.hpp"
#include "semcom/scene.hpp"

#include <optional>
#include <vector>

namespace semcom::scene {

struct TriangulatedPoint {
  Vec3 position = Vec3::Zero();
  PointStatus status = PointStatus::too_few_views;
  double residual = 0.0; // rms perpendicular ray distance, meters
};

/// Least-squares intersection of back-projected rays: minimizes the summed
/// squared perpendicular distance to all rays. Needs at least two
/// non-parallel rays.
TriangulatedPoint triangulate_rays(const std::vector<Ray>& rays);

/// Triangulate the 9 object keypoints from per-view frames. Views whose
/// validity bit is off for an index are skipped; an index seen by fewer than
/// two views is marked invalid without failing the call.
ReconstructedObjects triangulate(const std::vector<KeypointFrame>& frames,
                                 const std::vector<CameraConfig>& cameras);

/// Generic track triangulation used by the dense baseline: tracks[v][k] is
/// the pixel of track k in view v.
struct TrackTriangulation {
  std::vector<Vec3> points;
  std::vector<PointStatus> status;
};
TrackTriangulation triangulate_tracks(
    const std::vector<std::vector<Vec2>>& tracks_per_view,
    const std::vector<CameraConfig>& cameras);

} // namespace semcom::scene
