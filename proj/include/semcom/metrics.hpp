#pragma once

#include "semcom/point_cloud.hpp"

#include <cstdint>
#include <vector>

namespace semcom::metrics {

/// Mean Euclidean displacement between index-matched keypoint lists, pixels.
double kpe(const std::vector<Vec2>& sent, const std::vector<Vec2>& received);

/// 3D variant, applied after triangulation; meters.
double kpe3(const std::vector<Vec3>& sent, const std::vector<Vec3>& received);

/// Symmetric modified chamfer distance: sum of both directed mean squared
/// nearest-neighbor distances. Squared meters.
double chamfer_modified(const PointCloud& pt, const PointCloud& pr);

/// max of the two directed RMS nearest-neighbor distances, meters.
double p2point(const PointCloud& pt, const PointCloud& pr);

/// Exhaustive search below this size, k-d tree above.
constexpr std::size_t kExhaustiveLimit = 1000;

struct LatencyLedger {
  double t_semantic = 0.0;
  double t_wireless = 0.0;
  double t_ot = 0.0;
  double t_generation = 0.0;
  double total = 0.0; // always the exact sum of the four parts
};

LatencyLedger latency_breakdown(double t_semantic, double t_wireless,
                                double t_ot, double t_generation);

struct MetricsReport {
  double kpe_px = 0.0;
  double chamfer_m2 = 0.0;
  double p2point_m = 0.0;
  LatencyLedger latency;
  std::int64_t payload_bits = 0;
};

} // namespace semcom::metrics
