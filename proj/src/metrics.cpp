#include "semcom/metrics.hpp"

#include "semcom/kd_tree.hpp"

#include <cmath>
#include <stdexcept>

namespace semcom::metrics {
namespace {

double dist_sq(const Vec3& a, const Vec3& b) {
  const double dx = a.x() - b.x();
  const double dy = a.y() - b.y();
  const double dz = a.z() - b.z();
  return dx * dx + dy * dy + dz * dz;
}

/// Mean over `from` of the squared distance to the nearest point of `to`.
double directed_mean_sq(const std::vector<Vec3>& from,
                        const std::vector<Vec3>& to) {
  double acc = 0.0;
  if (to.size() > kExhaustiveLimit) {
    KdTree3 tree(to);
    for (const Vec3& a : from) acc += tree.nearest_sq(a);
  } else {
    for (const Vec3& a : from) {
      double best = std::numeric_limits<double>::infinity();
      for (const Vec3& b : to) best = std::min(best, dist_sq(a, b));
      acc += best;
    }
  }
  return acc / double(from.size());
}

void check_nonempty(const PointCloud& pt, const PointCloud& pr) {
  if (pt.points.empty() || pr.points.empty())
    throw std::invalid_argument("point cloud metrics need nonempty clouds");
}

} // namespace

double kpe(const std::vector<Vec2>& sent, const std::vector<Vec2>& received) {
  if (sent.empty() || sent.size() != received.size())
    throw std::invalid_argument("kpe needs equal nonempty keypoint lists");
  double acc = 0.0;
  for (std::size_t i = 0; i < sent.size(); ++i)
    acc += (sent[i] - received[i]).norm();
  return acc / double(sent.size());
}

double kpe3(const std::vector<Vec3>& sent, const std::vector<Vec3>& received) {
  if (sent.empty() || sent.size() != received.size())
    throw std::invalid_argument("kpe3 needs equal nonempty keypoint lists");
  double acc = 0.0;
  for (std::size_t i = 0; i < sent.size(); ++i)
    acc += (sent[i] - received[i]).norm();
  return acc / double(sent.size());
}

double chamfer_modified(const PointCloud& pt, const PointCloud& pr) {
  check_nonempty(pt, pr);
  return directed_mean_sq(pt.points, pr.points) +
         directed_mean_sq(pr.points, pt.points);
}

double p2point(const PointCloud& pt, const PointCloud& pr) {
  check_nonempty(pt, pr);
  const double forward = std::sqrt(directed_mean_sq(pt.points, pr.points));
  const double backward = std::sqrt(directed_mean_sq(pr.points, pt.points));
  return std::max(forward, backward);
}

LatencyLedger latency_breakdown(double t_semantic, double t_wireless,
                                double t_ot, double t_generation) {
  if (t_semantic < 0.0 || t_wireless < 0.0 || t_ot < 0.0 || t_generation < 0.0)
    throw std::invalid_argument("latency components must be nonnegative");
  LatencyLedger ledger;
  ledger.t_semantic = t_semantic;
  ledger.t_wireless = t_wireless;
  ledger.t_ot = t_ot;
  ledger.t_generation = t_generation;
  ledger.total = t_semantic + t_wireless + t_ot + t_generation;
  return ledger;
}

} // namespace semcom::metrics
