#include "semcom/metrics.hpp"

#include "semcom/kd_tree.hpp"
#include "semcom/rng.hpp"

#include <doctest.h>

#include <cmath>

using namespace semcom;
using namespace semcom::metrics;

namespace {

PointCloud random_cloud(Rng& rng, int n, double extent = 2.0) {
  PointCloud c;
  for (int i = 0; i < n; ++i)
    c.points.emplace_back(extent * rng.uniform01(), extent * rng.uniform01(),
                          extent * rng.uniform01());
  return c;
}

/// Independent double-loop oracle.
double chamfer_brute(const PointCloud& a, const PointCloud& b) {
  auto directed = [](const PointCloud& from, const PointCloud& to) {
    double acc = 0.0;
    for (const auto& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to.points) {
        const double dx = p.x() - q.x(), dy = p.y() - q.y(),
                     dz = p.z() - q.z();
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      acc += best;
    }
    return acc / double(from.points.size());
  };
  return directed(a, b) + directed(b, a);
}

double p2point_brute(const PointCloud& a, const PointCloud& b) {
  auto directed = [](const PointCloud& from, const PointCloud& to) {
    double acc = 0.0;
    for (const auto& p : from.points) {
      double best = std::numeric_limits<double>::infinity();
      for (const auto& q : to.points) {
        const double dx = p.x() - q.x(), dy = p.y() - q.y(),
                     dz = p.z() - q.z();
        best = std::min(best, dx * dx + dy * dy + dz * dz);
      }
      acc += best;
    }
    return std::sqrt(acc / double(from.points.size()));
  };
  return std::max(directed(a, b), directed(b, a));
}

} // namespace

TEST_CASE("kpe basics") {
  CHECK(kpe({{1, 2}, {3, 4}}, {{1, 2}, {3, 4}}) == 0.0);
  CHECK(kpe({{0, 0}}, {{3, 4}}) == doctest::Approx(5.0));
  CHECK(kpe({{0, 0}, {1, 1}}, {{3, 4}, {1, 1}}) == doctest::Approx(2.5));
  CHECK_THROWS_AS(kpe({{0, 0}}, {{0, 0}, {1, 1}}), std::invalid_argument);
  CHECK(kpe3({{0, 0, 0}}, {{0, 3, 4}}) == doctest::Approx(5.0));
}

TEST_CASE("chamfer basics") {
  PointCloud a, b;
  a.points = {Vec3(0, 0, 0)};
  b.points = {Vec3(1, 0, 0)};
  CHECK(chamfer_modified(a, a) == 0.0);
  CHECK(chamfer_modified(a, b) == doctest::Approx(2.0)); // 1^2 + 1^2
  PointCloud empty;
  CHECK_THROWS_AS(chamfer_modified(a, empty), std::invalid_argument);
}

TEST_CASE("p2point basics") {
  PointCloud a, b;
  a.points = {Vec3(0, 0, 0)};
  b.points = {Vec3(0, 3, 4)};
  CHECK(p2point(a, a) == 0.0);
  CHECK(p2point(a, b) == doctest::Approx(5.0));
}

TEST_CASE("metrics equal the brute-force oracle on random clouds") {
  Rng rng(404);
  for (int trial = 0; trial < 25; ++trial) {
    const int na = 20 + int(rng.next_u64() % 60);
    const int nb = 20 + int(rng.next_u64() % 60);
    const PointCloud a = random_cloud(rng, na);
    const PointCloud b = random_cloud(rng, nb);
    CHECK(chamfer_modified(a, b) == chamfer_brute(a, b));
    CHECK(p2point(a, b) == p2point_brute(a, b));
  }
}

TEST_CASE("p2point is symmetric and translation invariant") {
  Rng rng(405);
  const PointCloud a = random_cloud(rng, 40);
  const PointCloud b = random_cloud(rng, 55);
  CHECK(p2point(a, b) == p2point(b, a));

  // dyadic shift keeps all distance arithmetic exact
  const Vec3 shift(0.5, -0.25, 2.0);
  PointCloud a2 = a, b2 = b;
  auto snap = [](PointCloud& c) {
    for (auto& p : c.points)
      p = Vec3(std::round(p.x() * 512) / 512, std::round(p.y() * 512) / 512,
               std::round(p.z() * 512) / 512);
  };
  snap(a2);
  snap(b2);
  const double before_c = chamfer_modified(a2, b2);
  const double before_p = p2point(a2, b2);
  for (auto& p : a2.points) p += shift;
  for (auto& p : b2.points) p += shift;
  CHECK(chamfer_modified(a2, b2) == before_c);
  CHECK(p2point(a2, b2) == before_p);
}

TEST_CASE("kd tree path is bit-compatible with exhaustive search") {
  Rng rng(406);
  // above the exhaustive limit the production path switches to the tree
  const PointCloud big = random_cloud(rng, 2500);
  const PointCloud probe = random_cloud(rng, 300);
  KdTree3 tree(big.points);
  for (const auto& p : probe.points) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& q : big.points) {
      const double dx = p.x() - q.x(), dy = p.y() - q.y(), dz = p.z() - q.z();
      best = std::min(best, dx * dx + dy * dy + dz * dz);
    }
    CHECK(tree.nearest_sq(p) == best);
  }
  // and the full metric agrees with brute force across the switch
  CHECK(chamfer_modified(probe, big) == chamfer_brute(probe, big));
}

TEST_CASE("latency ledger") {
  const LatencyLedger l = latency_breakdown(0.1, 0.2, 0.03, 1.0);
  CHECK(l.total == doctest::Approx(1.33).epsilon(1e-12));
  CHECK(l.total == l.t_semantic + l.t_wireless + l.t_ot + l.t_generation);

  const LatencyLedger z = latency_breakdown(0, 0, 0, 0);
  CHECK(z.total == 0.0);

  CHECK_THROWS_AS(latency_breakdown(-0.1, 0, 0, 0), std::invalid_argument);
}
