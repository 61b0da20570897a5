#pragma once

#include "semcom/camera.hpp"

#include <array>
#include <iosfwd>
#include <string>
#include <vector>

namespace semcom {

struct PointCloud {
  std::vector<Vec3> points;
  std::vector<std::array<double, 3>> colors; // empty or same size, RGB in [0,1]

  std::size_t size() const { return points.size(); }
  bool has_colors() const { return !colors.empty(); }
  void append(const PointCloud& other);
};

/// ASCII PLY ("element vertex N", properties x y z [red green blue]).
void write_ply(std::ostream& out, const PointCloud& cloud);
void write_ply_file(const std::string& path, const PointCloud& cloud);
PointCloud read_ply(std::istream& in);
PointCloud read_ply_file(const std::string& path);

} // namespace semcom
