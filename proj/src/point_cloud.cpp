#include "semcom/point_cloud.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace semcom {

void PointCloud::append(const PointCloud& other) {
  const bool want_colors = has_colors() || other.has_colors();
  if (want_colors && !has_colors())
    colors.assign(points.size(), {0.5, 0.5, 0.5});
  points.insert(points.end(), other.points.begin(), other.points.end());
  if (want_colors) {
    if (other.has_colors())
      colors.insert(colors.end(), other.colors.begin(), other.colors.end());
    else
      colors.resize(points.size(), {0.5, 0.5, 0.5});
  }
}

void write_ply(std::ostream& out, const PointCloud& cloud) {
  out << "ply\nformat ascii 1.0\n";
  out << "element vertex " << cloud.size() << "\n";
  out << "property double x\nproperty double y\nproperty double z\n";
  if (cloud.has_colors())
    out << "property uchar red\nproperty uchar green\nproperty uchar blue\n";
  out << "end_header\n";
  char line[128];
  for (std::size_t i = 0; i < cloud.size(); ++i) {
    const Vec3& p = cloud.points[i];
    if (cloud.has_colors()) {
      const auto& c = cloud.colors[i];
      std::snprintf(line, sizeof line, "%.9g %.9g %.9g %d %d %d\n", p.x(),
                    p.y(), p.z(), int(std::lround(c[0] * 255.0)),
                    int(std::lround(c[1] * 255.0)),
                    int(std::lround(c[2] * 255.0)));
    } else {
      std::snprintf(line, sizeof line, "%.9g %.9g %.9g\n", p.x(), p.y(),
                    p.z());
    }
    out << line;
  }
}

void write_ply_file(const std::string& path, const PointCloud& cloud) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot open for writing: " + path);
  write_ply(out, cloud);
}

PointCloud read_ply(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != "ply")
    throw std::runtime_error("ply: missing magic");
  std::size_t n_vertices = 0;
  bool ascii = false;
  std::vector<std::string> props;
  while (std::getline(in, line)) {
    std::istringstream ls(line);
    std::string word;
    ls >> word;
    if (word == "format") {
      std::string fmt;
      ls >> fmt;
      ascii = fmt == "ascii";
    } else if (word == "element") {
      std::string what;
      ls >> what >> n_vertices;
      if (what != "vertex")
        throw std::runtime_error("ply: only vertex elements supported");
    } else if (word == "property") {
      std::string type, name;
      ls >> type >> name;
      props.push_back(name);
    } else if (word == "end_header") {
      break;
    }
  }
  if (!ascii) throw std::runtime_error("ply: only ascii supported");
  const bool rgb = props.size() >= 6;
  if (props.size() < 3 || props[0] != "x" || props[1] != "y" || props[2] != "z")
    throw std::runtime_error("ply: expected x y z properties first");

  PointCloud cloud;
  cloud.points.reserve(n_vertices);
  if (rgb) cloud.colors.reserve(n_vertices);
  for (std::size_t i = 0; i < n_vertices; ++i) {
    if (!std::getline(in, line))
      throw std::runtime_error("ply: truncated vertex list");
    std::istringstream ls(line);
    double x, y, z;
    if (!(ls >> x >> y >> z))
      throw std::runtime_error("ply: malformed vertex at line " +
                               std::to_string(i));
    cloud.points.emplace_back(x, y, z);
    if (rgb) {
      double r, g, b;
      if (!(ls >> r >> g >> b))
        throw std::runtime_error("ply: malformed color at line " +
                                 std::to_string(i));
      cloud.colors.push_back({r / 255.0, g / 255.0, b / 255.0});
    }
  }
  return cloud;
}

PointCloud read_ply_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open: " + path);
  return read_ply(in);
}

} // namespace semcom
