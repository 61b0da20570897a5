#include "semcom/scene.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace semcom::scene {
namespace {

constexpr double kDegToRad = M_PI / 180.0;

bool in_range(const Vec3& p) {
  for (int k = 0; k < 3; ++k)
    if (p[k] < kRangeMin || p[k] > kRangeMax) return false;
  return true;
}

double wrap_coordinate(double start, double speed, double t, double lo,
                       double hi) {
  const double span = hi - lo;
  double x = std::fmod(start - lo + speed * t, span);
  if (x < 0.0) x += span;
  return lo + x;
}

struct Surface {
  Vec3 origin;   // corner
  Vec3 edge_u;   // first edge
  Vec3 edge_v;   // second edge
  double area() const { return edge_u.cross(edge_v).norm(); }
};

// Static factory furniture: floor, conveyor slab, two pillars.
std::vector<Surface> static_surfaces() {
  std::vector<Surface> s;
  auto slab = [&s](Vec3 lo, Vec3 hi) {
    const Vec3 d = hi - lo;
    // top
    s.push_back({{lo.x(), lo.y(), hi.z()}, {d.x(), 0, 0}, {0, d.y(), 0}});
    // four sides
    s.push_back({lo, {d.x(), 0, 0}, {0, 0, d.z()}});
    s.push_back({{lo.x(), hi.y(), lo.z()}, {d.x(), 0, 0}, {0, 0, d.z()}});
    s.push_back({lo, {0, d.y(), 0}, {0, 0, d.z()}});
    s.push_back({{hi.x(), lo.y(), lo.z()}, {0, d.y(), 0}, {0, 0, d.z()}});
  };
  // floor
  s.push_back({{0.2, 0.2, 0.0}, {3.6, 0, 0}, {0, 3.6, 0}});
  // conveyor
  slab({0.4, 0.7, 0.0}, {3.6, 1.3, 0.24});
  // pillars
  slab({0.5, 3.2, 0.0}, {0.8, 3.5, 2.2});
  slab({3.2, 3.2, 0.0}, {3.5, 3.5, 2.2});
  return s;
}

std::vector<Vec3> sample_static_cloud(int count, std::uint64_t seed) {
  const auto surfaces = static_surfaces();
  double total = 0.0;
  for (const auto& f : surfaces) total += f.area();
  Rng rng = Rng(seed).substream(0x57A71Cull);
  std::vector<Vec3> pts;
  pts.reserve(count);
  for (int i = 0; i < count; ++i) {
    double pick = rng.uniform01() * total;
    const Surface* face = &surfaces.back();
    for (const auto& f : surfaces) {
      pick -= f.area();
      if (pick <= 0.0) {
        face = &f;
        break;
      }
    }
    pts.push_back(face->origin + rng.uniform01() * face->edge_u +
                  rng.uniform01() * face->edge_v);
  }
  return pts;
}

std::array<Vec3, kArmJointCount> arm_joints_at(const ArmMotion& arm,
                                               double t) {
  std::array<Vec3, kArmJointCount> joints;
  joints[0] = arm.base;
  double yaw = arm.rest_azimuth_deg * kDegToRad;
  if (arm.yaw_period_frames > 0.0)
    yaw += arm.yaw_amplitude_deg * kDegToRad *
           std::sin(2.0 * M_PI * t / arm.yaw_period_frames);
  for (int b = 0; b < kArmJointCount - 1; ++b) {
    double elev = arm.rest_elevation_deg[b] * kDegToRad;
    if (arm.swing_period_frames[b] > 0.0)
      elev += arm.swing_amplitude_deg[b] * kDegToRad *
              std::sin(2.0 * M_PI * t / arm.swing_period_frames[b] + 0.7 * b);
    const Vec3 dir(std::cos(elev) * std::cos(yaw),
                   std::cos(elev) * std::sin(yaw), std::sin(elev));
    joints[b + 1] = joints[b] + arm.bone_lengths[b] * dir;
  }
  return joints;
}

void append_segment_samples(PointCloud& cloud, const Vec3& a, const Vec3& b,
                            int count, const std::array<double, 3>& color) {
  for (int k = 0; k < count; ++k) {
    const double s = (k + 0.5) / count;
    cloud.points.push_back(a + s * (b - a));
    cloud.colors.push_back(color);
  }
}

void append_cuboid_samples(PointCloud& cloud, const Vec3& center,
                           const Vec3& half, int count,
                           const std::array<double, 3>& color) {
  // Six faces sampled on regular grids, allocation proportional to area.
  struct Face {
    int axis;
    double sign;
  };
  const Face faces[6] = {{0, -1}, {0, 1}, {1, -1}, {1, 1}, {2, -1}, {2, 1}};
  double total_area = 0.0;
  double areas[6];
  for (int f = 0; f < 6; ++f) {
    const int u = (faces[f].axis + 1) % 3, v = (faces[f].axis + 2) % 3;
    areas[f] = 4.0 * half[u] * half[v];
    total_area += areas[f];
  }
  for (int f = 0; f < 6; ++f) {
    const int axis = faces[f].axis;
    const int u = (axis + 1) % 3, v = (axis + 2) % 3;
    const int n_face = std::max(1, int(std::lround(count * areas[f] / total_area)));
    const double aspect = half[u] / half[v];
    int nu = std::max(1, int(std::lround(std::sqrt(n_face * aspect))));
    int nv = std::max(1, (n_face + nu - 1) / nu);
    for (int i = 0; i < nu; ++i) {
      for (int j = 0; j < nv; ++j) {
        Vec3 p = center;
        p[axis] += faces[f].sign * half[axis];
        p[u] += (-1.0 + 2.0 * (i + 0.5) / nu) * half[u];
        p[v] += (-1.0 + 2.0 * (j + 0.5) / nv) * half[v];
        cloud.points.push_back(p);
        cloud.colors.push_back(color);
      }
    }
  }
}

constexpr std::array<double, 3> kArmColor{0.80, 0.25, 0.20};
constexpr std::array<double, 3> kBoxColor{0.20, 0.35, 0.80};
constexpr std::array<double, 3> kStaticColor{0.55, 0.55, 0.55};

} // namespace

MotionParams MotionParams::frozen() {
  MotionParams p;
  p.arm.swing_amplitude_deg = {0, 0, 0, 0, 0, 0};
  p.arm.yaw_amplitude_deg = 0.0;
  for (auto& box : p.boxes) box.speed = 0.0;
  return p;
}

void MotionParams::validate() const {
  for (const auto& box : boxes) {
    if (box.axis < 0 || box.axis > 2)
      throw ConfigError("box axis must be 0, 1, or 2");
    if (box.travel_max <= box.travel_min)
      throw ConfigError("box travel range is empty");
    Vec3 lo = box.start - box.half_extent;
    Vec3 hi = box.start + box.half_extent;
    lo[box.axis] = box.travel_min - box.half_extent[box.axis];
    hi[box.axis] = box.travel_max + box.half_extent[box.axis];
    if (!in_range(lo) || !in_range(hi))
      throw ConfigError("box trajectory leaves the geometry range");
    if (box.start[box.axis] < box.travel_min ||
        box.start[box.axis] > box.travel_max)
      throw ConfigError("box start is outside its travel range");
  }
  if (static_cloud_size < 1)
    throw ConfigError("static cloud needs at least one point");
  // The arm is validated per frame: generate_scene rejects any pose whose
  // joints leave the range.
}

std::array<Vec3, kKeypointCount> SceneState::object_keypoints() const {
  std::array<Vec3, kKeypointCount> out;
  for (int i = 0; i < kArmJointCount; ++i) out[i] = arm_keypoints[i];
  for (int i = 0; i < kBoxCount; ++i) out[kArmJointCount + i] = box_centers[i];
  return out;
}

SceneState generate_scene(int t, const MotionParams& params) {
  if (t < 0) throw ConfigError("frame index must be nonnegative");
  params.validate();
  SceneState s;
  s.time = t;
  s.arm_keypoints = arm_joints_at(params.arm, double(t));
  for (const auto& joint : s.arm_keypoints)
    if (!in_range(joint))
      throw ConfigError("arm pose leaves the geometry range at frame " +
                        std::to_string(t));
  for (int b = 0; b < kBoxCount; ++b) {
    const auto& box = params.boxes[b];
    Vec3 c = box.start;
    c[box.axis] = wrap_coordinate(box.start[box.axis], box.speed, double(t),
                                  box.travel_min, box.travel_max);
    s.box_centers[b] = c;
  }
  s.static_cloud = sample_static_cloud(params.static_cloud_size,
                                       params.static_seed);
  return s;
}

KeypointFrame render_keypoint_frame(const SceneState& scene,
                                    const CameraConfig& camera,
                                    double extraction_sigma, Rng& rng) {
  if (extraction_sigma < 0.0)
    throw std::invalid_argument("extraction sigma must be >= 0");
  KeypointFrame frame;
  frame.view_id = camera.view_id;
  frame.theta = camera.theta;
  const auto objects = scene.object_keypoints();
  for (int i = 0; i < kKeypointCount; ++i) {
    try {
      Vec2 px = project_point(camera, objects[i]);
      if (extraction_sigma > 0.0) {
        px.x() += extraction_sigma * rng.gaussian();
        px.y() += extraction_sigma * rng.gaussian();
      }
      frame.keypoints[i] = px;
      frame.validity[i] = true;
    } catch (const ProjectionError&) {
      frame.keypoints[i] = Vec2::Zero();
      frame.validity[i] = false;
    }
  }
  return frame;
}

KnowledgeBase build_knowledge_base(const MotionParams& params,
                                   const std::vector<CameraConfig>& cameras) {
  KnowledgeBase kb;
  const SceneState t0 = generate_scene(0, params);
  kb.static_cloud = t0.static_cloud;
  kb.cameras = cameras;
  kb.object_anchors = t0.object_keypoints();
  return kb;
}

std::int64_t knowledge_base_bits(const KnowledgeBase& kb) {
  const std::int64_t per_camera = 20; // R(9) t(3) f(2) c(2) size(2) theta id
  return 32 * (std::int64_t(kb.static_cloud.size()) * 3 +
               std::int64_t(kb.cameras.size()) * per_camera +
               kKeypointCount * 3);
}

const char* framework_name(Framework fw) {
  switch (fw) {
    case Framework::imagecom: return "imagecom";
    case Framework::gscs: return "gscs";
    case Framework::gscm: return "gscm";
    case Framework::gscs_ot: return "gscs_ot";
    case Framework::gscm_ot: return "gscm_ot";
  }
  return "unknown";
}

std::optional<Framework> framework_from_name(std::string_view name) {
  for (Framework fw : {Framework::imagecom, Framework::gscs, Framework::gscm,
                       Framework::gscs_ot, Framework::gscm_ot})
    if (name == framework_name(fw)) return fw;
  return std::nullopt;
}

bool framework_uses_ot(Framework fw) {
  return fw == Framework::gscs_ot || fw == Framework::gscm_ot;
}

bool framework_is_gsc(Framework fw) { return fw != Framework::imagecom; }

PointCloud render_object_templates(
    const std::array<Vec3, kKeypointCount>& anchors,
    const std::array<bool, kKeypointCount>& valid,
    const std::array<BoxMotion, kBoxCount>& boxes, int samples_per_object) {
  PointCloud cloud;
  // Arm: distribute samples over the 6 links, proportional to length.
  double total_len = 0.0;
  std::array<double, kArmJointCount - 1> lens{};
  std::array<bool, kArmJointCount - 1> link_ok{};
  for (int b = 0; b < kArmJointCount - 1; ++b) {
    link_ok[b] = valid[b] && valid[b + 1];
    lens[b] = link_ok[b] ? (anchors[b + 1] - anchors[b]).norm() : 0.0;
    total_len += lens[b];
  }
  if (total_len > 0.0) {
    for (int b = 0; b < kArmJointCount - 1; ++b) {
      if (!link_ok[b]) continue;
      const int n = std::max(
          1, int(std::lround(samples_per_object * lens[b] / total_len)));
      append_segment_samples(cloud, anchors[b], anchors[b + 1], n, kArmColor);
    }
  }
  for (int b = 0; b < kBoxCount; ++b) {
    const int idx = kArmJointCount + b;
    if (!valid[idx]) continue;
    append_cuboid_samples(cloud, anchors[idx], boxes[b].half_extent,
                          samples_per_object, kBoxColor);
  }
  return cloud;
}

PointCloud build_point_cloud(const ReconstructedObjects& objects,
                             const KnowledgeBase* kb, Framework fw,
                             const MotionParams& params,
                             int samples_per_object,
                             const PointCloud* dense_samples) {
  if (fw == Framework::imagecom) {
    if (dense_samples == nullptr)
      throw ConfigError("dense baseline needs transmitted dense samples");
    return *dense_samples;
  }
  if (kb == nullptr)
    throw ConfigError("GSC composition requires the knowledge base");

  std::array<bool, kKeypointCount> valid{};
  for (int i = 0; i < kKeypointCount; ++i) valid[i] = objects.valid(i);
  PointCloud movable = render_object_templates(objects.points, valid,
                                               params.boxes,
                                               samples_per_object);
  PointCloud statics;
  statics.points = kb->static_cloud;
  statics.colors.assign(statics.points.size(), kStaticColor);

  PointCloud out;
  if (fw == Framework::gscm) {
    // per-object composition, then the static scene
    out.append(movable);
    out.append(statics);
  } else {
    // joint scene composition
    out.append(statics);
    out.append(movable);
  }
  return out;
}

PointCloud ground_truth_cloud(const SceneState& scene,
                              const MotionParams& params,
                              int samples_per_object) {
  std::array<bool, kKeypointCount> all_valid;
  all_valid.fill(true);
  PointCloud out;
  out.points = scene.static_cloud;
  out.colors.assign(out.points.size(), kStaticColor);
  out.append(render_object_templates(scene.object_keypoints(), all_valid,
                                     params.boxes, samples_per_object));
  return out;
}

std::string motion_to_json(const MotionParams& p) {
  nlohmann::json j;
  nlohmann::json arm;
  arm["base"] = {p.arm.base.x(), p.arm.base.y(), p.arm.base.z()};
  arm["bone_lengths"] = p.arm.bone_lengths;
  arm["rest_elevation_deg"] = p.arm.rest_elevation_deg;
  arm["rest_azimuth_deg"] = p.arm.rest_azimuth_deg;
  arm["swing_amplitude_deg"] = p.arm.swing_amplitude_deg;
  arm["swing_period_frames"] = p.arm.swing_period_frames;
  arm["yaw_amplitude_deg"] = p.arm.yaw_amplitude_deg;
  arm["yaw_period_frames"] = p.arm.yaw_period_frames;
  j["arm"] = arm;
  j["boxes"] = nlohmann::json::array();
  for (const auto& b : p.boxes) {
    nlohmann::json bj;
    bj["start"] = {b.start.x(), b.start.y(), b.start.z()};
    bj["axis"] = b.axis;
    bj["speed"] = b.speed;
    bj["travel_min"] = b.travel_min;
    bj["travel_max"] = b.travel_max;
    bj["half_extent"] = {b.half_extent.x(), b.half_extent.y(),
                         b.half_extent.z()};
    j["boxes"].push_back(bj);
  }
  j["static_cloud_size"] = p.static_cloud_size;
  j["static_seed"] = p.static_seed;
  return j.dump(2);
}

MotionParams motion_from_json(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  MotionParams p;
  if (j.contains("arm")) {
    const auto& a = j["arm"];
    if (a.contains("base")) {
      auto v = a["base"].get<std::vector<double>>();
      p.arm.base = Vec3(v.at(0), v.at(1), v.at(2));
    }
    auto get_arr6 = [&a](const char* key, std::array<double, 6>& out) {
      if (!a.contains(key)) return;
      auto v = a[key].get<std::vector<double>>();
      if (v.size() != 6)
        throw ConfigError(std::string("motion json: ") + key +
                          " needs 6 entries");
      std::copy(v.begin(), v.end(), out.begin());
    };
    get_arr6("bone_lengths", p.arm.bone_lengths);
    get_arr6("rest_elevation_deg", p.arm.rest_elevation_deg);
    get_arr6("swing_amplitude_deg", p.arm.swing_amplitude_deg);
    get_arr6("swing_period_frames", p.arm.swing_period_frames);
    if (a.contains("rest_azimuth_deg"))
      p.arm.rest_azimuth_deg = a["rest_azimuth_deg"].get<double>();
    if (a.contains("yaw_amplitude_deg"))
      p.arm.yaw_amplitude_deg = a["yaw_amplitude_deg"].get<double>();
    if (a.contains("yaw_period_frames"))
      p.arm.yaw_period_frames = a["yaw_period_frames"].get<double>();
  }
  if (j.contains("boxes")) {
    const auto& boxes = j["boxes"];
    if (boxes.size() != kBoxCount)
      throw ConfigError("motion json: expected " +
                        std::to_string(kBoxCount) + " boxes");
    for (int i = 0; i < kBoxCount; ++i) {
      const auto& bj = boxes[i];
      BoxMotion b = p.boxes[i];
      if (bj.contains("start")) {
        auto v = bj["start"].get<std::vector<double>>();
        b.start = Vec3(v.at(0), v.at(1), v.at(2));
      }
      if (bj.contains("axis")) b.axis = bj["axis"].get<int>();
      if (bj.contains("speed")) b.speed = bj["speed"].get<double>();
      if (bj.contains("travel_min")) b.travel_min = bj["travel_min"].get<double>();
      if (bj.contains("travel_max")) b.travel_max = bj["travel_max"].get<double>();
      if (bj.contains("half_extent")) {
        auto v = bj["half_extent"].get<std::vector<double>>();
        b.half_extent = Vec3(v.at(0), v.at(1), v.at(2));
      }
      p.boxes[i] = b;
    }
  }
  if (j.contains("static_cloud_size"))
    p.static_cloud_size = j["static_cloud_size"].get<int>();
  if (j.contains("static_seed"))
    p.static_seed = j["static_seed"].get<std::uint64_t>();
  p.validate();
  return p;
}

} // namespace semcom::scene
