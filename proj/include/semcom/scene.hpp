#pragma once

#include "semcom/camera.hpp"
#include "semcom/point_cloud.hpp"
#include "semcom/rng.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>

namespace semcom::scene {

constexpr int kArmJointCount = 7;
constexpr int kBoxCount = 2;
constexpr int kKeypointCount = kArmJointCount + kBoxCount;

constexpr double kRangeMin = 0.0;
constexpr double kRangeMax = 4.0;

struct ConfigError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Articulated arm: 7 joints, 6 bones of fixed length. Joint angles swing
/// sinusoidally around a rest pose; the whole chain yaws about the base.
struct ArmMotion {
  Vec3 base{2.0, 2.6, 0.0};
  std::array<double, 6> bone_lengths{0.5, 0.45, 0.4, 0.35, 0.3, 0.25};
  std::array<double, 6> rest_elevation_deg{80, 60, 40, 20, -10, -30};
  double rest_azimuth_deg = -90.0; // toward the conveyor
  std::array<double, 6> swing_amplitude_deg{0, 6, 9, 12, 15, 18};
  std::array<double, 6> swing_period_frames{1, 120, 90, 75, 60, 50};
  double yaw_amplitude_deg = 30.0;
  double yaw_period_frames = 240.0;
};

struct BoxMotion {
  Vec3 start{0.9, 1.0, 0.415};
  int axis = 0;            // 0=x, 1=y, 2=z
  double speed = 0.004;    // meters per frame
  double travel_min = 0.6; // wrap range on the travel axis
  double travel_max = 3.4;
  Vec3 half_extent{0.175, 0.175, 0.175};
};

struct MotionParams {
  ArmMotion arm;
  std::array<BoxMotion, kBoxCount> boxes{
      BoxMotion{},
      BoxMotion{{3.1, 1.0, 0.415}, 0, -0.006, 0.6, 3.4, {0.175, 0.175, 0.175}}};
  int static_cloud_size = 5000;
  std::uint64_t static_seed = 0;

  /// All amplitudes and speeds zeroed; rest pose everywhere.
  static MotionParams frozen();

  void validate() const;
};

std::string motion_to_json(const MotionParams& params);
MotionParams motion_from_json(const std::string& text);

struct SceneState {
  int time = 0;
  std::array<Vec3, kArmJointCount> arm_keypoints;
  std::array<Vec3, kBoxCount> box_centers;
  std::vector<Vec3> static_cloud;

  /// Fixed transmission order: arm joints 0..6, then boxes 0..1.
  std::array<Vec3, kKeypointCount> object_keypoints() const;
};

/// Deterministic scene at frame t. Throws ConfigError if any generated
/// point leaves [0,4]^3.
SceneState generate_scene(int t, const MotionParams& params);

struct KeypointFrame {
  int view_id = 0;
  double theta = 0.0;
  std::array<Vec2, kKeypointCount> keypoints;
  std::array<bool, kKeypointCount> validity;
  bool clamp_warning = false; // set by the codec when a pixel left the image
};

/// Project the 9 object keypoints into one view; sigma > 0 adds isotropic
/// Gaussian pixel noise standing in for extraction error.
KeypointFrame render_keypoint_frame(const SceneState& scene,
                                    const CameraConfig& camera,
                                    double extraction_sigma, Rng& rng);

/// Shared once at session start; immutable afterwards.
struct KnowledgeBase {
  std::vector<Vec3> static_cloud; // at t = 0
  std::vector<CameraConfig> cameras;
  std::array<Vec3, kKeypointCount> object_anchors; // t = 0 positions
};

KnowledgeBase build_knowledge_base(const MotionParams& params,
                                   const std::vector<CameraConfig>& cameras);

/// Payload size if the knowledge base were serialized at 32 bits per scalar;
/// charged to the first frame's wireless time only.
std::int64_t knowledge_base_bits(const KnowledgeBase& kb);

enum class Framework { imagecom, gscs, gscm, gscs_ot, gscm_ot };
const char* framework_name(Framework fw);
std::optional<Framework> framework_from_name(std::string_view name);
bool framework_uses_ot(Framework fw);
bool framework_is_gsc(Framework fw);

enum class PointStatus : std::uint8_t { ok, too_few_views, singular };

struct ReconstructedObjects {
  std::array<Vec3, kKeypointCount> points;
  std::array<PointStatus, kKeypointCount> status;
  std::array<double, kKeypointCount> residual; // meters, rms ray distance

  bool valid(int i) const { return status[i] == PointStatus::ok; }
};

/// Movable-object templates: arm links sampled as line segments between
/// consecutive joints, boxes as cuboid surface grids. Invalid anchors are
/// skipped. Sampling is deterministic, so identical anchors give an
/// identical cloud.
PointCloud render_object_templates(
    const std::array<Vec3, kKeypointCount>& anchors,
    const std::array<bool, kKeypointCount>& valid,
    const std::array<BoxMotion, kBoxCount>& boxes, int samples_per_object);

/// Receiver-side composition. GSC variants need the knowledge base; the
/// dense baseline passes its transmitted samples instead. GSCS composes the
/// scene jointly (static first), GSCM per object first; the resulting point
/// multiset is identical either way.
PointCloud build_point_cloud(const ReconstructedObjects& objects,
                             const KnowledgeBase* kb, Framework fw,
                             const MotionParams& params,
                             int samples_per_object = 500,
                             const PointCloud* dense_samples = nullptr);

/// Transmitter-side reference cloud: static cloud plus templates at the true
/// object positions.
PointCloud ground_truth_cloud(const SceneState& scene,
                              const MotionParams& params,
                              int samples_per_object = 500);

} // namespace semcom::scene
