#pragma once

#include "semcom/scene.hpp"
#include "semcom/transport.hpp"

#include <optional>
#include <vector>

namespace semcom::correction {

enum class TargetMode { neighbor_interp, knowledge_base, oracle };
const char* target_mode_name(TargetMode mode);
TargetMode target_mode_from_name(const std::string& name);

struct DenoiserConfig {
  double eta = 0.05;      // in normalized [0,1] coordinates
  double delta_px = 0.0;  // 0 means "2% of the image diagonal"
  int view_offset = 1;
  TargetMode target_mode = TargetMode::neighbor_interp;
  bool wraparound = true;
  // Oracle targets are an evaluation upper bound; the deployed pipeline must
  // not see transmitter data, so oracle mode stays off unless a harness
  // explicitly enables it.
  bool allow_oracle = false;

  void validate() const;
  double effective_delta_px(int width, int height) const;
};

double default_delta_px(int width, int height);

/// Per-(view, keypoint) inconsistency flags. flag = true means the point
/// deviates from the midpoint of its ring neighbors by more than delta and
/// gets corrected; entries whose neighbors are unavailable are undefined and
/// treated as flagged.
struct FlagSet {
  std::vector<std::array<bool, scene::kKeypointCount>> flags;
  std::vector<std::array<bool, scene::kKeypointCount>> defined;
  double delta_px = 0.0;
  int view_offset = 1;

  int count() const;
};

FlagSet consistency_flags(const std::vector<scene::KeypointFrame>& frames,
                          int view_offset, double delta_px,
                          bool wraparound = true);

struct TargetSet {
  std::vector<std::array<Vec2, scene::kKeypointCount>> points;
  std::vector<std::array<bool, scene::kKeypointCount>> defined;
};

/// OT targets per view. neighbor_interp interpolates the ring neighbors,
/// knowledge_base projects the t=0 anchors, oracle uses the transmitted
/// frames themselves (evaluation only).
TargetSet reference_targets(const std::vector<scene::KeypointFrame>& frames,
                            const FlagSet& flags,
                            const scene::KnowledgeBase& kb,
                            const DenoiserConfig& cfg,
                            const std::vector<scene::KeypointFrame>*
                                oracle_frames = nullptr);

struct DenoiseResult {
  std::vector<scene::KeypointFrame> frames;
  FlagSet flags;
  int corrected_points = 0;
  int skipped_views = 0; // views left unmodified for lack of targets
};

/// End-to-end selective correction: flag, build targets, solve both relaxed
/// plans, combine, and barycentrically move only the flagged keypoints.
/// Unflagged keypoints pass through bit-identical.
DenoiseResult selective_denoise(const std::vector<scene::KeypointFrame>& frames,
                                const DenoiserConfig& cfg,
                                const scene::KnowledgeBase& kb,
                                const std::vector<scene::KeypointFrame>*
                                    oracle_frames = nullptr);

} // namespace semcom::correction
