#include "semcom/correction.hpp"

#include <cmath>
#include <stdexcept>

namespace semcom::correction {

using scene::kKeypointCount;
using scene::KeypointFrame;

const char* target_mode_name(TargetMode mode) {
  switch (mode) {
    case TargetMode::neighbor_interp: return "neighbor_interp";
    case TargetMode::knowledge_base: return "knowledge_base";
    case TargetMode::oracle: return "oracle";
  }
  return "unknown";
}

TargetMode target_mode_from_name(const std::string& name) {
  if (name == "neighbor_interp") return TargetMode::neighbor_interp;
  if (name == "knowledge_base") return TargetMode::knowledge_base;
  if (name == "oracle") return TargetMode::oracle;
  throw std::invalid_argument("unknown target mode: " + name);
}

void DenoiserConfig::validate() const {
  if (!(eta > 0.0)) throw std::invalid_argument("denoiser eta must be > 0");
  if (delta_px < 0.0)
    throw std::invalid_argument("denoiser delta must be >= 0");
  if (view_offset < 1)
    throw std::invalid_argument("denoiser view_offset must be >= 1");
}

double default_delta_px(int width, int height) {
  return 0.02 * std::hypot(double(width), double(height));
}

double DenoiserConfig::effective_delta_px(int width, int height) const {
  return delta_px > 0.0 ? delta_px : default_delta_px(width, height);
}

int FlagSet::count() const {
  int n = 0;
  for (const auto& view : flags)
    for (bool f : view) n += f ? 1 : 0;
  return n;
}

FlagSet consistency_flags(const std::vector<KeypointFrame>& frames,
                          int view_offset, double delta_px, bool wraparound) {
  if (frames.empty()) throw std::invalid_argument("no frames to flag");
  if (view_offset < 1) throw std::invalid_argument("view_offset must be >= 1");
  if (!(delta_px > 0.0)) throw std::invalid_argument("delta must be > 0");
  const int n_views = int(frames.size());
  FlagSet set;
  set.delta_px = delta_px;
  set.view_offset = view_offset;
  set.flags.resize(n_views);
  set.defined.resize(n_views);
  for (int i = 0; i < n_views; ++i) {
    const int prev = i - view_offset;
    const int next = i + view_offset;
    const bool have_ring =
        wraparound || (prev >= 0 && next < n_views);
    const int pi = ((prev % n_views) + n_views) % n_views;
    const int ni = next % n_views;
    for (int k = 0; k < kKeypointCount; ++k) {
      if (!frames[i].validity[k]) {
        // nothing to correct in an invalid slot
        set.defined[i][k] = false;
        set.flags[i][k] = false;
        continue;
      }
      if (!have_ring || !frames[pi].validity[k] || !frames[ni].validity[k]) {
        // undefined comparisons count as inconsistent
        set.defined[i][k] = false;
        set.flags[i][k] = true;
        continue;
      }
      const Vec2 midpoint =
          0.5 * (frames[pi].keypoints[k] + frames[ni].keypoints[k]);
      const double deviation = (frames[i].keypoints[k] - midpoint).norm();
      set.defined[i][k] = true;
      set.flags[i][k] = deviation > delta_px;
    }
  }
  return set;
}

TargetSet reference_targets(const std::vector<KeypointFrame>& frames,
                            const FlagSet& flags,
                            const scene::KnowledgeBase& kb,
                            const DenoiserConfig& cfg,
                            const std::vector<KeypointFrame>* oracle_frames) {
  if (flags.flags.size() != frames.size())
    throw std::invalid_argument("reference_targets: flag/frame mismatch");
  const int n_views = int(frames.size());
  TargetSet targets;
  targets.points.resize(n_views);
  targets.defined.resize(n_views);

  switch (cfg.target_mode) {
    case TargetMode::neighbor_interp: {
      for (int i = 0; i < n_views; ++i) {
        const int prev = i - cfg.view_offset;
        const int next = i + cfg.view_offset;
        const bool have_ring =
            cfg.wraparound || (prev >= 0 && next < n_views);
        const int pi = ((prev % n_views) + n_views) % n_views;
        const int ni = next % n_views;
        for (int k = 0; k < kKeypointCount; ++k) {
          if (!have_ring || !frames[pi].validity[k] ||
              !frames[ni].validity[k]) {
            targets.defined[i][k] = false;
            targets.points[i][k] = Vec2::Zero();
            continue;
          }
          targets.points[i][k] =
              0.5 * (frames[pi].keypoints[k] + frames[ni].keypoints[k]);
          targets.defined[i][k] = true;
        }
      }
      break;
    }
    case TargetMode::knowledge_base: {
      if (kb.cameras.size() != frames.size())
        throw std::invalid_argument(
            "knowledge_base targets need one camera per frame");
      for (int i = 0; i < n_views; ++i) {
        for (int k = 0; k < kKeypointCount; ++k) {
          try {
            targets.points[i][k] =
                project_point(kb.cameras[i], kb.object_anchors[k]);
            targets.defined[i][k] = true;
          } catch (const ProjectionError&) {
            targets.points[i][k] = Vec2::Zero();
            targets.defined[i][k] = false;
          }
        }
      }
      break;
    }
    case TargetMode::oracle: {
      if (!cfg.allow_oracle)
        throw std::invalid_argument(
            "oracle targets are restricted to the evaluation harness "
            "(allow_oracle)");
      if (oracle_frames == nullptr || oracle_frames->size() != frames.size())
        throw std::invalid_argument("oracle targets need transmitted frames");
      for (int i = 0; i < n_views; ++i) {
        for (int k = 0; k < kKeypointCount; ++k) {
          targets.points[i][k] = (*oracle_frames)[i].keypoints[k];
          targets.defined[i][k] = (*oracle_frames)[i].validity[k];
        }
      }
      break;
    }
  }
  return targets;
}

DenoiseResult selective_denoise(const std::vector<KeypointFrame>& frames,
                                const DenoiserConfig& cfg,
                                const scene::KnowledgeBase& kb,
                                const std::vector<KeypointFrame>*
                                    oracle_frames) {
  cfg.validate();
  if (frames.size() < 3)
    throw std::invalid_argument("selective_denoise needs at least 3 views");
  if (kb.cameras.size() != frames.size())
    throw std::invalid_argument(
        "selective_denoise: knowledge base cameras do not match frames");

  const int width = kb.cameras.front().width;
  const int height = kb.cameras.front().height;
  const double delta = cfg.effective_delta_px(width, height);

  DenoiseResult result;
  result.frames = frames;
  result.flags =
      consistency_flags(frames, cfg.view_offset, delta, cfg.wraparound);
  const TargetSet targets =
      reference_targets(frames, result.flags, kb, cfg, oracle_frames);

  std::vector<Vec2> source_norm(kKeypointCount);
  std::vector<Vec2> target_norm(kKeypointCount);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    bool any_flagged = false;
    for (int k = 0; k < kKeypointCount; ++k)
      any_flagged = any_flagged || result.flags.flags[i][k];
    if (!any_flagged) continue; // bit-identical pass-through

    bool any_target = false;
    for (int k = 0; k < kKeypointCount; ++k)
      any_target = any_target || targets.defined[i][k];
    if (!any_target) {
      ++result.skipped_views;
      continue;
    }

    for (int k = 0; k < kKeypointCount; ++k) {
      const Vec2& s = frames[i].keypoints[k];
      source_norm[k] = Vec2(s.x() / width, s.y() / height);
      // undefined target slots fall back to the received point, which keeps
      // them cost-neutral in the plan
      const Vec2& t = targets.defined[i][k] ? targets.points[i][k] : s;
      target_norm[k] = Vec2(t.x() / width, t.y() / height);
    }

    const ot::CostMatrix cost = ot::cost_matrix(source_norm, target_norm);
    const Eigen::VectorXd marginal = ot::uniform_marginal(kKeypointCount);
    const ot::TransportPlan combined =
        ot::combine_max(ot::relax_rows(cost, cfg.eta, marginal),
                        ot::relax_cols(cost, cfg.eta, marginal));
    const std::vector<Vec2> corrected_norm =
        ot::barycentric_apply(combined, target_norm);

    for (int k = 0; k < kKeypointCount; ++k) {
      if (!result.flags.flags[i][k]) continue;
      result.frames[i].keypoints[k] = Vec2(corrected_norm[k].x() * width,
                                           corrected_norm[k].y() * height);
      ++result.corrected_points;
    }
  }
  return result;
}

} // namespace semcom::correction
