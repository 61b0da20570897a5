#pragma once

#include "semcom/channel.hpp"
#include "semcom/correction.hpp"
#include "semcom/metrics.hpp"
#include "semcom/scene.hpp"
#include "semcom/triangulate.hpp"

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace semcom::harness {

struct LatencyConstants {
  double t_semantic_s = 0.05;
  double t_generation_s = 1.0;
};

struct ExperimentConfig {
  std::vector<scene::Framework> frameworks{scene::Framework::gscs_ot};
  std::vector<channel::ChannelConfig> channels{channel::ChannelConfig{}};
  std::vector<double> snr_list_db{};
  int trials = 1;
  int frames = 1;
  std::uint64_t seed = 1;
  int workers = 0; // 0 = hardware concurrency
  double extraction_sigma_px = 0.0;
  int samples_per_object = 500;
  scene::MotionParams motion;
  RingLayout ring;
  correction::DenoiserConfig denoiser;
  double link_rate_bps = 160e6;
  LatencyConstants latency;
  double t_ot_model_s = 0.03;
  // Wall-clock OT time in the CSV breaks byte-for-byte reproducibility, so
  // sweeps default to the modeled constant; `simulate` measures.
  bool measure_ot_time = false;

  void validate() const;
};

ExperimentConfig config_from_json(const std::string& text);
ExperimentConfig config_from_json_file(const std::string& path);

struct RunRecord {
  scene::Framework framework = scene::Framework::gscs;
  channel::ChannelKind channel_kind = channel::ChannelKind::awgn;
  double snr_db = 0.0;
  std::uint64_t seed = 0;
  int frame = 0;
  metrics::MetricsReport report;
  std::string status = "ok";

  bool ok() const { return status == "ok"; }
};

/// Immutable per-config state shared by all trials: cameras, knowledge base,
/// per-frame scenes, reference clouds, and the dense-baseline projections.
class TrialContext {
public:
  explicit TrialContext(const ExperimentConfig& cfg);

  const ExperimentConfig& config() const { return cfg_; }
  const std::vector<CameraConfig>& cameras() const { return cameras_; }
  const scene::KnowledgeBase& knowledge_base() const { return kb_; }

  struct FrameData {
    scene::SceneState scene;
    PointCloud reference_cloud;
    // transmitter-side frames as the codec puts them on air
    std::vector<scene::KeypointFrame> onair_frames;
    std::vector<channel::Payload> payloads;
    // dense baseline: the reference cloud projected into every view
    std::vector<channel::Payload> dense_payloads;
    std::vector<std::vector<Vec2>> dense_onair;      // [view][point]
    std::array<int, scene::kKeypointCount> dense_assignment;
  };
  const FrameData& frame(int t) const { return frames_.at(t); }

  RunRecord run_trial(scene::Framework fw, channel::ChannelConfig ch,
                      std::uint64_t trial_seed, int frame) const;

private:
  ExperimentConfig cfg_;
  std::vector<CameraConfig> cameras_;
  scene::KnowledgeBase kb_;
  std::vector<FrameData> frames_;
};

struct SweepResult {
  std::vector<RunRecord> records;
  int ok_rows = 0;
  std::string rows_csv_path;
  std::string aggregate_csv_path;
};

/// Cross product frameworks x channels x snr x trials x frames, run on a
/// worker pool with per-trial substreams; rows come out in canonical order
/// regardless of scheduling.
SweepResult sweep(const ExperimentConfig& cfg, const std::string& out_dir);

constexpr const char* kCsvHeader =
    "framework,channel,snr_db,seed,frame,kpe_px,chamfer_m2,p2point_m,"
    "t_s,t_w,t_o,t_g,total_s,payload_bits,status";

std::string records_to_csv(const std::vector<RunRecord>& records);
std::vector<RunRecord> records_from_csv(std::istream& in);
std::vector<RunRecord> records_from_csv_file(const std::string& path);

std::string aggregate_csv(const std::vector<RunRecord>& records);

} // namespace semcom::harness
