#include "semcom/harness.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <thread>
#include <tuple>

namespace semcom::harness {

using scene::Framework;
using scene::kKeypointCount;

namespace {

enum StreamTag : std::uint64_t {
  kTagExtraction = 1,
  kTagChannel = 2,
  kTagDenseChannel = 3,
};

std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

double parse_double(const std::string& s) {
  if (s == "inf") return std::numeric_limits<double>::infinity();
  if (s == "-inf") return -std::numeric_limits<double>::infinity();
  return std::stod(s);
}

double parse_snr(const nlohmann::json& j) {
  if (j.is_string()) {
    const auto s = j.get<std::string>();
    if (s == "inf" || s == "+inf")
      return std::numeric_limits<double>::infinity();
    throw std::invalid_argument("snr_db string must be \"inf\"");
  }
  return j.get<double>();
}

channel::ChannelConfig channel_from_json(const nlohmann::json& j) {
  channel::ChannelConfig ch;
  ch.kind = channel::channel_kind_from_name(j.at("kind").get<std::string>());
  if (j.contains("snr_db")) ch.snr_db = parse_snr(j["snr_db"]);
  if (j.contains("rician_k")) ch.rician_k = j["rician_k"].get<double>();
  if (j.contains("seed")) ch.seed = j["seed"].get<std::uint64_t>();
  ch.validate();
  return ch;
}

} // namespace

void ExperimentConfig::validate() const {
  if (frameworks.empty()) throw scene::ConfigError("no frameworks configured");
  if (channels.empty()) throw scene::ConfigError("no channels configured");
  if (trials < 1) throw scene::ConfigError("trials must be >= 1");
  if (frames < 1) throw scene::ConfigError("frames must be >= 1");
  if (extraction_sigma_px < 0.0)
    throw scene::ConfigError("extraction sigma must be >= 0");
  if (samples_per_object < 1)
    throw scene::ConfigError("samples_per_object must be >= 1");
  if (!(link_rate_bps > 0.0))
    throw scene::ConfigError("link_rate_bps must be > 0");
  if (latency.t_semantic_s < 0.0 || latency.t_generation_s < 0.0 ||
      t_ot_model_s < 0.0)
    throw scene::ConfigError("latency constants must be >= 0");
  motion.validate();
  denoiser.validate();
  const bool any_ot =
      std::any_of(frameworks.begin(), frameworks.end(), scene::framework_uses_ot);
  if (any_ot && denoiser.target_mode == correction::TargetMode::oracle &&
      !denoiser.allow_oracle)
    throw scene::ConfigError(
        "oracle targets require denoiser.allow_oracle = true");
}

ExperimentConfig config_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw scene::ConfigError(std::string("config is not valid json: ") +
                             e.what());
  }
  ExperimentConfig cfg;
  if (j.contains("frameworks")) {
    cfg.frameworks.clear();
    for (const auto& name : j["frameworks"]) {
      const auto fw = scene::framework_from_name(name.get<std::string>());
      if (!fw)
        throw scene::ConfigError("unknown framework: " +
                                 name.get<std::string>());
      cfg.frameworks.push_back(*fw);
    }
  }
  if (j.contains("channels")) {
    cfg.channels.clear();
    for (const auto& cj : j["channels"])
      cfg.channels.push_back(channel_from_json(cj));
  } else if (j.contains("channel")) {
    cfg.channels = {channel_from_json(j["channel"])};
  }
  if (j.contains("snr_list_db")) {
    cfg.snr_list_db.clear();
    for (const auto& s : j["snr_list_db"]) cfg.snr_list_db.push_back(parse_snr(s));
  }
  if (j.contains("trials")) cfg.trials = j["trials"].get<int>();
  if (j.contains("frames")) cfg.frames = j["frames"].get<int>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("workers")) cfg.workers = j["workers"].get<int>();
  if (j.contains("extraction_sigma_px"))
    cfg.extraction_sigma_px = j["extraction_sigma_px"].get<double>();
  if (j.contains("samples_per_object"))
    cfg.samples_per_object = j["samples_per_object"].get<int>();
  if (j.contains("motion")) cfg.motion = scene::motion_from_json(j["motion"].dump());
  if (j.contains("denoiser")) {
    const auto& d = j["denoiser"];
    if (d.contains("eta")) cfg.denoiser.eta = d["eta"].get<double>();
    if (d.contains("delta_px")) cfg.denoiser.delta_px = d["delta_px"].get<double>();
    if (d.contains("delta_frac"))
      cfg.denoiser.delta_px =
          d["delta_frac"].get<double>() *
          std::hypot(double(cfg.ring.width), double(cfg.ring.height_px));
    if (d.contains("view_offset"))
      cfg.denoiser.view_offset = d["view_offset"].get<int>();
    if (d.contains("target_mode"))
      cfg.denoiser.target_mode =
          correction::target_mode_from_name(d["target_mode"].get<std::string>());
    if (d.contains("allow_oracle"))
      cfg.denoiser.allow_oracle = d["allow_oracle"].get<bool>();
  }
  if (j.contains("link_rate_bps")) cfg.link_rate_bps = j["link_rate_bps"].get<double>();
  if (j.contains("latency_constants")) {
    const auto& l = j["latency_constants"];
    if (l.contains("t_semantic_s"))
      cfg.latency.t_semantic_s = l["t_semantic_s"].get<double>();
    if (l.contains("t_generation_s"))
      cfg.latency.t_generation_s = l["t_generation_s"].get<double>();
  }
  if (j.contains("t_ot_model_s")) cfg.t_ot_model_s = j["t_ot_model_s"].get<double>();
  if (j.contains("measure_ot_time"))
    cfg.measure_ot_time = j["measure_ot_time"].get<bool>();
  if (j.contains("ring")) {
    const auto& r = j["ring"];
    if (r.contains("count")) cfg.ring.count = r["count"].get<int>();
    if (r.contains("radius")) cfg.ring.radius = r["radius"].get<double>();
    if (r.contains("height")) cfg.ring.height = r["height"].get<double>();
    if (r.contains("focal")) cfg.ring.focal = r["focal"].get<double>();
  }
  cfg.validate();
  return cfg;
}

ExperimentConfig config_from_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw scene::ConfigError("cannot open config file: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return config_from_json(buf.str());
}

TrialContext::TrialContext(const ExperimentConfig& cfg) : cfg_(cfg) {
  cfg_.validate();
  cameras_ = build_camera_ring(cfg_.ring);
  kb_ = scene::build_knowledge_base(cfg_.motion, cameras_);
  const int width = cfg_.ring.width;
  const int height = cfg_.ring.height_px;

  frames_.resize(cfg_.frames);
  for (int t = 0; t < cfg_.frames; ++t) {
    FrameData& fd = frames_[t];
    fd.scene = scene::generate_scene(t, cfg_.motion);
    fd.reference_cloud =
        scene::ground_truth_cloud(fd.scene, cfg_.motion, cfg_.samples_per_object);

    fd.onair_frames.reserve(cameras_.size());
    fd.payloads.reserve(cameras_.size());
    fd.dense_payloads.reserve(cameras_.size());
    fd.dense_onair.reserve(cameras_.size());
    Rng null_rng(0); // sigma == 0 here; per-trial noise is added in run_trial
    for (const auto& cam : cameras_) {
      scene::KeypointFrame clean =
          scene::render_keypoint_frame(fd.scene, cam, 0.0, null_rng);
      channel::Payload payload = channel::encode_keypoints(clean, width, height);
      scene::KeypointFrame onair = channel::decode_keypoints(payload, width, height);
      onair.view_id = cam.view_id;
      onair.theta = cam.theta;
      fd.payloads.push_back(std::move(payload));
      fd.onair_frames.push_back(std::move(onair));

      // dense baseline: every reference-cloud point through this view
      std::vector<Vec2> pixels;
      pixels.reserve(fd.reference_cloud.size());
      for (const Vec3& p : fd.reference_cloud.points)
        pixels.push_back(project_point(cam, p));
      channel::Payload dense = channel::encode_pixels(pixels, width, height);
      dense.bit_size = channel::dense_image_bits(width, height);
      fd.dense_onair.push_back(channel::decode_pixels(dense, width, height));
      fd.dense_payloads.push_back(std::move(dense));
    }

    // which dense point carries each keypoint's content
    const auto objects = fd.scene.object_keypoints();
    for (int k = 0; k < kKeypointCount; ++k) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (std::size_t i = 0; i < fd.reference_cloud.size(); ++i) {
        const double d = (fd.reference_cloud.points[i] - objects[k]).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = int(i);
        }
      }
      fd.dense_assignment[k] = best;
    }
  }
}

RunRecord TrialContext::run_trial(Framework fw, channel::ChannelConfig ch,
                                  std::uint64_t trial_seed, int frame) const {
  RunRecord rec;
  rec.framework = fw;
  rec.channel_kind = ch.kind;
  rec.snr_db = ch.snr_db;
  rec.seed = trial_seed;
  rec.frame = frame;
  try {
    const FrameData& fd = frames_.at(frame);
    const int width = cfg_.ring.width;
    const int height = cfg_.ring.height_px;
    Rng trial_rng = Rng(trial_seed).substream(std::uint64_t(frame));

    double t_ot = cfg_.measure_ot_time ? 0.0 : 0.0;
    std::int64_t payload_bits = 0;
    double kpe_sum = 0.0;
    PointCloud receiver_cloud;

    if (fw == Framework::imagecom) {
      std::vector<std::vector<Vec2>> received(cameras_.size());
      for (std::size_t v = 0; v < cameras_.size(); ++v) {
        Rng rng = trial_rng.substream(kTagDenseChannel, v);
        const channel::Payload out =
            channel::transmit(fd.dense_payloads[v], ch, rng);
        received[v] = channel::decode_pixels(out, width, height);
        payload_bits += out.bit_size;
        // KPE from the dense points nearest each true keypoint
        double view_err = 0.0;
        for (int k = 0; k < kKeypointCount; ++k) {
          const int idx = fd.dense_assignment[k];
          view_err += (received[v][idx] - fd.dense_onair[v][idx]).norm();
        }
        kpe_sum += view_err / kKeypointCount;
      }
      const scene::TrackTriangulation tracks =
          scene::triangulate_tracks(received, cameras_);
      for (std::size_t i = 0; i < tracks.points.size(); ++i)
        if (tracks.status[i] == scene::PointStatus::ok)
          receiver_cloud.points.push_back(tracks.points[i]);
      if (receiver_cloud.points.empty())
        throw std::runtime_error("dense reconstruction produced no points");
    } else {
      // keypoint pipeline
      std::vector<scene::KeypointFrame> received;
      received.reserve(cameras_.size());
      for (std::size_t v = 0; v < cameras_.size(); ++v) {
        channel::Payload payload = fd.payloads[v];
        if (cfg_.extraction_sigma_px > 0.0) {
          Rng ext_rng = trial_rng.substream(kTagExtraction, v);
          scene::KeypointFrame noisy = scene::render_keypoint_frame(
              fd.scene, cameras_[v], cfg_.extraction_sigma_px, ext_rng);
          payload = channel::encode_keypoints(noisy, width, height);
        }
        Rng rng = trial_rng.substream(kTagChannel, v);
        const channel::Payload out = channel::transmit(payload, ch, rng);
        scene::KeypointFrame frame_rx =
            channel::decode_keypoints(out, width, height);
        frame_rx.view_id = cameras_[v].view_id;
        frame_rx.theta = cameras_[v].theta;
        received.push_back(std::move(frame_rx));
        payload_bits += out.bit_size;
      }
      if (frame == 0) payload_bits += scene::knowledge_base_bits(kb_);

      std::vector<scene::KeypointFrame> final_frames;
      if (scene::framework_uses_ot(fw)) {
        const auto t0 = std::chrono::steady_clock::now();
        correction::DenoiseResult denoised = correction::selective_denoise(
            received, cfg_.denoiser, kb_,
            cfg_.denoiser.target_mode == correction::TargetMode::oracle
                ? &fd.onair_frames
                : nullptr);
        const auto t1 = std::chrono::steady_clock::now();
        t_ot = cfg_.measure_ot_time
                   ? std::chrono::duration<double>(t1 - t0).count()
                   : cfg_.t_ot_model_s;
        final_frames = std::move(denoised.frames);
      } else {
        final_frames = std::move(received);
      }

      for (std::size_t v = 0; v < cameras_.size(); ++v) {
        double view_err = 0.0;
        for (int k = 0; k < kKeypointCount; ++k)
          view_err += (final_frames[v].keypoints[k] -
                       fd.onair_frames[v].keypoints[k])
                          .norm();
        kpe_sum += view_err / kKeypointCount;
      }

      const scene::ReconstructedObjects objects =
          scene::triangulate(final_frames, cameras_);
      receiver_cloud =
          scene::build_point_cloud(objects, &kb_, fw, cfg_.motion,
                                   cfg_.samples_per_object);
    }

    rec.report.kpe_px = kpe_sum / double(cameras_.size());
    rec.report.chamfer_m2 =
        metrics::chamfer_modified(fd.reference_cloud, receiver_cloud);
    rec.report.p2point_m = metrics::p2point(fd.reference_cloud, receiver_cloud);
    rec.report.payload_bits = payload_bits;
    const double t_semantic =
        fw == Framework::imagecom ? 0.0 : cfg_.latency.t_semantic_s;
    const double t_wireless = double(payload_bits) / cfg_.link_rate_bps;
    rec.report.latency = metrics::latency_breakdown(
        t_semantic, t_wireless, t_ot, cfg_.latency.t_generation_s);
  } catch (const std::exception& e) {
    std::string msg = e.what();
    std::replace(msg.begin(), msg.end(), ',', ';');
    std::replace(msg.begin(), msg.end(), '\n', ' ');
    rec.status = "error: " + msg;
  }
  return rec;
}

namespace {

struct Task {
  Framework fw;
  channel::ChannelConfig ch;
  std::uint64_t trial_seed;
  int frame;
};

std::vector<Task> build_tasks(const ExperimentConfig& cfg) {
  std::vector<Task> tasks;
  for (Framework fw : cfg.frameworks) {
    for (const auto& base_ch : cfg.channels) {
      std::vector<double> snrs = cfg.snr_list_db;
      if (snrs.empty()) snrs.push_back(base_ch.snr_db);
      for (double snr : snrs) {
        channel::ChannelConfig ch = base_ch;
        ch.snr_db = snr;
        for (int trial = 0; trial < cfg.trials; ++trial) {
          for (int frame = 0; frame < cfg.frames; ++frame)
            tasks.push_back({fw, ch, cfg.seed + std::uint64_t(trial), frame});
        }
      }
    }
  }
  return tasks;
}

} // namespace

SweepResult sweep(const ExperimentConfig& cfg, const std::string& out_dir) {
  cfg.validate();
  std::filesystem::create_directories(out_dir);
  const TrialContext context(cfg);
  const std::vector<Task> tasks = build_tasks(cfg);

  std::vector<RunRecord> records(tasks.size());
  int n_workers = cfg.workers > 0
                      ? cfg.workers
                      : int(std::max(1u, std::thread::hardware_concurrency()));
  n_workers = std::min<int>(n_workers, int(tasks.size()));
  std::atomic<std::size_t> next{0};
  auto worker = [&]() {
    for (std::size_t i = next.fetch_add(1); i < tasks.size();
         i = next.fetch_add(1)) {
      const Task& t = tasks[i];
      records[i] = context.run_trial(t.fw, t.ch, t.trial_seed, t.frame);
    }
  };
  if (n_workers <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (int w = 0; w < n_workers; ++w) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }

  SweepResult result;
  result.records = std::move(records);
  for (const auto& r : result.records) result.ok_rows += r.ok() ? 1 : 0;

  result.rows_csv_path = out_dir + "/rows.csv";
  result.aggregate_csv_path = out_dir + "/aggregate.csv";
  std::ofstream rows(result.rows_csv_path);
  if (!rows) throw scene::ConfigError("cannot write " + result.rows_csv_path);
  rows << records_to_csv(result.records);
  std::ofstream agg(result.aggregate_csv_path);
  agg << aggregate_csv(result.records);
  return result;
}

std::string records_to_csv(const std::vector<RunRecord>& records) {
  std::ostringstream out;
  out << kCsvHeader << '\n';
  for (const auto& r : records) {
    out << scene::framework_name(r.framework) << ','
        << channel::channel_kind_name(r.channel_kind) << ','
        << format_double(r.snr_db) << ',' << r.seed << ',' << r.frame << ','
        << format_double(r.report.kpe_px) << ','
        << format_double(r.report.chamfer_m2) << ','
        << format_double(r.report.p2point_m) << ','
        << format_double(r.report.latency.t_semantic) << ','
        << format_double(r.report.latency.t_wireless) << ','
        << format_double(r.report.latency.t_ot) << ','
        << format_double(r.report.latency.t_generation) << ','
        << format_double(r.report.latency.total) << ','
        << r.report.payload_bits << ',' << r.status << '\n';
  }
  return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> fields;
  std::string field;
  std::istringstream ls(line);
  while (std::getline(ls, field, ',')) fields.push_back(field);
  if (!line.empty() && line.back() == ',') fields.push_back("");
  return fields;
}

struct CsvError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

} // namespace

std::vector<RunRecord> records_from_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line))
    throw CsvError("csv parse error: empty file (missing header)");
  if (line != kCsvHeader)
    throw CsvError("csv parse error: row 1: unexpected header");
  const std::vector<std::string> columns = split_csv_line(kCsvHeader);
  std::vector<RunRecord> records;
  int row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const auto fields = split_csv_line(line);
    if (fields.size() < columns.size())
      throw CsvError("csv parse error: row " + std::to_string(row) +
                     ": expected " + std::to_string(columns.size()) +
                     " fields, got " + std::to_string(fields.size()));
    auto field_at = [&](const char* name) -> const std::string& {
      for (std::size_t i = 0; i < columns.size(); ++i)
        if (columns[i] == name) return fields[i];
      throw CsvError(std::string("csv parse error: no column ") + name);
    };
    RunRecord r;
    const auto fw = scene::framework_from_name(field_at("framework"));
    if (!fw)
      throw CsvError("csv parse error: row " + std::to_string(row) +
                     ", column framework: unknown value");
    r.framework = *fw;
    try {
      r.channel_kind = channel::channel_kind_from_name(field_at("channel"));
      r.snr_db = parse_double(field_at("snr_db"));
      r.seed = std::stoull(field_at("seed"));
      r.frame = std::stoi(field_at("frame"));
      r.report.kpe_px = parse_double(field_at("kpe_px"));
      r.report.chamfer_m2 = parse_double(field_at("chamfer_m2"));
      r.report.p2point_m = parse_double(field_at("p2point_m"));
      r.report.latency.t_semantic = parse_double(field_at("t_s"));
      r.report.latency.t_wireless = parse_double(field_at("t_w"));
      r.report.latency.t_ot = parse_double(field_at("t_o"));
      r.report.latency.t_generation = parse_double(field_at("t_g"));
      r.report.latency.total = parse_double(field_at("total_s"));
      r.report.payload_bits = std::stoll(field_at("payload_bits"));
    } catch (const CsvError&) {
      throw;
    } catch (const std::exception& e) {
      throw CsvError("csv parse error: row " + std::to_string(row) + ": " +
                     e.what());
    }
    r.status = fields.back();
    records.push_back(std::move(r));
  }
  return records;
}

std::vector<RunRecord> records_from_csv_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open csv: " + path);
  return records_from_csv(in);
}

namespace {

double quantile(std::vector<double> v, double p) {
  if (v.empty()) return 0.0;
  std::sort(v.begin(), v.end());
  const double h = (double(v.size()) - 1.0) * p;
  const std::size_t lo = std::size_t(std::floor(h));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  return v[lo] + (h - double(lo)) * (v[hi] - v[lo]);
}

} // namespace

std::string aggregate_csv(const std::vector<RunRecord>& records) {
  struct Key {
    std::string fw, ch;
    double snr;
    bool operator<(const Key& o) const {
      return std::tie(fw, ch, snr) < std::tie(o.fw, o.ch, o.snr);
    }
  };
  std::map<Key, std::vector<const RunRecord*>> groups;
  for (const auto& r : records) {
    if (!r.ok()) continue;
    groups[{scene::framework_name(r.framework),
            channel::channel_kind_name(r.channel_kind), r.snr_db}]
        .push_back(&r);
  }
  std::ostringstream out;
  out << "framework,channel,snr_db,rows,"
         "kpe_med,kpe_iqr,chamfer_med,chamfer_iqr,"
         "p2point_med,p2point_iqr,total_s_med,total_s_iqr\n";
  auto emit = [&](std::vector<double>& vals) {
    out << ',' << format_double(quantile(vals, 0.5)) << ','
        << format_double(quantile(vals, 0.75) - quantile(vals, 0.25));
  };
  for (auto& [key, rows] : groups) {
    std::vector<double> kpe, chamfer, p2p, total;
    for (const RunRecord* r : rows) {
      kpe.push_back(r->report.kpe_px);
      chamfer.push_back(r->report.chamfer_m2);
      p2p.push_back(r->report.p2point_m);
      total.push_back(r->report.latency.total);
    }
    out << key.fw << ',' << key.ch << ',' << format_double(key.snr) << ','
        << rows.size();
    emit(kpe);
    emit(chamfer);
    emit(p2p);
    emit(total);
    out << '\n';
  }
  return out.str();
}

} // namespace semcom::harness
