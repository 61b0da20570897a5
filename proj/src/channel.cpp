#include "semcom/channel.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace semcom::channel {

const char* channel_kind_name(ChannelKind kind) {
  switch (kind) {
    case ChannelKind::awgn: return "awgn";
    case ChannelKind::rayleigh: return "rayleigh";
    case ChannelKind::rician: return "rician";
  }
  return "unknown";
}

ChannelKind channel_kind_from_name(const std::string& name) {
  if (name == "awgn") return ChannelKind::awgn;
  if (name == "rayleigh") return ChannelKind::rayleigh;
  if (name == "rician") return ChannelKind::rician;
  throw std::invalid_argument("unknown channel kind: " + name);
}

void ChannelConfig::validate() const {
  if (kind == ChannelKind::rician && !(rician_k > 0.0))
    throw std::invalid_argument("rician K-factor must be > 0");
  if (std::isnan(snr_db))
    throw std::invalid_argument("snr_db must be finite or +inf");
  if (std::isinf(snr_db) && snr_db < 0.0)
    throw std::invalid_argument("snr_db of -inf is not a channel");
}

double rayleigh_gain(Rng& rng) {
  const double s = std::sqrt(0.5);
  const double n1 = s * rng.gaussian();
  const double n2 = s * rng.gaussian();
  return std::sqrt(n1 * n1 + n2 * n2);
}

double rician_gain(Rng& rng, double k) {
  if (!(k > 0.0)) throw std::invalid_argument("rician K-factor must be > 0");
  const double los = std::sqrt(k / (k + 1.0));
  const double s = std::sqrt(0.5 / (k + 1.0)); // per-component scatter std
  const double re = los + s * rng.gaussian();
  const double im = s * rng.gaussian();
  return std::sqrt(re * re + im * im);
}

namespace {

double draw_gain(const ChannelConfig& cfg, Rng& rng) {
  double h = 1.0;
  do {
    switch (cfg.kind) {
      case ChannelKind::awgn: return 1.0;
      case ChannelKind::rayleigh: h = rayleigh_gain(rng); break;
      case ChannelKind::rician: h = rician_gain(rng, cfg.rician_k); break;
    }
  } while (h == 0.0); // probability-zero draw: resample
  return h;
}

} // namespace

TransmitTrace transmit_traced(const Payload& payload, const ChannelConfig& cfg,
                              Rng& rng) {
  cfg.validate();
  TransmitTrace trace;
  trace.received = payload;
  if (cfg.noiseless()) {
    trace.gains.assign(payload.size(), 1.0);
    trace.raw_error.assign(payload.size(), 0.0);
    return trace;
  }
  const double sigma = std::pow(10.0, -cfg.snr_db / 20.0);
  trace.gains.resize(payload.size());
  trace.raw_error.resize(payload.size());
  for (std::size_t i = 0; i < payload.size(); ++i) {
    const double h = draw_gain(cfg, rng);
    const double x = payload.symbols[i];
    const double y = h * x + sigma * rng.gaussian();
    const double equalized = y / h;
    trace.gains[i] = h;
    trace.raw_error[i] = equalized - x;
    trace.received.symbols[i] =
        std::clamp(equalized, kClampLo, kClampHi);
  }
  return trace;
}

Payload transmit(const Payload& payload, const ChannelConfig& cfg, Rng& rng) {
  cfg.validate();
  if (cfg.noiseless()) return payload;
  return transmit_traced(payload, cfg, rng).received;
}

Payload encode_pixels(const std::vector<Vec2>& pixels, int width, int height) {
  Payload p;
  const std::size_t n = pixels.size();
  p.symbols.reserve(n * 2);
  p.offset.assign(n * 2, 0.0);
  p.scale.resize(n * 2);
  for (std::size_t i = 0; i < n; ++i) {
    p.scale[2 * i] = double(width);
    p.scale[2 * i + 1] = double(height);
    double sx = pixels[i].x() / width;
    double sy = pixels[i].y() / height;
    // out-of-bounds pixels (e.g. extraction noise) are clamped and flagged
    if (sx < 0.0 || sx > 1.0 || sy < 0.0 || sy > 1.0) {
      p.clamp_warning = true;
      sx = std::clamp(sx, 0.0, 1.0);
      sy = std::clamp(sy, 0.0, 1.0);
    }
    p.symbols.push_back(sx);
    p.symbols.push_back(sy);
  }
  p.bit_size = std::int64_t(n) * 2 * 32;
  return p;
}

std::vector<Vec2> decode_pixels(const Payload& payload, int width, int height) {
  if (payload.size() % 2 != 0)
    throw std::invalid_argument("pixel payload needs an even symbol count");
  std::vector<Vec2> pixels(payload.size() / 2);
  for (std::size_t i = 0; i < pixels.size(); ++i)
    pixels[i] = Vec2(payload.symbols[2 * i] * width,
                     payload.symbols[2 * i + 1] * height);
  return pixels;
}

Payload encode_keypoints(const scene::KeypointFrame& frame, int width,
                         int height) {
  Payload p = encode_pixels(
      std::vector<Vec2>(frame.keypoints.begin(), frame.keypoints.end()),
      width, height);
  p.bit_size = kKeypointPayloadBits;
  return p;
}

scene::KeypointFrame decode_keypoints(const Payload& payload, int width,
                                      int height) {
  if (payload.size() != scene::kKeypointCount * 2)
    throw std::invalid_argument("keypoint payload needs " +
                                std::to_string(scene::kKeypointCount * 2) +
                                " symbols");
  scene::KeypointFrame frame;
  frame.clamp_warning = payload.clamp_warning;
  for (int i = 0; i < scene::kKeypointCount; ++i) {
    frame.keypoints[i] = Vec2(payload.symbols[2 * i] * width,
                              payload.symbols[2 * i + 1] * height);
    frame.validity[i] = true;
  }
  return frame;
}

std::int64_t dense_image_bits(int width, int height) {
  return std::int64_t(width) * height * 3 * 8;
}

} // namespace semcom::channel
