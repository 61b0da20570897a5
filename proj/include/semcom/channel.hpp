#pragma once

#include "semcom/rng.hpp"
#include "semcom/scene.hpp"

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace semcom::channel {

enum class ChannelKind { awgn, rayleigh, rician };

const char* channel_kind_name(ChannelKind kind);
ChannelKind channel_kind_from_name(const std::string& name);

struct ChannelConfig {
  ChannelKind kind = ChannelKind::awgn;
  double snr_db = std::numeric_limits<double>::infinity();
  double rician_k = 4.0; // linear LOS/scatter power ratio
  std::uint64_t seed = 0;

  void validate() const;
  bool noiseless() const { return std::isinf(snr_db) && snr_db > 0.0; }
};

/// Normalized real symbols plus the metadata needed to undo the
/// normalization. bit_size is bookkeeping for the latency model only; the
/// channel itself is analog per symbol.
struct Payload {
  std::vector<double> symbols;            // nominally in [0,1]
  std::vector<double> offset;             // per-dimension min
  std::vector<double> scale;              // per-dimension scale
  std::int64_t bit_size = 0;
  bool clamp_warning = false;            // an input pixel was out of bounds

  std::size_t size() const { return symbols.size(); }
};

/// Unit-mean-square Rayleigh gain: sqrt(n1^2+n2^2), n1,n2 ~ N(0, 1/2).
double rayleigh_gain(Rng& rng);

/// Unit-mean-square Rician gain with linear K-factor k: deterministic LOS
/// sqrt(k/(k+1)) plus complex scatter of total variance 1/(k+1).
double rician_gain(Rng& rng, double k);

/// Post-equalization clamp window for received symbols.
constexpr double kClampLo = -0.5;
constexpr double kClampHi = 1.5;

struct TransmitTrace {
  Payload received;                 // equalized and clamped
  std::vector<double> gains;        // per-symbol h
  std::vector<double> raw_error;    // (y/h - x) before clamping
};

/// Per-symbol y = h*x + n, coherent equalization y/h, clamp to
/// [kClampLo, kClampHi]. Noise variance is 10^(-snr_db/10) against a unit
/// power reference. Infinite SNR copies the payload bit for bit.
Payload transmit(const Payload& payload, const ChannelConfig& cfg, Rng& rng);

/// Same channel, but keeps per-symbol gains and pre-clamp errors for
/// calibration tests.
TransmitTrace transmit_traced(const Payload& payload, const ChannelConfig& cfg,
                              Rng& rng);

/// Arbitrary pixel list -> interleaved (x/width, y/height) symbols at
/// 32 bits per symbol. Out-of-bounds pixels are clamped and flagged.
Payload encode_pixels(const std::vector<Vec2>& pixels, int width, int height);
std::vector<Vec2> decode_pixels(const Payload& payload, int width, int height);

/// 9 keypoints -> 18 symbols (x/width, y/height interleaved), 32 bits each.
Payload encode_keypoints(const scene::KeypointFrame& frame, int width,
                         int height);
scene::KeypointFrame decode_keypoints(const Payload& payload, int width,
                                      int height);

constexpr std::int64_t kKeypointPayloadBits = scene::kKeypointCount * 2 * 32;

std::int64_t dense_image_bits(int width, int height);

} // namespace semcom::channel
