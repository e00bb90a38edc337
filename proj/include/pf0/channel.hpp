#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string_view>

#include "pf0/pucch0.hpp"
#include "pf0/rng.hpp"

namespace pf0 {

enum class ChannelProfile : std::uint8_t { AwgnOnly = 0, FlatRayleigh = 1, TdlC = 2 };

std::string_view to_string(ChannelProfile profile);
/// Accepts awgn, flat, tdlc.
ChannelProfile parse_channel_profile(std::string_view name);

struct ChannelConfig {
  ChannelProfile profile = ChannelProfile::TdlC;
  double delay_spread_s = 300e-9;       ///< scales the normalized TDL-C delays
  double subcarrier_spacing_hz = 30e3;
  static constexpr bool block_fading = true;  ///< one realization per instance, no Doppler

  void validate() const;
};

/// Per-RE SNR with unit signal power: noise variance 10^(-snr_db/10). nullopt = noiseless.
struct SnrSpec {
  std::optional<double> snr_db;

  static SnrSpec noiseless() { return {}; }
  static SnrSpec db(double v) { return {v}; }

  double noise_variance() const;
};

/// Normalized delay (units of delay spread) and power (dB) of one TDL-C tap.
struct TdlTap {
  double delay;
  double power_db;
};

/// The 24-tap TDL-C profile (TS 38.901 Table 7.7.2-3).
std::span<const TdlTap> tdl_c_taps();

/// y = x + w, w ~ CN(0, sigma^2) with sigma^2/2 per real dimension.
Format0Signal apply_awgn(const Format0Signal& signal, const SnrSpec& snr, Rng& rng);

/**
 * One block-fading frequency response over the 12 subcarriers:
 * H(k) = sum_p sqrt(P_p) g_p exp(-j 2 pi k scs tau_p), g_p ~ CN(0, 1), sum P_p = 1.
 * FlatRayleigh draws one gain for all k. AwgnOnly is rejected.
 */
RbSamples tdl_frequency_response(const ChannelConfig& cfg, Rng& rng);

/// H = all ones for AwgnOnly, otherwise tdl_frequency_response().
RbSamples realize_channel(const ChannelConfig& cfg, Rng& rng);

/// y(n) = H(n) x(n) + w(n), same H for every symbol, fresh noise per symbol.
Format0Signal apply_channel(const Format0Signal& signal, std::span<const cf64> H, const SnrSpec& snr,
                            Rng& rng);

}  // namespace pf0
