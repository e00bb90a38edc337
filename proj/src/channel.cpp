#include "pf0/channel.hpp"

#include <array>
#include <cmath>
#include <numbers>
#include <string>

#include "pf0/error.hpp"

namespace pf0 {

namespace {

constexpr std::array<TdlTap, 24> kTdlC = {{
    {0.0000, -4.4},  {0.2099, -1.2},  {0.2219, -3.5},  {0.2329, -5.2},  {0.2176, -2.5},
    {0.6366, 0.0},   {0.6448, -2.2},  {0.6560, -3.9},  {0.6584, -7.4},  {0.7935, -7.1},
    {0.8213, -10.7}, {0.9336, -11.1}, {1.2285, -5.1},  {1.3083, -6.8},  {2.1704, -8.7},
    {2.7105, -13.2}, {4.2589, -13.9}, {4.6003, -13.9}, {5.4902, -15.8}, {5.6077, -17.1},
    {6.3065, -16.0}, {6.6374, -15.7}, {7.0427, -21.6}, {8.6523, -22.8},
}};

// Linear tap amplitudes sqrt(P_p) with sum P_p = 1.
const std::array<double, kTdlC.size()>& tdl_c_amplitudes() {
  static const auto amps = [] {
    std::array<double, kTdlC.size()> a{};
    double total = 0.0;
    for (std::size_t p = 0; p < kTdlC.size(); ++p) {
      a[p] = std::pow(10.0, kTdlC[p].power_db / 10.0);
      total += a[p];
    }
    for (auto& v : a) v = std::sqrt(v / total);
    return a;
  }();
  return amps;
}

cf64 complex_gaussian(Rng& rng, double variance) {
  const auto [g1, g2] = rng.gaussian_pair();
  const double s = std::sqrt(variance / 2.0);
  return {s * g1, s * g2};
}

}  // namespace

std::string_view to_string(ChannelProfile profile) {
  switch (profile) {
    case ChannelProfile::AwgnOnly: return "awgn";
    case ChannelProfile::FlatRayleigh: return "flat";
    case ChannelProfile::TdlC: return "tdlc";
  }
  return "?";
}

ChannelProfile parse_channel_profile(std::string_view name) {
  if (name == "awgn") return ChannelProfile::AwgnOnly;
  if (name == "flat") return ChannelProfile::FlatRayleigh;
  if (name == "tdlc") return ChannelProfile::TdlC;
  throw ArgumentError("unknown channel '" + std::string(name) + "' (expected awgn, flat or tdlc)");
}

void ChannelConfig::validate() const {
  if (profile == ChannelProfile::TdlC && !(delay_spread_s > 0.0)) {
    throw ArgumentError("TDL-C needs a positive delay spread");
  }
  if (!(subcarrier_spacing_hz > 0.0)) throw ArgumentError("subcarrier spacing must be positive");
}

double SnrSpec::noise_variance() const {
  if (!snr_db) return 0.0;
  if (!std::isfinite(*snr_db)) {
    if (*snr_db > 0) return 0.0;
    throw ArgumentError("SNR must be finite or +inf");
  }
  return std::pow(10.0, -*snr_db / 10.0);
}

std::span<const TdlTap> tdl_c_taps() { return kTdlC; }

Format0Signal apply_awgn(const Format0Signal& signal, const SnrSpec& snr, Rng& rng) {
  const double var = snr.noise_variance();
  Format0Signal out = signal;
  if (var == 0.0) return out;
  for (auto& sym : out.symbols) {
    for (auto& x : sym) x += complex_gaussian(rng, var);
  }
  return out;
}

RbSamples tdl_frequency_response(const ChannelConfig& cfg, Rng& rng) {
  cfg.validate();
  RbSamples H{};
  switch (cfg.profile) {
    case ChannelProfile::AwgnOnly:
      throw ArgumentError("AWGN-only channel has no fading response");
    case ChannelProfile::FlatRayleigh: {
      H.fill(complex_gaussian(rng, 1.0));
      return H;
    }
    case ChannelProfile::TdlC: {
      const auto& amp = tdl_c_amplitudes();
      H.fill(cf64{});
      for (std::size_t p = 0; p < kTdlC.size(); ++p) {
        const cf64 g = amp[p] * complex_gaussian(rng, 1.0);
        const double tau = kTdlC[p].delay * cfg.delay_spread_s;
        for (int k = 0; k < kSubcarriersPerRb; ++k) {
          const double ph = -2.0 * std::numbers::pi * k * cfg.subcarrier_spacing_hz * tau;
          H[k] += g * cf64(std::cos(ph), std::sin(ph));
        }
      }
      return H;
    }
  }
  throw ArgumentError("unknown channel profile");
}

RbSamples realize_channel(const ChannelConfig& cfg, Rng& rng) {
  if (cfg.profile == ChannelProfile::AwgnOnly) {
    RbSamples ones;
    ones.fill(cf64(1.0, 0.0));
    return ones;
  }
  return tdl_frequency_response(cfg, rng);
}

Format0Signal apply_channel(const Format0Signal& signal, std::span<const cf64> H, const SnrSpec& snr,
                            Rng& rng) {
  if (H.size() != static_cast<std::size_t>(kSubcarriersPerRb)) {
    throw ArgumentError("channel response must have 12 gains, got " + std::to_string(H.size()));
  }
  Format0Signal faded = signal;
  for (auto& sym : faded.symbols) {
    for (int n = 0; n < kSubcarriersPerRb; ++n) sym[n] *= H[n];
  }
  return apply_awgn(faded, snr, rng);
}

}  // namespace pf0
