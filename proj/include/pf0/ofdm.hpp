#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <span>
#include <vector>

#include "pf0/dataset.hpp"
#include "pf0/pucch0.hpp"

namespace pf0 {

/// Grid placement of the single PUCCH resource block inside an OFDM symbol.
struct OfdmParams {
  int fft_size = 256;
  std::vector<int> cp_lengths = {18};  ///< applied cyclically, symbol i uses cp_lengths[i % size]
  int k0 = 0;                          ///< FFT bin of subcarrier 0 of the RB

  /// Throws ArgumentError unless fft_size >= 12 + k0, k0 >= 0 and 0 <= cp < fft_size.
  void validate() const;
  int cp_for(std::size_t symbol) const { return cp_lengths[symbol % cp_lengths.size()]; }
  /// Samples taken by the first n symbols.
  std::size_t samples_for(std::size_t n) const;
};

/// Unitary IFFT per symbol (subcarrier n on bin k0 + n, other bins zero), CP prepended.
std::vector<cf64> ofdm_modulate(const Format0Signal& signal, const OfdmParams& params);

/// CP removal, unitary FFT, RB extraction. Throws ArgumentError if iq is shorter
/// than num_symbols symbols.
Format0Signal ofdm_demodulate(std::span<const cf64> iq, std::size_t num_symbols, const OfdmParams& params);

/// Number of whole symbols in `sample_count` complex samples; FormatError if a
/// partial symbol is left over.
std::size_t symbols_in_capture(std::size_t sample_count, const OfdmParams& params);

// IQ capture file: "PF0Q", u32 version, u64 count of f32 values, then I/Q pairs
// as little-endian f32.
inline constexpr std::uint32_t kIqFileVersion = 1;

std::vector<std::uint8_t> serialize_iq(std::span<const cf64> iq);
/// Throws FormatError on bad magic, odd value count or a length mismatch.
std::vector<cf64> deserialize_iq(std::span<const std::uint8_t> bytes);
void write_iq(const std::filesystem::path& path, std::span<const cf64> iq);
std::vector<cf64> read_iq(const std::filesystem::path& path);

/// Where one captured symbol sits in the frame, and its class if known.
struct ScheduleEntry {
  int slot = 13;
  int symbol = 0;
  std::optional<int> label;

  bool operator==(const ScheduleEntry&) const = default;
};

/// CSV with header "slot,symbol,label"; an empty label field means unknown.
std::vector<ScheduleEntry> read_schedule_csv(const std::filesystem::path& path);
void write_schedule_csv(const std::filesystem::path& path, std::span<const ScheduleEntry> schedule);

struct IngestConfig {
  OfdmParams ofdm;
  FeatureTags tags;
  std::uint32_t class_count = 4;
};

/// One instance per captured symbol. The schedule must have exactly one entry
/// per symbol in the capture (FormatError otherwise). snr_db is NaN.
LabeledDataset ingest_iq(std::span<const cf64> iq, std::span<const ScheduleEntry> schedule,
                         const IngestConfig& cfg);
LabeledDataset ingest_iq(const std::filesystem::path& path, std::span<const ScheduleEntry> schedule,
                         const IngestConfig& cfg);

struct SyntheticCapture {
  std::vector<cf64> iq;
  std::vector<ScheduleEntry> schedule;
};

/// Modulates `transmissions` draws of the recipe (Capture seed namespace) back to
/// back, every occupied symbol in turn.
SyntheticCapture synthesize_capture(const GenerationConfig& gen, std::size_t transmissions,
                                    const OfdmParams& params);

}  // namespace pf0
