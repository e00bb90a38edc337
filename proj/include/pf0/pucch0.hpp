#pragma once

#include <array>
#include <complex>
#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace pf0 {

using cf64 = std::complex<double>;

inline constexpr int kSubcarriersPerRb = 12;
inline constexpr int kSymbolsPerSlot = 14;
inline constexpr int kNumSequenceGroups = 30;
inline constexpr int kMaxSlotIndex = 159;
inline constexpr int kMaxHoppingId = 1023;

/// Frequency-domain samples of one resource block in one OFDM symbol.
using RbSamples = std::array<cf64, kSubcarriersPerRb>;

/// e^{j 2 pi k / 12}, exact for k = 0, 3, 6, 9.
cf64 unit_root12(int k);

// ---------------------------------------------------------------------------
// UCI content and the UCI <-> m_cs mapping

enum class UciFormat : std::uint8_t { HarqOnly1, HarqOnly2, SrOnly, Harq1PlusSr, Harq2PlusSr };

inline constexpr std::array<UciFormat, 5> kAllUciFormats = {
    UciFormat::HarqOnly1, UciFormat::HarqOnly2, UciFormat::SrOnly, UciFormat::Harq1PlusSr,
    UciFormat::Harq2PlusSr};

int harq_bit_count(UciFormat format);
bool carries_sr(UciFormat format);
std::string_view to_string(UciFormat format);
/// Accepts harq1, harq2, sr, harq1sr, harq2sr.
UciFormat parse_uci_format(std::string_view name);

class UciContent {
 public:
  /// Throws ArgumentError when the bit count does not match the format, a bit is
  /// not 0/1, SR is set on a HARQ-only format, or SR is negative on SrOnly.
  static UciContent make(UciFormat format, std::span<const std::uint8_t> harq_bits, bool sr);

  UciFormat format() const { return format_; }
  std::span<const std::uint8_t> harq() const { return {harq_.data(), harq_count_}; }
  bool sr() const { return sr_; }

  /// "harq=01 sr=+" style summary.
  std::string describe() const;

  bool operator==(const UciContent&) const = default;

 private:
  UciContent() = default;

  UciFormat format_ = UciFormat::HarqOnly1;
  std::array<std::uint8_t, 2> harq_{};
  std::uint8_t harq_count_ = 0;
  bool sr_ = false;
};

/// Every valid UciContent of a format, in a fixed order.
std::vector<UciContent> all_uci(UciFormat format);

/**
 * Assignment of UCI contents to cyclic shifts m_cs.
 *
 * standard() holds the NR assignment (HARQ-ACK tables of TS 38.213 9.2.3 and
 * 9.2.5): 1 bit {0->0, 1->6}; 2 bits {00->0, 01->3, 11->6, 10->9}; a positive
 * SR adds 3 (1 bit) or 1 (2 bits); SR alone uses 0. Other mappings can be
 * injected as long as every entry of a format has a distinct shift.
 */
class McsMapping {
 public:
  struct Entry {
    UciContent uci;
    int mcs;
  };

  static const McsMapping& standard();

  explicit McsMapping(std::vector<Entry> entries);

  int to_mcs(const UciContent& uci) const;
  UciContent to_uci(UciFormat format, int mcs) const;
  /// Ascending m_cs values used by the format; class index = position in this list.
  std::vector<int> candidates(UciFormat format) const;

 private:
  std::vector<Entry> entries_;
};

int uci_to_mcs(const UciContent& uci, const McsMapping& mapping = McsMapping::standard());
/// Throws DecodeError when m_cs is outside the format's candidate set.
UciContent mcs_to_uci(UciFormat format, int mcs, const McsMapping& mapping = McsMapping::standard());
std::vector<int> candidate_shifts(UciFormat format,
                                  const McsMapping& mapping = McsMapping::standard());

/// Class label of an m_cs value (its index in the candidate set).
int mcs_to_class(UciFormat format, int mcs, const McsMapping& mapping = McsMapping::standard());
int class_to_mcs(UciFormat format, int label, const McsMapping& mapping = McsMapping::standard());

// ---------------------------------------------------------------------------
// Scheduling and sequence generation

struct Pucch0Config {
  int m0 = 0;               ///< initial cyclic shift, [0, 12)
  int slot = 13;            ///< slot number in the frame, [0, 159]
  int start_symbol = 0;     ///< l', first symbol of the transmission in the slot
  int num_symbols = 1;      ///< 1 or 2
  int hopping_id = 0;       ///< n_ID, seeds the cyclic-shift hopping PRBS
  int group_u = 0;          ///< sequence group u, [0, 30)
  static constexpr int sequence_v = 0;

  /// Throws ArgumentError on any out-of-range field.
  void validate() const;
};

/// phi(n) row of the length-12 low-PAPR table for group u.
const std::array<std::int8_t, kSubcarriersPerRb>& low_papr_phi(int group_u);

/// r_bar(n) = e^{j phi(n) pi / 4}; real and imaginary parts are exactly +-1/sqrt(2).
RbSamples base_sequence(int group_u);

/// n_cs = sum_{m<8} 2^m c(8 * 14 * slot + 8 * symbol_in_slot + m), c seeded by hopping_id.
int compute_ncs(int hopping_id, int slot, int symbol_in_slot);
/// n_cs for symbol l of the transmission (symbol l + l' of the slot).
int compute_ncs(const Pucch0Config& cfg, int symbol_in_transmission);

/// (m0 + m_cs + n_cs) mod 12. The cyclic shift itself is alpha = 2 pi index / 12.
int alpha_index(int m0, int mcs, int ncs);

struct Format0Signal {
  std::vector<RbSamples> symbols;  ///< one entry per occupied OFDM symbol
};

/// r(n) = e^{j alpha n} r_bar(n) for every occupied symbol, each with its own n_cs.
Format0Signal generate_format0(const Pucch0Config& cfg, const UciContent& uci,
                               const McsMapping& mapping = McsMapping::standard());

/// Same sequence, cyclic shift already resolved.
RbSamples shifted_sequence(int group_u, int alpha);

}  // namespace pf0
