#include "pf0/pucch0.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>

#include "pf0/error.hpp"
#include "pf0/prbs.hpp"

namespace pf0 {

namespace {

// phi(n) for M_ZC = 12, TS 38.211 Table 5.2.2.2-2, rows u = 0..29.
constexpr std::int8_t kLowPaprPhi[kNumSequenceGroups][kSubcarriersPerRb] = {
    {-3, 1, -3, -3, -3, 3, -3, -1, 1, 1, 1, -3},
    {-3, 3, 1, -3, 1, 3, -1, -1, 1, 3, 3, 3},
    {-3, 3, 3, 1, -3, 3, -1, 1, 3, -3, 3, -3},
    {-3, -3, -1, 3, 3, 3, -3, 3, -3, 1, -1, -3},
    {-3, -1, -1, 1, 3, 1, 1, -1, 1, -1, -3, 1},
    {-3, -3, 3, 1, -3, -3, -3, -1, 3, -1, 1, 3},
    {1, -1, 3, -1, -1, -1, -3, -1, 1, 1, 1, -3},
    {-1, -3, 3, -1, -3, -3, -3, -1, 1, -1, 1, -3},
    {-3, -1, 3, 1, -3, -1, -3, 3, 1, 3, 3, 1},
    {-3, -1, -1, -3, -3, -1, -3, 3, 1, 3, -1, -3},
    {-3, 3, -3, 3, 3, -3, -1, -1, 3, 3, 1, -3},
    {-3, -1, -3, -1, -1, -3, 3, 3, -1, -1, 1, -3},
    {-3, -1, 3, -3, -3, -1, -3, 1, -1, -3, 3, 3},
    {-3, 1, -1, -1, 3, 3, -3, -1, -1, -3, -1, -3},
    {1, 3, -3, 1, 3, 3, 3, 1, -1, 1, -1, 3},
    {-3, 1, 3, -1, -1, -3, -3, -1, -1, 3, 1, -3},
    {-1, -1, -1, -1, 1, -3, -1, 3, 3, -1, -3, 1},
    {-1, 1, 1, -1, 1, 3, 3, -1, -1, -3, 1, -3},
    {-3, 1, 3, 3, -1, -1, -3, 3, 3, -3, 3, -3},
    {-3, -3, 3, -3, -1, 3, 3, 3, -1, -3, 1, -3},
    {3, 1, 3, 1, 3, -3, -1, 1, 3, 1, -1, -3},
    {-3, 3, 1, 3, -3, 1, 1, 1, 1, 3, -3, 3},
    {-3, 3, 3, 3, -1, -3, -3, -1, -3, 1, 3, -3},
    {3, -1, -3, 3, -3, -1, 3, 3, 3, -3, -1, -3},
    {-3, -1, 1, -3, 1, 3, 3, 3, -1, -3, 3, 3},
    {-3, 3, 1, -1, 3, 3, -3, 1, -1, 1, -1, 1},
    {-1, 1, 3, -3, 1, -1, 1, -1, -1, -3, 1, -1},
    {-3, -3, 3, 3, 3, -3, -1, 1, -3, 3, 1, -3},
    {1, -1, 3, 1, 1, -1, -1, -1, 1, 3, -3, 1},
    {-3, 3, -3, 3, -3, -3, 3, -1, -1, 1, 3, -3},
};

const std::array<cf64, kSubcarriersPerRb>& root_table() {
  static const std::array<cf64, kSubcarriersPerRb> table = [] {
    std::array<cf64, kSubcarriersPerRb> t{};
    const double h = std::sqrt(3.0) / 2.0;
    // Written out so the quadrant points come out exact.
    t[0] = {1.0, 0.0};
    t[1] = {h, 0.5};
    t[2] = {0.5, h};
    t[3] = {0.0, 1.0};
    t[4] = {-0.5, h};
    t[5] = {-h, 0.5};
    t[6] = {-1.0, 0.0};
    t[7] = {-h, -0.5};
    t[8] = {-0.5, -h};
    t[9] = {0.0, -1.0};
    t[10] = {0.5, -h};
    t[11] = {h, -0.5};
    return t;
  }();
  return table;
}

int mod12(long long v) {
  const long long r = v % kSubcarriersPerRb;
  return static_cast<int>(r < 0 ? r + kSubcarriersPerRb : r);
}

}  // namespace

cf64 unit_root12(int k) { return root_table()[static_cast<std::size_t>(mod12(k))]; }

// ---------------------------------------------------------------------------

int harq_bit_count(UciFormat format) {
  switch (format) {
    case UciFormat::HarqOnly1:
    case UciFormat::Harq1PlusSr:
      return 1;
    case UciFormat::HarqOnly2:
    case UciFormat::Harq2PlusSr:
      return 2;
    case UciFormat::SrOnly:
      return 0;
  }
  throw ArgumentError("unknown UCI format");
}

bool carries_sr(UciFormat format) {
  return format == UciFormat::SrOnly || format == UciFormat::Harq1PlusSr ||
         format == UciFormat::Harq2PlusSr;
}

std::string_view to_string(UciFormat format) {
  switch (format) {
    case UciFormat::HarqOnly1: return "harq1";
    case UciFormat::HarqOnly2: return "harq2";
    case UciFormat::SrOnly: return "sr";
    case UciFormat::Harq1PlusSr: return "harq1sr";
    case UciFormat::Harq2PlusSr: return "harq2sr";
  }
  return "?";
}

UciFormat parse_uci_format(std::string_view name) {
  for (UciFormat f : kAllUciFormats) {
    if (to_string(f) == name) return f;
  }
  throw ArgumentError("unknown UCI format '" + std::string(name) +
                      "' (expected harq1, harq2, sr, harq1sr or harq2sr)");
}

UciContent UciContent::make(UciFormat format, std::span<const std::uint8_t> harq_bits, bool sr) {
  const int expected = harq_bit_count(format);
  if (static_cast<int>(harq_bits.size()) != expected) {
    throw ArgumentError("UCI format " + std::string(to_string(format)) + " carries " +
                        std::to_string(expected) + " HARQ bit(s), got " +
                        std::to_string(harq_bits.size()));
  }
  for (auto b : harq_bits) {
    if (b > 1) throw ArgumentError("HARQ bits must be 0 or 1");
  }
  if (!carries_sr(format) && sr) {
    throw ArgumentError("HARQ-only UCI cannot carry a scheduling request");
  }
  if (format == UciFormat::SrOnly && !sr) {
    throw ArgumentError("SR-only UCI with negative SR is not transmitted");
  }
  UciContent u;
  u.format_ = format;
  u.harq_count_ = static_cast<std::uint8_t>(expected);
  std::copy(harq_bits.begin(), harq_bits.end(), u.harq_.begin());
  u.sr_ = sr;
  return u;
}

std::string UciContent::describe() const {
  std::string s = "harq=";
  if (harq_count_ == 0) s += "-";
  for (auto b : harq()) s += static_cast<char>('0' + b);
  s += " sr=";
  s += carries_sr(format_) ? (sr_ ? "+" : "-") : "n/a";
  return s;
}

std::vector<UciContent> all_uci(UciFormat format) {
  std::vector<UciContent> out;
  const int nbits = harq_bit_count(format);
  const std::vector<bool> sr_values =
      format == UciFormat::SrOnly ? std::vector<bool>{true}
      : carries_sr(format)        ? std::vector<bool>{false, true}
                                  : std::vector<bool>{false};
  for (bool sr : sr_values) {
    for (int code = 0; code < (1 << nbits); ++code) {
      std::array<std::uint8_t, 2> bits{};
      for (int i = 0; i < nbits; ++i) bits[i] = static_cast<std::uint8_t>((code >> (nbits - 1 - i)) & 1);
      out.push_back(UciContent::make(format, std::span(bits.data(), static_cast<std::size_t>(nbits)), sr));
    }
  }
  return out;
}

// ---------------------------------------------------------------------------

const McsMapping& McsMapping::standard() {
  static const McsMapping mapping = [] {
    std::vector<Entry> e;
    auto add = [&](UciFormat f, std::initializer_list<std::uint8_t> bits, bool sr, int mcs) {
      e.push_back({UciContent::make(f, std::span(bits.begin(), bits.size()), sr), mcs});
    };
    add(UciFormat::HarqOnly1, {0}, false, 0);
    add(UciFormat::HarqOnly1, {1}, false, 6);

    add(UciFormat::HarqOnly2, {0, 0}, false, 0);
    add(UciFormat::HarqOnly2, {0, 1}, false, 3);
    add(UciFormat::HarqOnly2, {1, 1}, false, 6);
    add(UciFormat::HarqOnly2, {1, 0}, false, 9);

    add(UciFormat::SrOnly, {}, true, 0);

    add(UciFormat::Harq1PlusSr, {0}, false, 0);
    add(UciFormat::Harq1PlusSr, {1}, false, 6);
    add(UciFormat::Harq1PlusSr, {0}, true, 3);
    add(UciFormat::Harq1PlusSr, {1}, true, 9);

    add(UciFormat::Harq2PlusSr, {0, 0}, false, 0);
    add(UciFormat::Harq2PlusSr, {0, 1}, false, 3);
    add(UciFormat::Harq2PlusSr, {1, 1}, false, 6);
    add(UciFormat::Harq2PlusSr, {1, 0}, false, 9);
    add(UciFormat::Harq2PlusSr, {0, 0}, true, 1);
    add(UciFormat::Harq2PlusSr, {0, 1}, true, 4);
    add(UciFormat::Harq2PlusSr, {1, 1}, true, 7);
    add(UciFormat::Harq2PlusSr, {1, 0}, true, 10);
    return McsMapping(std::move(e));
  }();
  return mapping;
}

McsMapping::McsMapping(std::vector<Entry> entries) : entries_(std::move(entries)) {
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    if (entries_[i].mcs < 0 || entries_[i].mcs >= kSubcarriersPerRb) {
      throw ArgumentError("m_cs must lie in [0, 12)");
    }
    for (std::size_t j = 0; j < i; ++j) {
      if (entries_[j].uci == entries_[i].uci) throw ArgumentError("duplicate UCI in m_cs mapping");
      if (entries_[j].uci.format() == entries_[i].uci.format() && entries_[j].mcs == entries_[i].mcs) {
        throw ArgumentError("two UCI contents of one format share an m_cs");
      }
    }
  }
}

int McsMapping::to_mcs(const UciContent& uci) const {
  for (const auto& e : entries_) {
    if (e.uci == uci) return e.mcs;
  }
  throw ArgumentError("UCI content " + uci.describe() + " has no m_cs assignment");
}

UciContent McsMapping::to_uci(UciFormat format, int mcs) const {
  for (const auto& e : entries_) {
    if (e.uci.format() == format && e.mcs == mcs) return e.uci;
  }
  throw DecodeError("m_cs " + std::to_string(mcs) + " is not a candidate for format " +
                    std::string(to_string(format)));
}

std::vector<int> McsMapping::candidates(UciFormat format) const {
  std::vector<int> out;
  for (const auto& e : entries_) {
    if (e.uci.format() == format) out.push_back(e.mcs);
  }
  std::sort(out.begin(), out.end());
  return out;
}

int uci_to_mcs(const UciContent& uci, const McsMapping& mapping) { return mapping.to_mcs(uci); }

UciContent mcs_to_uci(UciFormat format, int mcs, const McsMapping& mapping) {
  return mapping.to_uci(format, mcs);
}

std::vector<int> candidate_shifts(UciFormat format, const McsMapping& mapping) {
  return mapping.candidates(format);
}

int mcs_to_class(UciFormat format, int mcs, const McsMapping& mapping) {
  const auto c = mapping.candidates(format);
  const auto it = std::find(c.begin(), c.end(), mcs);
  if (it == c.end()) {
    throw DecodeError("m_cs " + std::to_string(mcs) + " is not a candidate for format " +
                      std::string(to_string(format)));
  }
  return static_cast<int>(it - c.begin());
}

int class_to_mcs(UciFormat format, int label, const McsMapping& mapping) {
  const auto c = mapping.candidates(format);
  if (label < 0 || label >= static_cast<int>(c.size())) {
    throw ArgumentError("class label " + std::to_string(label) + " out of range for format " +
                        std::string(to_string(format)));
  }
  return c[static_cast<std::size_t>(label)];
}

// ---------------------------------------------------------------------------

void Pucch0Config::validate() const {
  if (m0 < 0 || m0 >= kSubcarriersPerRb) throw ArgumentError("m0 must lie in [0, 12)");
  if (slot < 0 || slot > kMaxSlotIndex) throw ArgumentError("slot must lie in [0, 159]");
  if (num_symbols != 1 && num_symbols != 2) throw ArgumentError("num_symbols must be 1 or 2");
  if (start_symbol < 0 || start_symbol + num_symbols > kSymbolsPerSlot) {
    throw ArgumentError("start_symbol + num_symbols must not exceed 14");
  }
  if (hopping_id < 0 || hopping_id > kMaxHoppingId) throw ArgumentError("hopping_id must lie in [0, 1023]");
  if (group_u < 0 || group_u >= kNumSequenceGroups) throw ArgumentError("group_u must lie in [0, 30)");
}

const std::array<std::int8_t, kSubcarriersPerRb>& low_papr_phi(int group_u) {
  if (group_u < 0 || group_u >= kNumSequenceGroups) {
    throw ArgumentError("group_u must lie in [0, 30), got " + std::to_string(group_u));
  }
  // Row layout of the table matches std::array<int8_t, 12>.
  static const auto rows = [] {
    std::array<std::array<std::int8_t, kSubcarriersPerRb>, kNumSequenceGroups> r{};
    for (int u = 0; u < kNumSequenceGroups; ++u) {
      std::copy(std::begin(kLowPaprPhi[u]), std::end(kLowPaprPhi[u]), r[u].begin());
    }
    return r;
  }();
  return rows[static_cast<std::size_t>(group_u)];
}

RbSamples base_sequence(int group_u) {
  const auto& phi = low_papr_phi(group_u);
  const double s = 1.0 / std::numbers::sqrt2;
  RbSamples r{};
  for (int n = 0; n < kSubcarriersPerRb; ++n) {
    // e^{j phi pi/4} for phi in {-3,-1,1,3}: quadrant signs only.
    const int p = phi[n];
    const double re = (p == 1 || p == -1) ? s : -s;
    const double im = p > 0 ? s : -s;
    r[n] = {re, im};
  }
  return r;
}

int compute_ncs(int hopping_id, int slot, int symbol_in_slot) {
  if (hopping_id < 0 || hopping_id > kMaxHoppingId) throw ArgumentError("hopping_id must lie in [0, 1023]");
  if (slot < 0 || slot > kMaxSlotIndex) throw ArgumentError("slot must lie in [0, 159]");
  if (symbol_in_slot < 0 || symbol_in_slot >= kSymbolsPerSlot) throw ArgumentError("symbol must lie in [0, 14)");
  GoldSequence c(static_cast<std::uint32_t>(hopping_id));
  c.advance(8ull * kSymbolsPerSlot * static_cast<unsigned>(slot) + 8ull * static_cast<unsigned>(symbol_in_slot));
  return static_cast<int>(c.next_bits(8));
}

int compute_ncs(const Pucch0Config& cfg, int symbol_in_transmission) {
  if (symbol_in_transmission < 0 || symbol_in_transmission >= cfg.num_symbols) {
    throw ArgumentError("symbol index outside the transmission");
  }
  return compute_ncs(cfg.hopping_id, cfg.slot, cfg.start_symbol + symbol_in_transmission);
}

int alpha_index(int m0, int mcs, int ncs) {
  if (m0 < 0 || m0 >= kSubcarriersPerRb) throw ArgumentError("m0 must lie in [0, 12)");
  return mod12(static_cast<long long>(m0) + mcs + ncs);
}

RbSamples shifted_sequence(int group_u, int alpha) {
  RbSamples r = base_sequence(group_u);
  for (int n = 0; n < kSubcarriersPerRb; ++n) r[n] *= unit_root12(alpha * n);
  return r;
}

Format0Signal generate_format0(const Pucch0Config& cfg, const UciContent& uci, const McsMapping& mapping) {
  cfg.validate();
  const int mcs = mapping.to_mcs(uci);
  Format0Signal sig;
  sig.symbols.reserve(static_cast<std::size_t>(cfg.num_symbols));
  for (int l = 0; l < cfg.num_symbols; ++l) {
    sig.symbols.push_back(shifted_sequence(cfg.group_u, alpha_index(cfg.m0, mcs, compute_ncs(cfg, l))));
  }
  return sig;
}

}  // namespace pf0
