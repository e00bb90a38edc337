#pragma once

#include <array>
#include <span>

#include "pf0/pucch0.hpp"

namespace pf0 {

/// X(k) = sum_n x(n) e^{-j 2 pi k n / 12}. Throws ArgumentError unless x has 12 samples.
RbSamples dft12(std::span<const cf64> x);

struct DftDecoderOptions {
  /// Accumulate power over every received symbol; false uses the first symbol only.
  bool combine_symbols = true;
};

struct DftDecision {
  int mcs = 0;                      ///< argmax over the format's candidate set
  int raw_peak = 0;                 ///< argmax over all 12 translated bins
  std::array<double, kSubcarriersPerRb> metric{};  ///< power per translated shift m

  double winner_metric() const { return metric[static_cast<std::size_t>(mcs)]; }
};

/**
 * Conventional correlation receiver.
 *
 * For each symbol: z(n) = y(n) conj(r_bar(n)), X = dft12(z); the power |X(k)|^2
 * is credited to m = (k - m0 - n_cs(symbol)) mod 12. The decision is the
 * candidate m_cs with the largest accumulated power (ties go to the smaller
 * shift). Throws ConfigError if the format has no candidates and
 * ArgumentError if the symbol count does not match cfg.
 */
DftDecision decode_dft(const Format0Signal& signal, const Pucch0Config& cfg, UciFormat format,
                       const DftDecoderOptions& options = {},
                       const McsMapping& mapping = McsMapping::standard());

}  // namespace pf0
