#include "pf0/dft_decoder.hpp"

#include <complex>
#include <string>

#include "pf0/error.hpp"

namespace pf0 {

RbSamples dft12(std::span<const cf64> x) {
  if (x.size() != static_cast<std::size_t>(kSubcarriersPerRb)) {
    throw ArgumentError("dft12 needs 12 samples, got " + std::to_string(x.size()));
  }
  RbSamples X{};
  for (int k = 0; k < kSubcarriersPerRb; ++k) {
    cf64 acc{};
    for (int n = 0; n < kSubcarriersPerRb; ++n) acc += x[n] * unit_root12(-k * n);
    X[k] = acc;
  }
  return X;
}

DftDecision decode_dft(const Format0Signal& signal, const Pucch0Config& cfg, UciFormat format,
                       const DftDecoderOptions& options, const McsMapping& mapping) {
  cfg.validate();
  if (signal.symbols.size() != static_cast<std::size_t>(cfg.num_symbols)) {
    throw ArgumentError("signal has " + std::to_string(signal.symbols.size()) +
                        " symbol(s) but the schedule says " + std::to_string(cfg.num_symbols));
  }
  const auto cands = mapping.candidates(format);
  if (cands.empty()) {
    throw ConfigError("format " + std::string(to_string(format)) + " has no candidate cyclic shifts");
  }

  const RbSamples base = base_sequence(cfg.group_u);
  const int used = options.combine_symbols ? cfg.num_symbols : 1;

  DftDecision d;
  d.metric.fill(0.0);
  for (int l = 0; l < used; ++l) {
    RbSamples z{};
    for (int n = 0; n < kSubcarriersPerRb; ++n) z[n] = signal.symbols[l][n] * std::conj(base[n]);
    const RbSamples X = dft12(z);
    // A tone e^{j 2 pi a n / 12} lands in bin k = a, and a = m0 + m + n_cs.
    const int offset = cfg.m0 + compute_ncs(cfg, l);
    for (int k = 0; k < kSubcarriersPerRb; ++k) {
      const int m = ((k - offset) % kSubcarriersPerRb + kSubcarriersPerRb) % kSubcarriersPerRb;
      d.metric[m] += std::norm(X[k]);
    }
  }

  d.mcs = cands.front();
  for (int m : cands) {
    if (d.metric[m] > d.metric[d.mcs]) d.mcs = m;
  }
  d.raw_peak = 0;
  for (int m = 1; m < kSubcarriersPerRb; ++m) {
    if (d.metric[m] > d.metric[d.raw_peak]) d.raw_peak = m;
  }
  return d;
}

}  // namespace pf0
