#pragma once

#include <cstdint>
#include <vector>

namespace pf0 {

/**
 * Length-31 Gold sequence c(n) of the NR physical layer.
 *
 * x1 starts from the fixed state (1, 0, ..., 0), x2 from the 31 bits of
 * c_init (bit i -> x2(i)), and the first 1600 outputs are discarded:
 *
 *   x1(n+31) = x1(n+3) ^ x1(n)
 *   x2(n+31) = x2(n+3) ^ x2(n+2) ^ x2(n+1) ^ x2(n)
 *   c(n)     = x1(n+1600) ^ x2(n+1600)
 *
 * The generator advances 28 bits per step on packed 31-bit windows.
 */
class GoldSequence {
 public:
  static constexpr std::uint32_t kDiscard = 1600;

  explicit GoldSequence(std::uint32_t c_init);

  /// Skips `count` outputs.
  void advance(std::uint64_t count);

  /// Next `count` outputs (count <= 28), bit i of the result is c(n+i).
  std::uint32_t next_bits(unsigned count);

 private:
  void step(unsigned k);

  std::uint32_t x1_;
  std::uint32_t x2_;
};

/// c(0..length-1) for the given seed, one bit per element.
std::vector<std::uint8_t> prbs_c(std::uint32_t c_init, std::size_t length);

}  // namespace pf0
