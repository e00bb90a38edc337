#include "pf0/prbs.hpp"

#include <algorithm>

#include "pf0/error.hpp"

namespace pf0 {

namespace {

constexpr std::uint32_t kWindowMask = 0x7FFFFFFFu;  // 31 bits

constexpr std::uint32_t low_mask(unsigned k) { return k >= 32 ? 0xFFFFFFFFu : ((1u << k) - 1u); }

}  // namespace

GoldSequence::GoldSequence(std::uint32_t c_init) : x1_(1u), x2_(c_init & kWindowMask) {
  if (c_init > kWindowMask) {
    throw ArgumentError("prbs: c_init must fit in 31 bits");
  }
  advance(kDiscard);
}

// Window bit i holds x(n+i). Producing k <= 28 new bits x(n+31..n+31+k-1) only
// reads window bits up to i+3 <= 30, so all k bits come from one XOR pass.
void GoldSequence::step(unsigned k) {
  const std::uint32_t m = low_mask(k);
  const std::uint32_t n1 = (x1_ ^ (x1_ >> 3)) & m;
  const std::uint32_t n2 = (x2_ ^ (x2_ >> 1) ^ (x2_ >> 2) ^ (x2_ >> 3)) & m;
  x1_ = ((x1_ >> k) | (n1 << (31 - k))) & kWindowMask;
  x2_ = ((x2_ >> k) | (n2 << (31 - k))) & kWindowMask;
}

void GoldSequence::advance(std::uint64_t count) {
  while (count >= 28) {
    step(28);
    count -= 28;
  }
  if (count > 0) step(static_cast<unsigned>(count));
}

std::uint32_t GoldSequence::next_bits(unsigned count) {
  if (count == 0 || count > 28) throw ArgumentError("prbs: next_bits takes 1..28 bits");
  const std::uint32_t out = (x1_ ^ x2_) & low_mask(count);
  step(count);
  return out;
}

std::vector<std::uint8_t> prbs_c(std::uint32_t c_init, std::size_t length) {
  if (length == 0) throw ArgumentError("prbs: length must be >= 1");
  GoldSequence gen(c_init);
  std::vector<std::uint8_t> out;
  out.reserve(length);
  while (out.size() < length) {
    const auto chunk = static_cast<unsigned>(std::min<std::size_t>(28, length - out.size()));
    const std::uint32_t bits = gen.next_bits(chunk);
    for (unsigned i = 0; i < chunk; ++i) out.push_back(static_cast<std::uint8_t>((bits >> i) & 1u));
  }
  return out;
}

}  // namespace pf0
