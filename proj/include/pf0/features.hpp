#pragma once

#include <array>
#include <cstdint>
#include <span>
#include <string_view>

#include "pf0/pucch0.hpp"

namespace pf0 {

inline constexpr int kFeatureDim = 2 * kSubcarriersPerRb;

using FeatureVector = std::array<double, kFeatureDim>;

/// Order of real and imaginary parts in the feature vector.
enum class FeatureLayout : std::uint8_t {
  Concatenated = 0,  ///< [Re(0..11) | Im(0..11)]
  Interleaved = 1,   ///< [Re(0), Im(0), Re(1), ...]
};

enum class Normalization : std::uint8_t {
  None = 0,
  UnitPower = 1,  ///< scaled so mean |x(n)|^2 = 1
};

/// Featurization tags carried by dataset and model files.
struct FeatureTags {
  FeatureLayout layout = FeatureLayout::Concatenated;
  Normalization normalization = Normalization::UnitPower;

  bool operator==(const FeatureTags&) const = default;
};

std::string_view to_string(FeatureLayout layout);
std::string_view to_string(Normalization normalization);

/// 12 complex samples -> 24 reals. An all-zero block stays zero under UnitPower.
FeatureVector featurize(std::span<const cf64> samples, const FeatureTags& tags = {});

/// Inverse of featurize() up to the normalization gain.
RbSamples defeaturize(std::span<const double> features, FeatureLayout layout = FeatureLayout::Concatenated);

}  // namespace pf0
