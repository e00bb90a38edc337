#include "pf0/features.hpp"

#include <cmath>
#include <string>

#include "pf0/error.hpp"

namespace pf0 {

std::string_view to_string(FeatureLayout layout) {
  return layout == FeatureLayout::Concatenated ? "concat" : "interleaved";
}

std::string_view to_string(Normalization normalization) {
  return normalization == Normalization::None ? "none" : "unit-power";
}

FeatureVector featurize(std::span<const cf64> samples, const FeatureTags& tags) {
  if (samples.size() != static_cast<std::size_t>(kSubcarriersPerRb)) {
    throw ArgumentError("featurize needs 12 samples, got " + std::to_string(samples.size()));
  }
  double scale = 1.0;
  if (tags.normalization == Normalization::UnitPower) {
    double power = 0.0;
    for (const auto& s : samples) power += std::norm(s);
    power /= kSubcarriersPerRb;
    if (power > 0.0) scale = 1.0 / std::sqrt(power);
  }
  FeatureVector f{};
  for (int n = 0; n < kSubcarriersPerRb; ++n) {
    const double re = samples[n].real() * scale;
    const double im = samples[n].imag() * scale;
    if (tags.layout == FeatureLayout::Concatenated) {
      f[n] = re;
      f[n + kSubcarriersPerRb] = im;
    } else {
      f[2 * n] = re;
      f[2 * n + 1] = im;
    }
  }
  return f;
}

RbSamples defeaturize(std::span<const double> features, FeatureLayout layout) {
  if (features.size() != static_cast<std::size_t>(kFeatureDim)) {
    throw ArgumentError("defeaturize needs 24 values, got " + std::to_string(features.size()));
  }
  RbSamples x{};
  for (int n = 0; n < kSubcarriersPerRb; ++n) {
    x[n] = layout == FeatureLayout::Concatenated ? cf64(features[n], features[n + kSubcarriersPerRb])
                                                 : cf64(features[2 * n], features[2 * n + 1]);
  }
  return x;
}

}  // namespace pf0
