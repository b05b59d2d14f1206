#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace aligncheck {

// The seven detector outputs, in the order the detectors are described.
enum class Feature {
  Unexpected,
  Improbable,
  Loud,
  Quiet,
  Short,
  Long,
  Badlength,
};

inline constexpr std::array<Feature, 7> kAllFeatures = {
    Feature::Unexpected, Feature::Improbable, Feature::Loud, Feature::Quiet,
    Feature::Short,      Feature::Long,       Feature::Badlength,
};

std::string_view feature_name(Feature f);
std::optional<Feature> feature_from_name(std::string_view name);

// A time interval one detector flags as likely misaligned. Regions of one
// feature within one recording are disjoint and sorted.
struct SuspicionRegion {
  Feature feature = Feature::Unexpected;
  std::string rec_id;
  double start_s = 0.0;
  double end_s = 0.0;
  double peak_score = 0.0;  // most extreme statistic inside the region

  double duration_s() const { return end_s - start_s; }
};

}  // namespace aligncheck
