#include "aligncheck/regions.hpp"

namespace aligncheck {

std::string_view feature_name(Feature f) {
  switch (f) {
    case Feature::Unexpected: return "unexpected";
    case Feature::Improbable: return "improbable";
    case Feature::Loud: return "loud";
    case Feature::Quiet: return "quiet";
    case Feature::Short: return "short";
    case Feature::Long: return "long";
    case Feature::Badlength: return "badlength";
  }
  return "?";
}

std::optional<Feature> feature_from_name(std::string_view name) {
  for (Feature f : kAllFeatures) {
    if (feature_name(f) == name) return f;
  }
  return std::nullopt;
}

}  // namespace aligncheck
