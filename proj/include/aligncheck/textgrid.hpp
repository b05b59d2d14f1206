#pragma once

#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"
#include "aligncheck/regions.hpp"

namespace aligncheck {

struct TextGridInterval {
  double xmin = 0.0;
  double xmax = 0.0;
  std::string text;
};

struct TextGridTier {
  std::string name;
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<TextGridInterval> intervals;  // tile [xmin, xmax], gaps empty
};

struct TextGridDoc {
  double xmin = 0.0;
  double xmax = 0.0;
  std::vector<TextGridTier> tiers;
};

// Praat long-format text. write(parse(write(x))) == write(x).
std::string write_textgrid(const TextGridDoc& doc);
TextGridDoc parse_textgrid(const std::string& text);

// Phone and word tiers plus one tier per feature present in `regions`,
// feature tiers in alphabetical order. Throws RegionOutOfBoundsError.
TextGridDoc textgrid_from_regions(const RecordingAlignment& alignment,
                                  const std::vector<SuspicionRegion>& regions);
std::string write_textgrid_regions(const RecordingAlignment& alignment,
                                   const std::vector<SuspicionRegion>& regions);

}  // namespace aligncheck
