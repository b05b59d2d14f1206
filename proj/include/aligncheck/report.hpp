#pragma once

#include <string>
#include <vector>

#include "aligncheck/scoring.hpp"

namespace aligncheck {

// Single deterministic JSON document: per-file scores, the regression fits,
// and the coincidence table. Keys are emitted in a fixed order and every
// real number is rounded to 9 significant digits, so identical inputs give
// byte-identical output.
std::string write_report_json(const std::vector<FileScoreRow>& rows,
                              const std::vector<LabeledFit>& fits,
                              const CoincidenceTable& coincidences);

}  // namespace aligncheck
