#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"
#include "aligncheck/regions.hpp"
#include "aligncheck/stats.hpp"

namespace aligncheck {

inline constexpr double kCoincidenceWindowS = 5.0;
inline constexpr std::size_t kRegressionCount = 12;

// The three per-file score conventions for one feature.
struct FeatureScores {
  double nd = 0.0;                // regions per hour
  std::optional<double> nw;       // regions per 1000 words; absent if no words
  double dd = 0.0;                // flagged duration / file duration
};

struct FileScoreRow {
  std::string rec_id;
  std::optional<double> rating;
  double duration_s = 0.0;
  std::size_t word_count = 0;
  std::map<Feature, FeatureScores> scores;  // always all seven features
};

FileScoreRow file_scores(const RecordingAlignment& alignment,
                         const std::map<Feature, std::vector<SuspicionRegion>>& regions,
                         std::optional<double> rating);

enum class ScoreFamily { Nd, Nw, Dd };
enum class XTransform { Raw, Power03 };
enum class YTransform { Raw, Squared };

std::string score_family_name(ScoreFamily f);

struct LabeledFit {
  std::string label;  // e.g. "s_nd.pow03_x.sq_y"
  ScoreFamily family = ScoreFamily::Nd;
  XTransform x_transform = XTransform::Raw;
  YTransform y_transform = YTransform::Raw;
  stats::RegressionFit fit;
  std::vector<std::string> dropped_features;  // constant columns
};

struct HarnessResult {
  std::vector<LabeledFit> fits;  // exactly 12
  std::vector<std::string> warnings;
};

// OLS of the (possibly transformed) rating on the seven (possibly
// transformed) feature scores plus an intercept, for all 3 families x 4
// transform combinations. Every row must carry a rating; needs >= 10 rows.
// Constant feature columns are dropped with a warning, as happens when a
// detector never fires.
HarnessResult regression_harness(const std::vector<FileScoreRow>& rows);

struct CoincidenceCell {
  Feature a = Feature::Unexpected;
  Feature b = Feature::Unexpected;
  std::uint64_t observed = 0;
  double expected = 0.0;
  std::optional<double> ratio;
  std::optional<double> p_value;
};

// All 21 unordered pairs of the seven features.
struct CoincidenceTable {
  std::vector<CoincidenceCell> cells;
  const CoincidenceCell* find(Feature a, Feature b) const;
};

struct CoincidenceOptions {
  double window_s = kCoincidenceWindowS;
  // Chance model: pairs whose interval gap is within the window under
  // independent uniform placement; the point model ignores region lengths.
  bool point_chance_model = false;
};

// Number of (a, b) pairs whose interval gap (0 when overlapping) is at most
// window_s. Both lists must be sorted and disjoint. Linear-time sweep; must
// agree exactly with quadratic counting.
std::uint64_t count_close_pairs(std::span<const SuspicionRegion> a,
                                std::span<const SuspicionRegion> b,
                                double window_s);

CoincidenceTable coincidence_analysis(
    const std::map<Feature, std::vector<SuspicionRegion>>& regions,
    double total_duration_s, const CoincidenceOptions& opt = {});

struct RecordingRegions {
  const std::map<Feature, std::vector<SuspicionRegion>>* regions;
  double total_duration_s;
};

// Observed and expected counts summed across recordings; ratio and Poisson
// tail computed on the sums.
CoincidenceTable corpus_coincidence(std::span<const RecordingRegions> recs,
                                    const CoincidenceOptions& opt = {});

// Slow permutation oracle for the chance model: mean close-pair count over
// `draws` uniform re-placements of the regions on [0, total_duration_s].
double permutation_expected_pairs(std::span<const SuspicionRegion> a,
                                  std::span<const SuspicionRegion> b,
                                  double total_duration_s, double window_s,
                                  int draws, std::uint64_t seed);

}  // namespace aligncheck
