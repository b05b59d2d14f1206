#pragma once

#include <functional>
#include <istream>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"
#include "aligncheck/corpus_model.hpp"
#include "aligncheck/regions.hpp"
#include "aligncheck/wav.hpp"

namespace aligncheck {

struct DetectorConfig {
  // Thresholds set by experiment; tune with the calibrate machinery.
  double logp_threshold = -5.0;         // smoothed delta log(P) floor
  double word_logp_threshold = -150.0;  // word log(P) per second floor
  double badlength_threshold = 5.0;     // smoothed duration deviation ceiling

  // Fixed published constants.
  double quiet_pct = 3.0;
  double loud_pct = 97.0;
  double min_extreme_run_s = 0.25;       // one "short word"
  double word_mean_min_s = 1.0 / 32.0;   // short/long pass band
  double word_mean_max_s = 1.0 / 8.0;
  double smoothing_window_s = 1.0;
  int min_word_phones = 4;

  // Duration mismatch scores |log(dur) - d_i| / m by default; the raw-domain
  // |dur - d_i| / m variant is kept for comparison.
  bool badlength_raw_deviation = false;
};

// Flat "key = value" config file, '#' comments. Unknown keys are errors.
DetectorConfig parse_detector_config(std::istream& in);
DetectorConfig parse_detector_config_file(const std::string& path);
std::string serialize_detector_config(const DetectorConfig& cfg);

// Smoothed per-phone statistics; exposed so threshold calibration can rescan
// them cheaply. Unscorable phones have no value.
std::vector<std::optional<double>> unexpected_scores(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const DetectorConfig& cfg);
std::vector<std::optional<double>> badlength_scores(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const DetectorConfig& cfg);
// Word log(P) per second for words with at least min_word_phones phones,
// indexed like alignment.words; shorter words have no value.
std::vector<std::optional<double>> word_logp_rates(
    const RecordingAlignment& alignment, const DetectorConfig& cfg);

// The five detectors. Each returns sorted, disjoint regions.
std::vector<SuspicionRegion> detect_unexpected(const RecordingAlignment&,
                                               const CorpusModel&,
                                               const DetectorConfig&);
std::vector<SuspicionRegion> detect_improbable(const RecordingAlignment&,
                                               const DetectorConfig&);
std::vector<SuspicionRegion> detect_amplitude(const RecordingAlignment&,
                                              const AudioTrack&,
                                              const DetectorConfig&);
std::vector<SuspicionRegion> detect_word_duration(const RecordingAlignment&,
                                                  const DetectorConfig&);
std::vector<SuspicionRegion> detect_duration_mismatch(const RecordingAlignment&,
                                                      const CorpusModel&,
                                                      const DetectorConfig&);

// All label-based features, plus loud/quiet when audio is given. Features
// that were not run are absent from the map.
std::map<Feature, std::vector<SuspicionRegion>> detect_all(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const AudioTrack* audio, const DetectorConfig& cfg);

// Maximal runs of flagged phones merged into regions; abutting intervals
// coalesce. `extreme_is_max` picks how peak scores combine.
std::vector<SuspicionRegion> extract_regions(
    const RecordingAlignment& alignment, const std::vector<char>& flags,
    const std::vector<std::optional<double>>& scores, Feature feature,
    bool extreme_is_max);

struct Calibration {
  double threshold = 0.0;
  double achieved_per_hour = 0.0;
  bool within_tolerance = false;  // within 5% of target
};

// Bisection on a monotone region-rate function. `fires_below` means flagging
// happens when a score is below the threshold (unexpected/improbable);
// otherwise above (badlength). A target of zero returns a sentinel the
// detector can never cross.
Calibration calibrate_threshold(
    const std::function<double(double)>& regions_per_hour_at, bool fires_below,
    double target_per_hour, double search_lo, double search_hi);

}  // namespace aligncheck
