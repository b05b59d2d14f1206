#pragma once

#include <array>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"

namespace aligncheck {

inline constexpr std::size_t kLogpFeatureCount = 5;
inline constexpr std::size_t kDurationFeatureCount = 25;
inline constexpr int kDurationNeighborReach = 6;

// Phones with zero duration or >= 1 s are never scored; they still serve as
// neighbours in feature computation.
inline constexpr double kScorableMaxS = 1.0;
bool phone_scorable(const PhoneInstance& p);

// Robust per-class statistics. logp_rate (lambda) and duration_median (D)
// come from the training band; log_duration_median (Delta) and its MAD (m)
// from the scorable band, so they cover every phone the detectors score.
struct PhoneClassEntry {
  std::optional<double> logp_rate;
  std::optional<double> duration_median;
  std::optional<double> log_duration_median;
  std::optional<double> log_duration_mad;
};

struct PhoneClassStats {
  std::map<std::string, PhoneClassEntry> classes;
  PhoneClassEntry global;  // pooled fallback for unseen classes

  double logp_rate(const std::string& label) const;
  double duration_median(const std::string& label) const;
  double log_duration_median(const std::string& label) const;
  double log_duration_mad(const std::string& label) const;
};

struct TrainingOptions {
  double band_lo_s = 0.04;  // training band for lambda, D and both fits
  double band_hi_s = 0.18;
  std::optional<std::string> exclude_rec;
  std::size_t min_logp_obs = 50;
  std::size_t min_duration_obs = 100;
};

struct CorpusModel {
  PhoneClassStats stats;
  std::vector<double> logp_weights;      // 5 terms, no intercept
  std::vector<double> duration_weights;  // 25 terms, [0] is the constant
  double band_lo_s = 0.04;
  double band_hi_s = 0.18;
  std::optional<std::string> excluded_rec;
};

bool phone_in_band(const PhoneInstance& p, const TrainingOptions& opt);

// Medians over the corpus minus the excluded recording. Throws
// EmptyCorpusError when nothing scorable remains.
PhoneClassStats train_phone_stats(std::span<const RecordingAlignment> corpus,
                                  const TrainingOptions& opt = {});

// [ log(d_i/D(p_i)), log(D(p_i)/D(p_prev)), lambda(p_i)-lambda(p_prev),
//   log(D(p_i)/D(p_next)), lambda(p_i)-lambda(p_next) ];
// missing neighbours contribute 0.
std::array<double, kLogpFeatureCount> logp_features(
    const RecordingAlignment& alignment, std::size_t i,
    const PhoneClassStats& stats);

// [ 1, q(D_i*d_{i+k}, D_{i+k}*d_i) for k in -6..-1,+1..+6,
//   q(D_i, D_{i+k}) for the same k ]; missing neighbours contribute 0 and
// a both-zero q is taken as 0 (no signal).
std::array<double, kDurationFeatureCount> duration_features(
    const RecordingAlignment& alignment, std::size_t i,
    const PhoneClassStats& stats);

// Least squares on L_i/d_i - lambda(p_i) over training-band phones.
std::vector<double> train_logp_predictor(std::span<const RecordingAlignment> corpus,
                                         const PhoneClassStats& stats,
                                         const TrainingOptions& opt = {});

// Least squares on log(d_i) - Delta(p_i); the constant term lives inside
// the feature vector.
std::vector<double> train_duration_predictor(
    std::span<const RecordingAlignment> corpus, const PhoneClassStats& stats,
    const TrainingOptions& opt = {});

// lambda(p_i) + w . logp_features(i). Throws PhoneExcludedError outside
// (0, 1) s.
double predict_logp_rate(const RecordingAlignment& alignment, std::size_t i,
                         const CorpusModel& model);

// Delta(p_i) + w . duration_features(i), the predicted log duration d_i.
double predict_log_duration(const RecordingAlignment& alignment, std::size_t i,
                            const CorpusModel& model);

CorpusModel train_corpus_model(std::span<const RecordingAlignment> corpus,
                               const TrainingOptions& opt = {});

std::string serialize_model(const CorpusModel& model);
CorpusModel parse_model(const std::string& json_text);

}  // namespace aligncheck
