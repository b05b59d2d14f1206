#pragma once

#include <optional>
#include <string>
#include <vector>

namespace aligncheck {

// Aligner output has rounding jitter; neighbouring phones may overlap by up
// to this much without being treated as corrupt.
inline constexpr double kOverlapToleranceS = 0.001;

// One aligned phone segment. Zero duration is legal; detectors decide how
// to treat it. A phone with no word_index is silence, and vice versa.
struct PhoneInstance {
  std::string phone_label;
  double start_s = 0.0;
  double end_s = 0.0;
  double log_prob = 0.0;
  std::optional<int> word_index;
  std::optional<std::string> word_label;

  bool is_silence() const { return !word_index.has_value(); }
  double duration_s() const { return end_s - start_s; }
  double midpoint_s() const { return 0.5 * (start_s + end_s); }
};

// A maximal run of consecutive phones sharing a word_index.
struct WordInstance {
  std::string word_label;
  std::size_t first_phone = 0;
  std::size_t phone_count = 0;
  double start_s = 0.0;
  double end_s = 0.0;

  double duration_s() const { return end_s - start_s; }
};

struct RecordingAlignment {
  std::string rec_id;
  std::vector<PhoneInstance> phones;  // sorted by start, non-overlapping
  std::vector<WordInstance> words;    // derived from phones
  double total_duration_s = 0.0;
  // Normally words.size(); may be overridden from a transcript word count,
  // which is what the per-1000-words score divides by.
  std::size_t word_count = 0;
};

// Sorts, checks the type invariants, derives words. Throws
// NegativeDurationError, OverlapError, DanglingWordIndexError or
// ValidationError; messages carry rec_id.
RecordingAlignment validate_alignment(std::string rec_id,
                                      std::vector<PhoneInstance> phones,
                                      double total_duration_s);

// One word per maximal run of consecutive phones with equal word_index.
// Assumes phones already validated.
std::vector<WordInstance> derive_words(const std::vector<PhoneInstance>& phones);

}  // namespace aligncheck
