#pragma once

#include <cstdint>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "aligncheck/alignment.hpp"
#include "aligncheck/ingest.hpp"
#include "aligncheck/regions.hpp"
#include "aligncheck/wav.hpp"

namespace aligncheck {

enum class ErrorKind {
  Bunching,       // word phones squeezed to the HMM minimum, slack to silence
  SilenceSwap,    // a silence/word pair exchanged in time
  BoundaryDrift,  // all boundaries in a span shifted by a constant
  LogpDip,        // log-probabilities lowered across a span
  QuietGap,       // audio muted inside a word (labels untouched)
  LoudBurst,      // loud audio inside a silence (labels untouched)
  Stretch,        // word durations multiplied, slack taken from silences
};

std::string_view error_kind_name(ErrorKind k);
std::optional<ErrorKind> error_kind_from_name(std::string_view name);

struct ErrorSpan {
  std::string rec_id;
  double start_s = 0.0;
  double end_s = 0.0;
  ErrorKind kind = ErrorKind::Bunching;
};

struct PhoneClassSpec {
  std::string label;
  double median_duration_s = 0.08;
  double logp_rate = -75.0;  // typical L per second
};

struct SynthSpec {
  int n_recordings = 10;
  double duration_s = 600.0;
  int sample_rate_hz = 16000;
  std::uint64_t seed = 1;

  std::vector<PhoneClassSpec> inventory;  // default_synth_spec() fills this
  double sigma_log_duration = 0.22;
  double logp_noise = 0.2;
  double silence_logp_rate = -55.0;
  double silence_median_s = 0.35;
  double sigma_log_silence = 0.4;
  int min_word_phones = 2;
  int max_word_phones = 7;
  double speech_amplitude = 0.30;
  double silence_amplitude = 0.01;

  // Injection rates, per hour per recording, scaled by the recording's
  // severity. coplant places a LogpDip immediately before each Stretch so
  // the two detectors coincide.
  double bunching_per_hour = 0.0;
  double silence_swap_per_hour = 0.0;
  double boundary_drift_per_hour = 0.0;
  double logp_dip_per_hour = 0.0;
  double quiet_gap_per_hour = 0.0;
  double loud_burst_per_hour = 0.0;
  double stretch_per_hour = 0.0;
  double coplant_per_hour = 0.0;

  double logp_dip_rate = 12.0;  // how much L/duration drops inside a dip
  double stretch_factor = 8.0;
  std::vector<double> severity;  // cycled over recordings; empty means 1.0
};

SynthSpec default_synth_spec();
SynthSpec parse_synth_spec(const std::string& json_text);
std::string serialize_synth_spec(const SynthSpec& spec);

struct SynthRecording {
  RecordingAlignment alignment;
  AudioTrack audio;
};

struct SynthCorpus {
  std::vector<SynthRecording> recordings;
};

// Deterministic: the same spec always yields the identical corpus.
SynthCorpus generate_corpus(const SynthSpec& spec);

struct InjectionResult {
  SynthCorpus corpus;
  std::vector<ErrorSpan> spans;  // disjoint per recording, sorted
};

InjectionResult inject_errors(const SynthCorpus& clean, const SynthSpec& spec);

// Pseudo-ratings from the injected error burden, for exercising the
// regression harness: clean recordings rate 10, heavily corrupted ones
// approach 0.
std::vector<RatingRecord> derive_ratings(const SynthCorpus& corpus,
                                         const std::vector<ErrorSpan>& spans);

struct DetectorEval {
  std::size_t truth_total = 0;
  std::size_t truth_matched = 0;
  std::size_t regions_total = 0;
  std::size_t regions_matched = 0;
  std::optional<double> recall;     // absent when no truth spans target this
  std::optional<double> precision;  // absent when the detector never fired
};

// Which features each error kind is designed to trigger.
std::vector<Feature> error_kind_targets(ErrorKind k);

// A truth span is recalled when a region of a targeted feature overlaps it
// with IoU >= match_iou; a region counts as correct when it overlaps any
// truth span at all.
std::map<Feature, DetectorEval> evaluate_detectors(
    const std::map<std::string, std::map<Feature, std::vector<SuspicionRegion>>>&
        regions_by_rec,
    std::span<const ErrorSpan> truth, double match_iou = 0.1);

std::string write_truth_csv(std::span<const ErrorSpan> spans);
std::vector<ErrorSpan> parse_truth_csv(std::istream& in);

}  // namespace aligncheck
