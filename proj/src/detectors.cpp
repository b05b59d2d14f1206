#include "aligncheck/detectors.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "aligncheck/errors.hpp"
#include "aligncheck/stats.hpp"
#include "aligncheck/util.hpp"

namespace aligncheck {

namespace {

constexpr double kAbutEps = 1e-9;
constexpr double kBadlengthCap = 1e6;

struct Interval {
  double start, end, peak;
};

std::vector<SuspicionRegion> merge_intervals(std::vector<Interval> ivs,
                                             Feature feature,
                                             const std::string& rec_id,
                                             bool extreme_is_max) {
  std::sort(ivs.begin(), ivs.end(),
            [](const Interval& a, const Interval& b) { return a.start < b.start; });
  std::vector<SuspicionRegion> out;
  for (const auto& iv : ivs) {
    if (!out.empty() && iv.start <= out.back().end_s + kAbutEps) {
      out.back().end_s = std::max(out.back().end_s, iv.end);
      out.back().peak_score = extreme_is_max
                                  ? std::max(out.back().peak_score, iv.peak)
                                  : std::min(out.back().peak_score, iv.peak);
    } else {
      out.push_back({feature, rec_id, iv.start, iv.end, iv.peak});
    }
  }
  return out;
}

}  // namespace

std::vector<SuspicionRegion> extract_regions(
    const RecordingAlignment& alignment, const std::vector<char>& flags,
    const std::vector<std::optional<double>>& scores, Feature feature,
    bool extreme_is_max) {
  std::vector<Interval> ivs;
  std::size_t i = 0;
  const std::size_t n = alignment.phones.size();
  while (i < n) {
    if (!flags[i]) {
      ++i;
      continue;
    }
    std::size_t j = i;
    double peak = *scores[i];
    while (j + 1 < n && flags[j + 1]) {
      ++j;
      peak = extreme_is_max ? std::max(peak, *scores[j])
                            : std::min(peak, *scores[j]);
    }
    ivs.push_back({alignment.phones[i].start_s, alignment.phones[j].end_s, peak});
    i = j + 1;
  }
  return merge_intervals(std::move(ivs), feature, alignment.rec_id,
                         extreme_is_max);
}

std::vector<std::optional<double>> unexpected_scores(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const DetectorConfig& cfg) {
  std::vector<std::optional<double>> diff(alignment.phones.size());
  for (std::size_t i = 0; i < alignment.phones.size(); ++i) {
    const auto& p = alignment.phones[i];
    if (!phone_scorable(p)) continue;
    diff[i] = p.log_prob / p.duration_s() - predict_logp_rate(alignment, i, model);
  }
  return stats::smooth_time_weighted(alignment, diff, cfg.smoothing_window_s);
}

std::vector<std::optional<double>> badlength_scores(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const DetectorConfig& cfg) {
  std::vector<std::optional<double>> s(alignment.phones.size());
  for (std::size_t i = 0; i < alignment.phones.size(); ++i) {
    const auto& p = alignment.phones[i];
    if (!phone_scorable(p)) continue;
    const double d_i = predict_log_duration(alignment, i, model);
    const double dev = cfg.badlength_raw_deviation
                           ? std::abs(p.duration_s() - d_i)
                           : std::abs(std::log(p.duration_s()) - d_i);
    const double m = model.stats.log_duration_mad(p.phone_label);
    // A class with zero spread: any deviation is maximally suspicious.
    s[i] = m > 0.0 ? dev / m : (dev == 0.0 ? 0.0 : kBadlengthCap);
  }
  return stats::smooth_time_weighted(alignment, s, cfg.smoothing_window_s);
}

std::vector<std::optional<double>> word_logp_rates(
    const RecordingAlignment& alignment, const DetectorConfig& cfg) {
  std::vector<std::optional<double>> rates(alignment.words.size());
  for (std::size_t w = 0; w < alignment.words.size(); ++w) {
    const auto& word = alignment.words[w];
    if (word.phone_count < static_cast<std::size_t>(cfg.min_word_phones)) continue;
    if (!(word.duration_s() > 0.0)) continue;
    double sum = 0.0;
    for (std::size_t k = 0; k < word.phone_count; ++k) {
      sum += alignment.phones[word.first_phone + k].log_prob;
    }
    rates[w] = sum / word.duration_s();
  }
  return rates;
}

std::vector<SuspicionRegion> detect_unexpected(const RecordingAlignment& alignment,
                                               const CorpusModel& model,
                                               const DetectorConfig& cfg) {
  const auto smoothed = unexpected_scores(alignment, model, cfg);
  std::vector<char> flags(smoothed.size(), 0);
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    flags[i] = smoothed[i] && *smoothed[i] < cfg.logp_threshold;
  }
  return extract_regions(alignment, flags, smoothed, Feature::Unexpected,
                         /*extreme_is_max=*/false);
}

std::vector<SuspicionRegion> detect_improbable(const RecordingAlignment& alignment,
                                               const DetectorConfig& cfg) {
  const auto rates = word_logp_rates(alignment, cfg);
  std::vector<Interval> ivs;
  for (std::size_t w = 0; w < rates.size(); ++w) {
    if (rates[w] && *rates[w] < cfg.word_logp_threshold) {
      const auto& word = alignment.words[w];
      ivs.push_back({word.start_s, word.end_s, *rates[w]});
    }
  }
  return merge_intervals(std::move(ivs), Feature::Improbable, alignment.rec_id,
                         /*extreme_is_max=*/false);
}

namespace {

// Maximal frame runs satisfying `bad` within [lo, hi), long enough to matter.
void scan_frames(const std::vector<double>& frame_rms, double lo, double hi,
                 const std::function<bool(double)>& bad, double min_run_s,
                 Feature feature, const std::string& rec_id,
                 std::vector<SuspicionRegion>& out) {
  const double fs = kRmsFrameS;
  const auto n = frame_rms.size();
  // Frames whose centers fall inside [lo, hi).
  auto first = static_cast<std::size_t>(std::max(0.0, std::ceil(lo / fs - 0.5)));
  std::size_t run_start = 0;
  std::size_t run_len = 0;
  for (std::size_t f = first; f <= n; ++f) {
    const double center = (static_cast<double>(f) + 0.5) * fs;
    const bool inside = f < n && center < hi;
    if (inside && bad(frame_rms[f])) {
      if (run_len == 0) run_start = f;
      ++run_len;
    } else {
      if (run_len * fs >= min_run_s) {
        const double start = std::max(lo, static_cast<double>(run_start) * fs);
        const double end =
            std::min(hi, static_cast<double>(run_start + run_len) * fs);
        out.push_back({feature, rec_id, start, end,
                       static_cast<double>(run_len) * fs});
      }
      run_len = 0;
      if (!inside) break;
    }
  }
}

}  // namespace

std::vector<SuspicionRegion> detect_amplitude(const RecordingAlignment& alignment,
                                              const AudioTrack& audio,
                                              const DetectorConfig& cfg) {
  const double total = alignment.total_duration_s;
  if (total > 0.0 &&
      std::abs(audio.duration_s() - total) > 0.01 * total) {
    throw DurationMismatchError(
        "rec '" + alignment.rec_id + "': audio is " +
        std::to_string(audio.duration_s()) + " s but alignment claims " +
        std::to_string(total) + " s");
  }
  if (audio.frame_rms.empty()) return {};

  const double quiet_thr = stats::percentile(audio.frame_rms, cfg.quiet_pct);
  const double loud_thr = stats::percentile(audio.frame_rms, cfg.loud_pct);

  // Words are speech; everything between them is silence.
  std::vector<std::pair<double, double>> speech;
  for (const auto& w : alignment.words) {
    if (w.end_s > w.start_s) speech.emplace_back(w.start_s, w.end_s);
  }
  std::vector<SuspicionRegion> out;
  for (const auto& [lo, hi] : speech) {
    scan_frames(audio.frame_rms, lo, hi,
                [quiet_thr](double v) { return v < quiet_thr; },
                cfg.min_extreme_run_s, Feature::Quiet, alignment.rec_id, out);
  }
  double cursor = 0.0;
  std::vector<std::pair<double, double>> silence;
  for (const auto& [lo, hi] : speech) {
    if (lo > cursor) silence.emplace_back(cursor, lo);
    cursor = std::max(cursor, hi);
  }
  if (cursor < total) silence.emplace_back(cursor, total);
  for (const auto& [lo, hi] : silence) {
    scan_frames(audio.frame_rms, lo, hi,
                [loud_thr](double v) { return v > loud_thr; },
                cfg.min_extreme_run_s, Feature::Loud, alignment.rec_id, out);
  }
  std::sort(out.begin(), out.end(),
            [](const SuspicionRegion& a, const SuspicionRegion& b) {
              return a.start_s < b.start_s;
            });
  return out;
}

std::vector<SuspicionRegion> detect_word_duration(const RecordingAlignment& alignment,
                                                  const DetectorConfig& cfg) {
  std::vector<Interval> shorts, longs;
  for (const auto& w : alignment.words) {
    if (w.phone_count < static_cast<std::size_t>(cfg.min_word_phones)) continue;
    const double mean = w.duration_s() / static_cast<double>(w.phone_count);
    // The pass band is open, so values at the edges are flagged.
    if (mean <= cfg.word_mean_min_s) {
      shorts.push_back({w.start_s, w.end_s, mean});
    } else if (mean >= cfg.word_mean_max_s) {
      longs.push_back({w.start_s, w.end_s, mean});
    }
  }
  auto out = merge_intervals(std::move(shorts), Feature::Short, alignment.rec_id,
                             /*extreme_is_max=*/false);
  auto more = merge_intervals(std::move(longs), Feature::Long, alignment.rec_id,
                              /*extreme_is_max=*/true);
  out.insert(out.end(), more.begin(), more.end());
  return out;
}

std::vector<SuspicionRegion> detect_duration_mismatch(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const DetectorConfig& cfg) {
  const auto smoothed = badlength_scores(alignment, model, cfg);
  std::vector<char> flags(smoothed.size(), 0);
  for (std::size_t i = 0; i < smoothed.size(); ++i) {
    flags[i] = smoothed[i] && *smoothed[i] > cfg.badlength_threshold;
  }
  return extract_regions(alignment, flags, smoothed, Feature::Badlength,
                         /*extreme_is_max=*/true);
}

std::map<Feature, std::vector<SuspicionRegion>> detect_all(
    const RecordingAlignment& alignment, const CorpusModel& model,
    const AudioTrack* audio, const DetectorConfig& cfg) {
  std::map<Feature, std::vector<SuspicionRegion>> out;
  out[Feature::Unexpected] = detect_unexpected(alignment, model, cfg);
  out[Feature::Improbable] = detect_improbable(alignment, cfg);
  auto words = detect_word_duration(alignment, cfg);
  auto& shorts = out[Feature::Short];
  auto& longs = out[Feature::Long];
  for (auto& r : words) {
    (r.feature == Feature::Short ? shorts : longs).push_back(std::move(r));
  }
  out[Feature::Badlength] = detect_duration_mismatch(alignment, model, cfg);
  if (audio) {
    auto amp = detect_amplitude(alignment, *audio, cfg);
    auto& loud = out[Feature::Loud];
    auto& quiet = out[Feature::Quiet];
    for (auto& r : amp) {
      (r.feature == Feature::Loud ? loud : quiet).push_back(std::move(r));
    }
  }
  return out;
}

Calibration calibrate_threshold(
    const std::function<double(double)>& regions_per_hour_at, bool fires_below,
    double target_per_hour, double search_lo, double search_hi) {
  Calibration cal;
  if (target_per_hour <= 0.0) {
    cal.threshold = fires_below ? -std::numeric_limits<double>::infinity()
                                : std::numeric_limits<double>::infinity();
    cal.achieved_per_hour = 0.0;
    cal.within_tolerance = true;
    return cal;
  }

  const double tol = 0.05 * target_per_hour;
  double best_thr = search_lo;
  double best_rate = regions_per_hour_at(search_lo);
  auto consider = [&](double thr, double rate) {
    if (std::abs(rate - target_per_hour) < std::abs(best_rate - target_per_hour)) {
      best_thr = thr;
      best_rate = rate;
    }
  };
  consider(search_hi, regions_per_hour_at(search_hi));

  // For fires_below the rate is nondecreasing in the threshold; for
  // fires_above it is nonincreasing. Bisect, stopping at the first probe
  // inside the tolerance band.
  double lo = search_lo, hi = search_hi;
  for (int it = 0; it < 200 && hi - lo > 1e-12 * std::max(1.0, std::abs(hi) + std::abs(lo)); ++it) {
    const double mid = 0.5 * (lo + hi);
    const double rate = regions_per_hour_at(mid);
    consider(mid, rate);
    if (std::abs(rate - target_per_hour) <= tol) break;
    const bool too_many = rate > target_per_hour;
    if (fires_below == too_many) {
      hi = mid;
    } else {
      lo = mid;
    }
  }

  cal.threshold = best_thr;
  cal.achieved_per_hour = best_rate;
  cal.within_tolerance = std::abs(best_rate - target_per_hour) <= tol;
  return cal;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace

DetectorConfig parse_detector_config(std::istream& in) {
  DetectorConfig cfg;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ParseError("config: expected 'key = value'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    char* end = nullptr;
    const double num = std::strtod(value.c_str(), &end);
    const bool is_num = end != value.c_str() && *end == '\0';

    if (key == "logp_threshold" && is_num) cfg.logp_threshold = num;
    else if (key == "word_logp_threshold" && is_num) cfg.word_logp_threshold = num;
    else if (key == "badlength_threshold" && is_num) cfg.badlength_threshold = num;
    else if (key == "quiet_pct" && is_num) cfg.quiet_pct = num;
    else if (key == "loud_pct" && is_num) cfg.loud_pct = num;
    else if (key == "min_extreme_run_s" && is_num) cfg.min_extreme_run_s = num;
    else if (key == "word_mean_min_s" && is_num) cfg.word_mean_min_s = num;
    else if (key == "word_mean_max_s" && is_num) cfg.word_mean_max_s = num;
    else if (key == "smoothing_window_s" && is_num) cfg.smoothing_window_s = num;
    else if (key == "min_word_phones" && is_num) cfg.min_word_phones = static_cast<int>(num);
    else if (key == "badlength_raw_deviation") cfg.badlength_raw_deviation = value == "true" || value == "1";
    else throw ParseError("config: unknown or malformed entry '" + key + "'", line_no);
  }
  if (!(cfg.quiet_pct < cfg.loud_pct)) {
    throw ParseError("config: quiet_pct must be below loud_pct");
  }
  if (!(cfg.word_mean_min_s < cfg.word_mean_max_s)) {
    throw ParseError("config: word_mean_min_s must be below word_mean_max_s");
  }
  if (!(cfg.min_extreme_run_s > 0.0) || !(cfg.smoothing_window_s > 0.0)) {
    throw ParseError("config: durations must be positive");
  }
  return cfg;
}

DetectorConfig parse_detector_config_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error("cannot open config file: " + path);
  return parse_detector_config(in);
}

std::string serialize_detector_config(const DetectorConfig& cfg) {
  std::ostringstream out;
  const auto num = [](double v) { return util::format_double_shortest(v); };
  out << "logp_threshold = " << num(cfg.logp_threshold) << "\n";
  out << "word_logp_threshold = " << num(cfg.word_logp_threshold) << "\n";
  out << "badlength_threshold = " << num(cfg.badlength_threshold) << "\n";
  out << "quiet_pct = " << num(cfg.quiet_pct) << "\n";
  out << "loud_pct = " << num(cfg.loud_pct) << "\n";
  out << "min_extreme_run_s = " << num(cfg.min_extreme_run_s) << "\n";
  out << "word_mean_min_s = " << num(cfg.word_mean_min_s) << "\n";
  out << "word_mean_max_s = " << num(cfg.word_mean_max_s) << "\n";
  out << "smoothing_window_s = " << num(cfg.smoothing_window_s) << "\n";
  out << "min_word_phones = " << cfg.min_word_phones << "\n";
  out << "badlength_raw_deviation = "
      << (cfg.badlength_raw_deviation ? "true" : "false") << "\n";
  return out.str();
}

}  // namespace aligncheck
