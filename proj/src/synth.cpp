#include "aligncheck/synth.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <sstream>

#include <json.hpp>

#include "aligncheck/errors.hpp"
#include "aligncheck/util.hpp"

namespace aligncheck {

namespace {

using nlohmann::json;
using nlohmann::ordered_json;

constexpr double kMinSilenceAfterTakeS = 0.08;
constexpr double kZonePadS = 8.0;

std::mt19937_64 make_engine(std::uint64_t seed, std::uint64_t rec,
                            std::uint64_t stream) {
  // Distinct, well-mixed streams per (seed, recording, purpose).
  std::seed_seq seq{seed, rec ^ 0x9e3779b97f4a7c15ULL, stream};
  return std::mt19937_64(seq);
}

struct Site {
  ErrorKind kind;
  std::size_t first = 0, last = 0;  // inclusive phone range
  double dip_mult = 1.0;
  double gap_len = 0.0;
  double drift = 0.0;
  double old_word_dur = 0.0;   // bunching
  std::size_t reach = 0;       // stretch: last phone index touched
};

bool zone_free(const std::vector<std::pair<double, double>>& zones, double lo,
               double hi) {
  for (const auto& [a, b] : zones) {
    if (lo < b && a < hi) return false;
  }
  return true;
}

}  // namespace

std::string_view error_kind_name(ErrorKind k) {
  switch (k) {
    case ErrorKind::Bunching: return "bunching";
    case ErrorKind::SilenceSwap: return "silence_swap";
    case ErrorKind::BoundaryDrift: return "boundary_drift";
    case ErrorKind::LogpDip: return "logp_dip";
    case ErrorKind::QuietGap: return "quiet_gap";
    case ErrorKind::LoudBurst: return "loud_burst";
    case ErrorKind::Stretch: return "stretch";
  }
  return "?";
}

std::optional<ErrorKind> error_kind_from_name(std::string_view name) {
  for (ErrorKind k :
       {ErrorKind::Bunching, ErrorKind::SilenceSwap, ErrorKind::BoundaryDrift,
        ErrorKind::LogpDip, ErrorKind::QuietGap, ErrorKind::LoudBurst,
        ErrorKind::Stretch}) {
    if (error_kind_name(k) == name) return k;
  }
  return std::nullopt;
}

SynthSpec default_synth_spec() {
  SynthSpec spec;
  spec.inventory = {
      {"AA1", 0.105, -72.0}, {"IY1", 0.095, -70.0}, {"EH1", 0.085, -75.0},
      {"AO1", 0.100, -68.0}, {"UW1", 0.090, -71.0}, {"T", 0.055, -90.0},
      {"D", 0.050, -88.0},   {"S", 0.090, -80.0},   {"N", 0.060, -78.0},
      {"K", 0.065, -92.0},   {"M", 0.070, -76.0},   {"R", 0.070, -74.0},
      {"L", 0.065, -73.0},
  };
  spec.bunching_per_hour = 6.0;
  spec.silence_swap_per_hour = 6.0;
  spec.boundary_drift_per_hour = 6.0;
  spec.logp_dip_per_hour = 6.0;
  spec.quiet_gap_per_hour = 6.0;
  spec.loud_burst_per_hour = 6.0;
  spec.stretch_per_hour = 6.0;
  spec.coplant_per_hour = 0.0;
  spec.severity = {0.0, 0.4, 0.8, 1.2, 1.6, 2.0, 0.2, 0.6, 1.0, 1.4};
  return spec;
}

SynthCorpus generate_corpus(const SynthSpec& spec) {
  if (spec.inventory.empty()) throw Error("synth: empty phone inventory");
  SynthCorpus corpus;
  int word_counter = 0;
  for (int r = 0; r < spec.n_recordings; ++r) {
    auto labels_rng = make_engine(spec.seed, static_cast<std::uint64_t>(r), 0);
    std::uniform_int_distribution<std::size_t> class_pick(
        0, spec.inventory.size() - 1);
    std::uniform_int_distribution<int> word_len(spec.min_word_phones,
                                                spec.max_word_phones);
    std::normal_distribution<double> log_dur(0.0, spec.sigma_log_duration);
    std::normal_distribution<double> log_sil(0.0, spec.sigma_log_silence);
    std::normal_distribution<double> lp_noise(0.0, spec.logp_noise);

    std::vector<PhoneInstance> phones;
    double t = 0.0;
    int word_index = 0;
    bool want_silence = true;
    while (true) {
      if (want_silence) {
        double d = spec.silence_median_s * std::exp(log_sil(labels_rng));
        d = std::clamp(d, 0.08, 2.5);
        if (t + d > spec.duration_s) break;
        PhoneInstance p;
        p.phone_label = "sil";
        p.start_s = t;
        p.end_s = t + d;
        p.log_prob = spec.silence_logp_rate * d + lp_noise(labels_rng);
        phones.push_back(std::move(p));
        t += d;
        want_silence = false;
      } else {
        const int n = word_len(labels_rng);
        std::vector<PhoneInstance> word;
        double wlen = 0.0;
        for (int k = 0; k < n; ++k) {
          const auto& cls = spec.inventory[class_pick(labels_rng)];
          double d = cls.median_duration_s * std::exp(log_dur(labels_rng));
          d = std::clamp(d, 0.012, 0.9);
          PhoneInstance p;
          p.phone_label = cls.label;
          p.start_s = t + wlen;
          p.end_s = t + wlen + d;
          p.log_prob = cls.logp_rate * d + lp_noise(labels_rng);
          p.word_index = word_index;
          p.word_label = "w" + std::to_string(word_counter);
          word.push_back(std::move(p));
          wlen += d;
        }
        if (t + wlen > spec.duration_s) break;
        for (auto& p : word) phones.push_back(std::move(p));
        t += wlen;
        ++word_index;
        ++word_counter;
        want_silence = true;
      }
    }
    // Trailing silence fills the recording exactly.
    if (t < spec.duration_s) {
      PhoneInstance p;
      p.phone_label = "sil";
      p.start_s = t;
      p.end_s = spec.duration_s;
      p.log_prob = spec.silence_logp_rate * p.duration_s();
      phones.push_back(std::move(p));
    }

    char rec_name[32];
    std::snprintf(rec_name, sizeof(rec_name), "synth%03d", r);
    SynthRecording rec;
    rec.alignment =
        validate_alignment(rec_name, std::move(phones), spec.duration_s);

    auto audio_rng = make_engine(spec.seed, static_cast<std::uint64_t>(r), 1);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    const auto n_samples = static_cast<std::size_t>(
        std::llround(spec.duration_s * spec.sample_rate_hz));
    rec.audio.rec_id = rec_name;
    rec.audio.sample_rate_hz = spec.sample_rate_hz;
    rec.audio.samples.assign(n_samples, 0.0f);
    for (const auto& p : rec.alignment.phones) {
      const double amp =
          p.is_silence() ? spec.silence_amplitude : spec.speech_amplitude;
      const auto lo = static_cast<std::size_t>(
          std::llround(p.start_s * spec.sample_rate_hz));
      const auto hi = std::min(n_samples, static_cast<std::size_t>(std::llround(
                                              p.end_s * spec.sample_rate_hz)));
      for (std::size_t s = lo; s < hi; ++s) {
        rec.audio.samples[s] = static_cast<float>(amp * unit(audio_rng));
      }
    }
    rec.audio.frame_rms =
        compute_frame_rms(rec.audio.samples, rec.audio.sample_rate_hz);
    corpus.recordings.push_back(std::move(rec));
  }
  return corpus;
}

namespace {

struct WordSpan {
  std::size_t first, last;  // inclusive phone indices
  double start, dur, max_phone_dur;
  bool followed_by_silence;
};

std::vector<WordSpan> word_spans(const RecordingAlignment& a) {
  std::vector<WordSpan> out;
  for (const auto& w : a.words) {
    WordSpan s;
    s.first = w.first_phone;
    s.last = w.first_phone + w.phone_count - 1;
    s.start = w.start_s;
    s.dur = w.duration_s();
    s.max_phone_dur = 0.0;
    for (std::size_t k = s.first; k <= s.last; ++k) {
      s.max_phone_dur = std::max(s.max_phone_dur, a.phones[k].duration_s());
    }
    s.followed_by_silence =
        s.last + 1 < a.phones.size() && a.phones[s.last + 1].is_silence();
    out.push_back(s);
  }
  return out;
}

// Forward walk over clean durations collecting silence slack for a stretch.
// Returns the index of the last phone touched, or nullopt if the slack runs
// out before `needed` is met within `max_reach_s`.
std::optional<std::size_t> stretch_reach(const RecordingAlignment& a,
                                         std::size_t after, double needed,
                                         double max_reach_s) {
  double got = 0.0;
  const double limit = a.phones[after].end_s + max_reach_s;
  for (std::size_t k = after + 1; k < a.phones.size(); ++k) {
    if (a.phones[k].start_s > limit) return std::nullopt;
    if (a.phones[k].is_silence()) {
      got += std::max(0.0, a.phones[k].duration_s() - kMinSilenceAfterTakeS);
      if (got >= needed) return k;
    }
  }
  return std::nullopt;
}

}  // namespace

InjectionResult inject_errors(const SynthCorpus& clean, const SynthSpec& spec) {
  InjectionResult result;
  result.corpus = clean;

  for (std::size_t r = 0; r < result.corpus.recordings.size(); ++r) {
    auto& rec = result.corpus.recordings[r];
    const RecordingAlignment& a = rec.alignment;  // clean geometry for planning
    auto rng = make_engine(spec.seed, static_cast<std::uint64_t>(r), 2);
    std::uniform_real_distribution<double> unif(0.0, 1.0);

    const double severity =
        spec.severity.empty() ? 1.0 : spec.severity[r % spec.severity.size()];
    const double hours = a.total_duration_s / 3600.0;
    auto count_for = [&](double rate) {
      return static_cast<std::size_t>(
          std::max<long long>(0, std::llround(rate * severity * hours)));
    };

    const auto words = word_spans(a);
    std::vector<std::size_t> silence_idx;
    for (std::size_t i = 0; i < a.phones.size(); ++i) {
      if (a.phones[i].is_silence()) silence_idx.push_back(i);
    }

    std::vector<std::pair<double, double>> zones;
    std::vector<Site> sites;

    auto reserve = [&](double lo, double hi) {
      zones.emplace_back(lo - kZonePadS, hi + kZonePadS);
    };

    // Candidate shuffling keeps site choice random but reproducible.
    auto shuffled = [&](std::size_t n) {
      std::vector<std::size_t> idx(n);
      for (std::size_t i = 0; i < n; ++i) idx[i] = i;
      std::shuffle(idx.begin(), idx.end(), rng);
      return idx;
    };

    auto plan_stretch = [&](bool with_dip) {
      for (std::size_t wi : shuffled(words.size())) {
        const auto& w = words[wi];
        if (w.last - w.first + 1 < 3) continue;
        if (w.dur < 0.18 || w.dur > 0.40) continue;
        if (w.max_phone_dur * spec.stretch_factor >= 0.95) continue;
        const double needed = (spec.stretch_factor - 1.0) * w.dur;
        const auto reach = stretch_reach(a, w.last, needed, 30.0);
        if (!reach) continue;
        const double grown_end = w.start + spec.stretch_factor * w.dur;
        const double zone_hi = std::max(grown_end, a.phones[*reach].end_s);
        const double dip_lo = w.start - 2.6;
        const double zone_lo = with_dip ? dip_lo - 0.2 : w.start;
        if (dip_lo < 1.0) continue;
        if (!zone_free(zones, zone_lo - kZonePadS, zone_hi + kZonePadS)) continue;
        reserve(zone_lo, zone_hi);
        Site s;
        s.kind = ErrorKind::Stretch;
        s.first = w.first;
        s.last = w.last;
        s.reach = *reach;
        sites.push_back(s);
        if (with_dip) {
          // A dip on the ~2 s of phones just before the stretched word.
          std::size_t first = w.first;
          while (first > 0 && a.phones[first - 1].end_s > w.start - 2.2) --first;
          if (first < w.first) {
            Site d;
            d.kind = ErrorKind::LogpDip;
            d.first = first;
            d.last = w.first - 1;
            d.dip_mult = 1.0 + 0.4 * unif(rng);
            sites.push_back(d);
          }
        }
        return true;
      }
      return false;
    };

    for (std::size_t i = 0; i < count_for(spec.coplant_per_hour); ++i) {
      plan_stretch(true);
    }
    for (std::size_t i = 0; i < count_for(spec.stretch_per_hour); ++i) {
      plan_stretch(false);
    }

    for (std::size_t i = 0; i < count_for(spec.bunching_per_hour); ++i) {
      for (std::size_t wi : shuffled(words.size())) {
        const auto& w = words[wi];
        const std::size_t n = w.last - w.first + 1;
        if (n < 4 || !w.followed_by_silence) continue;
        if (w.dur < 0.03 * static_cast<double>(n) + 0.06) continue;
        if (!zone_free(zones, w.start - kZonePadS, w.start + w.dur + kZonePadS)) {
          continue;
        }
        reserve(w.start, w.start + w.dur);
        Site s;
        s.kind = ErrorKind::Bunching;
        s.first = w.first;
        s.last = w.last;
        s.old_word_dur = w.dur;
        sites.push_back(s);
        break;
      }
    }

    for (std::size_t i = 0; i < count_for(spec.logp_dip_per_hour); ++i) {
      const double dip_len = 1.5 + 1.5 * unif(rng);
      std::vector<std::size_t> starts = shuffled(a.phones.size());
      for (std::size_t pi : starts) {
        if (a.phones[pi].is_silence()) continue;
        std::size_t last = pi;
        while (last + 1 < a.phones.size() &&
               a.phones[last].end_s - a.phones[pi].start_s < dip_len) {
          ++last;
        }
        const double lo = a.phones[pi].start_s, hi = a.phones[last].end_s;
        if (hi - lo < dip_len) continue;
        if (!zone_free(zones, lo - kZonePadS, hi + kZonePadS)) continue;
        reserve(lo, hi);
        Site s;
        s.kind = ErrorKind::LogpDip;
        s.first = pi;
        s.last = last;
        s.dip_mult = 1.0 + 0.4 * unif(rng);
        sites.push_back(s);
        break;
      }
    }

    for (std::size_t i = 0; i < count_for(spec.silence_swap_per_hour); ++i) {
      for (std::size_t wi : shuffled(words.size())) {
        const auto& w = words[wi];
        if (w.first == 0 || !a.phones[w.first - 1].is_silence()) continue;
        const auto& sil = a.phones[w.first - 1];
        if (sil.duration_s() < 0.15 || w.dur < 0.15) continue;
        const double lo = sil.start_s, hi = w.start + w.dur;
        if (!zone_free(zones, lo - kZonePadS, hi + kZonePadS)) continue;
        reserve(lo, hi);
        Site s;
        s.kind = ErrorKind::SilenceSwap;
        s.first = w.first - 1;  // the silence phone
        s.last = w.last;
        sites.push_back(s);
        break;
      }
    }

    for (std::size_t i = 0; i < count_for(spec.boundary_drift_per_hour); ++i) {
      std::vector<std::size_t> starts = shuffled(a.phones.size());
      for (std::size_t pi : starts) {
        std::size_t last = pi;
        while (last + 1 < a.phones.size() &&
               a.phones[last].end_s - a.phones[pi].start_s < 1.5) {
          ++last;
        }
        if (last - pi < 3) continue;
        if (a.phones[last].duration_s() < 0.12) continue;
        const double lo = a.phones[pi].start_s, hi = a.phones[last].end_s;
        if (hi - lo < 1.5) continue;
        if (!zone_free(zones, lo - kZonePadS, hi + kZonePadS)) continue;
        reserve(lo, hi);
        Site s;
        s.kind = ErrorKind::BoundaryDrift;
        s.first = pi;
        s.last = last;
        s.drift = unif(rng) < 0.5 ? 0.08 : -0.08;
        sites.push_back(s);
        break;
      }
    }

    for (std::size_t i = 0; i < count_for(spec.quiet_gap_per_hour); ++i) {
      const double gap = 0.3 + 0.2 * unif(rng);
      for (std::size_t wi : shuffled(words.size())) {
        const auto& w = words[wi];
        if (w.dur < gap + 0.1) continue;
        if (!zone_free(zones, w.start - kZonePadS, w.start + w.dur + kZonePadS)) {
          continue;
        }
        reserve(w.start, w.start + w.dur);
        Site s;
        s.kind = ErrorKind::QuietGap;
        s.first = w.first;
        s.last = w.last;
        s.gap_len = gap;
        sites.push_back(s);
        break;
      }
    }

    for (std::size_t i = 0; i < count_for(spec.loud_burst_per_hour); ++i) {
      const double burst = 0.3 + 0.2 * unif(rng);
      for (std::size_t si : shuffled(silence_idx.size())) {
        const auto& p = a.phones[silence_idx[si]];
        if (p.duration_s() < burst + 0.1) continue;
        if (!zone_free(zones, p.start_s - kZonePadS, p.end_s + kZonePadS)) {
          continue;
        }
        reserve(p.start_s, p.end_s);
        Site s;
        s.kind = ErrorKind::LoudBurst;
        s.first = silence_idx[si];
        s.last = silence_idx[si];
        s.gap_len = burst;
        sites.push_back(s);
        break;
      }
    }

    // Apply label edits on a mutable duration/phone view, left to right.
    std::sort(sites.begin(), sites.end(),
              [](const Site& x, const Site& y) { return x.first < y.first; });
    auto& phones = rec.alignment.phones;
    std::vector<double> durs(phones.size());
    for (std::size_t i = 0; i < phones.size(); ++i) durs[i] = phones[i].duration_s();

    for (auto& site : sites) {
      switch (site.kind) {
        case ErrorKind::Bunching: {
          double freed = 0.0;
          for (std::size_t k = site.first; k <= site.last; ++k) {
            freed += durs[k] - 0.03;
            if (durs[k] > 0.0) phones[k].log_prob *= 0.03 / durs[k];
            durs[k] = 0.03;
          }
          durs[site.last + 1] += freed;  // following silence absorbs the slack
          break;
        }
        case ErrorKind::Stretch: {
          double needed = 0.0;
          for (std::size_t k = site.first; k <= site.last; ++k) {
            needed += durs[k] * (spec.stretch_factor - 1.0);
            durs[k] *= spec.stretch_factor;
            phones[k].log_prob *= spec.stretch_factor;
          }
          for (std::size_t k = site.last + 1; k <= site.reach && needed > 0.0;
               ++k) {
            if (!phones[k].is_silence()) continue;
            const double take =
                std::min(needed, std::max(0.0, durs[k] - kMinSilenceAfterTakeS));
            durs[k] -= take;
            needed -= take;
          }
          // Selection guaranteed the slack; any residual mismatch would shift
          // later phones against the audio, so absorb it in the last silence.
          if (needed > 1e-9) {
            for (std::size_t k = site.reach;
                 k > site.last && needed > 1e-9; --k) {
              if (!phones[k].is_silence()) continue;
              const double take = std::min(needed, durs[k]);
              durs[k] -= take;
              needed -= take;
            }
          }
          break;
        }
        case ErrorKind::LogpDip: {
          for (std::size_t k = site.first; k <= site.last; ++k) {
            phones[k].log_prob -=
                site.dip_mult * spec.logp_dip_rate * durs[k];
          }
          break;
        }
        case ErrorKind::SilenceSwap: {
          // Move the silence phone after the word it preceded.
          std::rotate(phones.begin() + static_cast<long>(site.first),
                      phones.begin() + static_cast<long>(site.first) + 1,
                      phones.begin() + static_cast<long>(site.last) + 1);
          std::rotate(durs.begin() + static_cast<long>(site.first),
                      durs.begin() + static_cast<long>(site.first) + 1,
                      durs.begin() + static_cast<long>(site.last) + 1);
          break;
        }
        case ErrorKind::BoundaryDrift: {
          const double c = site.drift;
          if (durs[site.first] + c > 0.0 && durs[site.last] - c > 0.0) {
            durs[site.first] += c;
            durs[site.last] -= c;
          }
          break;
        }
        default:
          break;  // audio-only kinds leave the labels alone
      }
    }

    // Rebuild positions from durations; total time is unchanged.
    double t = phones.empty() ? 0.0 : phones.front().start_s;
    for (std::size_t i = 0; i < phones.size(); ++i) {
      phones[i].start_s = t;
      phones[i].end_s = t + durs[i];
      t = phones[i].end_s;
    }
    rec.alignment = validate_alignment(rec.alignment.rec_id, std::move(phones),
                                       rec.alignment.total_duration_s);

    // Truth spans from the final geometry, then the audio edits.
    const auto& fp = rec.alignment.phones;
    std::vector<ErrorSpan> spans;
    for (const auto& site : sites) {
      ErrorSpan span;
      span.rec_id = rec.alignment.rec_id;
      span.kind = site.kind;
      switch (site.kind) {
        case ErrorKind::Bunching:
          span.start_s = fp[site.first].start_s;
          span.end_s = span.start_s + site.old_word_dur;
          break;
        case ErrorKind::QuietGap: {
          const double lo = fp[site.first].start_s;
          const double hi = fp[site.last].end_s;
          span.start_s = lo + 0.5 * (hi - lo - site.gap_len);
          span.end_s = span.start_s + site.gap_len;
          break;
        }
        case ErrorKind::LoudBurst: {
          const double lo = fp[site.first].start_s;
          const double hi = fp[site.last].end_s;
          span.start_s = lo + 0.5 * (hi - lo - site.gap_len);
          span.end_s = span.start_s + site.gap_len;
          break;
        }
        default:
          span.start_s = fp[site.first].start_s;
          span.end_s = fp[site.last].end_s;
          break;
      }
      spans.push_back(std::move(span));
    }

    auto burst_rng = make_engine(spec.seed, static_cast<std::uint64_t>(r), 3);
    std::uniform_real_distribution<double> unit(-1.0, 1.0);
    bool audio_touched = false;
    for (std::size_t si = 0; si < sites.size(); ++si) {
      const auto& site = sites[si];
      if (site.kind != ErrorKind::QuietGap && site.kind != ErrorKind::LoudBurst) {
        continue;
      }
      const auto& span = spans[si];
      const auto lo = static_cast<std::size_t>(
          std::llround(span.start_s * rec.audio.sample_rate_hz));
      const auto hi = std::min(
          rec.audio.samples.size(),
          static_cast<std::size_t>(std::llround(span.end_s *
                                                rec.audio.sample_rate_hz)));
      for (std::size_t s = lo; s < hi; ++s) {
        rec.audio.samples[s] =
            site.kind == ErrorKind::QuietGap
                ? 0.0f
                : static_cast<float>(0.9 * unit(burst_rng));
      }
      audio_touched = true;
    }
    if (audio_touched) {
      rec.audio.frame_rms =
          compute_frame_rms(rec.audio.samples, rec.audio.sample_rate_hz);
    }

    std::sort(spans.begin(), spans.end(),
              [](const ErrorSpan& x, const ErrorSpan& y) {
                return x.start_s < y.start_s;
              });
    result.spans.insert(result.spans.end(), spans.begin(), spans.end());
  }
  return result;
}

std::vector<RatingRecord> derive_ratings(const SynthCorpus& corpus,
                                         const std::vector<ErrorSpan>& spans) {
  std::vector<RatingRecord> out;
  for (const auto& rec : corpus.recordings) {
    double corrupted = 0.0;
    for (const auto& s : spans) {
      if (s.rec_id == rec.alignment.rec_id) corrupted += s.end_s - s.start_s;
    }
    const double frac =
        rec.alignment.total_duration_s > 0.0
            ? corrupted / rec.alignment.total_duration_s
            : 0.0;
    const double rating = std::clamp(10.0 - 150.0 * frac, 0.0, 10.0);
    out.push_back({rec.alignment.rec_id, rating});
  }
  return out;
}

std::vector<Feature> error_kind_targets(ErrorKind k) {
  switch (k) {
    case ErrorKind::Bunching: return {Feature::Short};
    case ErrorKind::LogpDip: return {Feature::Unexpected};
    case ErrorKind::Stretch: return {Feature::Badlength};
    case ErrorKind::QuietGap: return {Feature::Quiet};
    case ErrorKind::LoudBurst: return {Feature::Loud};
    case ErrorKind::SilenceSwap: return {Feature::Quiet, Feature::Loud};
    case ErrorKind::BoundaryDrift: return {};
  }
  return {};
}

namespace {

double interval_iou(double a_lo, double a_hi, double b_lo, double b_hi) {
  const double inter = std::max(0.0, std::min(a_hi, b_hi) - std::max(a_lo, b_lo));
  const double uni = std::max(a_hi, b_hi) - std::min(a_lo, b_lo);
  return uni > 0.0 ? inter / uni : 0.0;
}

}  // namespace

std::map<Feature, DetectorEval> evaluate_detectors(
    const std::map<std::string, std::map<Feature, std::vector<SuspicionRegion>>>&
        regions_by_rec,
    std::span<const ErrorSpan> truth, double match_iou) {
  std::map<Feature, DetectorEval> eval;
  for (Feature f : kAllFeatures) eval[f];

  for (const auto& span : truth) {
    for (Feature f : error_kind_targets(span.kind)) {
      auto& e = eval[f];
      ++e.truth_total;
      const auto rec_it = regions_by_rec.find(span.rec_id);
      if (rec_it == regions_by_rec.end()) continue;
      const auto feat_it = rec_it->second.find(f);
      if (feat_it == rec_it->second.end()) continue;
      for (const auto& r : feat_it->second) {
        if (interval_iou(r.start_s, r.end_s, span.start_s, span.end_s) >=
            match_iou) {
          ++e.truth_matched;
          break;
        }
      }
    }
  }

  for (const auto& [rec_id, by_feature] : regions_by_rec) {
    for (const auto& [f, regions] : by_feature) {
      auto& e = eval[f];
      for (const auto& r : regions) {
        ++e.regions_total;
        for (const auto& span : truth) {
          if (span.rec_id != rec_id) continue;
          if (std::min(r.end_s, span.end_s) > std::max(r.start_s, span.start_s)) {
            ++e.regions_matched;
            break;
          }
        }
      }
    }
  }

  for (auto& [f, e] : eval) {
    if (e.truth_total > 0) {
      e.recall = static_cast<double>(e.truth_matched) /
                 static_cast<double>(e.truth_total);
    }
    if (e.regions_total > 0) {
      e.precision = static_cast<double>(e.regions_matched) /
                    static_cast<double>(e.regions_total);
    }
  }
  return eval;
}

std::string write_truth_csv(std::span<const ErrorSpan> spans) {
  std::ostringstream out;
  out << "rec_id,kind,start_s,end_s\n";
  for (const auto& s : spans) {
    out << s.rec_id << ',' << error_kind_name(s.kind) << ','
        << util::format_sig9(s.start_s) << ',' << util::format_sig9(s.end_s)
        << '\n';
  }
  return out.str();
}

std::vector<ErrorSpan> parse_truth_csv(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError("empty truth file", 1);
  ++line_no;
  std::vector<ErrorSpan> out;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    std::vector<std::string> fields;
    std::string cur;
    for (char c : line) {
      if (c == ',') {
        fields.push_back(cur);
        cur.clear();
      } else if (c != '\r') {
        cur += c;
      }
    }
    fields.push_back(cur);
    if (fields.size() != 4) throw ParseError("expected 4 fields", line_no);
    ErrorSpan s;
    s.rec_id = fields[0];
    const auto k = error_kind_from_name(fields[1]);
    if (!k) throw ParseError("unknown error kind '" + fields[1] + "'", line_no);
    s.kind = *k;
    s.start_s = std::strtod(fields[2].c_str(), nullptr);
    s.end_s = std::strtod(fields[3].c_str(), nullptr);
    out.push_back(std::move(s));
  }
  return out;
}

namespace {

template <typename T>
void get_if_present(const json& j, const char* key, T& out) {
  if (j.contains(key)) out = j.at(key).get<T>();
}

}  // namespace

SynthSpec parse_synth_spec(const std::string& json_text) {
  json j;
  try {
    j = json::parse(json_text);
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth spec: invalid JSON: ") + e.what());
  }
  SynthSpec spec = default_synth_spec();
  try {
    get_if_present(j, "n_recordings", spec.n_recordings);
    get_if_present(j, "duration_s", spec.duration_s);
    get_if_present(j, "sample_rate_hz", spec.sample_rate_hz);
    get_if_present(j, "seed", spec.seed);
    get_if_present(j, "sigma_log_duration", spec.sigma_log_duration);
    get_if_present(j, "logp_noise", spec.logp_noise);
    get_if_present(j, "silence_logp_rate", spec.silence_logp_rate);
    get_if_present(j, "silence_median_s", spec.silence_median_s);
    get_if_present(j, "sigma_log_silence", spec.sigma_log_silence);
    get_if_present(j, "min_word_phones", spec.min_word_phones);
    get_if_present(j, "max_word_phones", spec.max_word_phones);
    get_if_present(j, "speech_amplitude", spec.speech_amplitude);
    get_if_present(j, "silence_amplitude", spec.silence_amplitude);
    get_if_present(j, "bunching_per_hour", spec.bunching_per_hour);
    get_if_present(j, "silence_swap_per_hour", spec.silence_swap_per_hour);
    get_if_present(j, "boundary_drift_per_hour", spec.boundary_drift_per_hour);
    get_if_present(j, "logp_dip_per_hour", spec.logp_dip_per_hour);
    get_if_present(j, "quiet_gap_per_hour", spec.quiet_gap_per_hour);
    get_if_present(j, "loud_burst_per_hour", spec.loud_burst_per_hour);
    get_if_present(j, "stretch_per_hour", spec.stretch_per_hour);
    get_if_present(j, "coplant_per_hour", spec.coplant_per_hour);
    get_if_present(j, "logp_dip_rate", spec.logp_dip_rate);
    get_if_present(j, "stretch_factor", spec.stretch_factor);
    get_if_present(j, "severity", spec.severity);
    if (j.contains("inventory")) {
      spec.inventory.clear();
      for (const auto& e : j.at("inventory")) {
        PhoneClassSpec c;
        c.label = e.at("label").get<std::string>();
        c.median_duration_s = e.at("median_duration_s").get<double>();
        c.logp_rate = e.at("logp_rate").get<double>();
        spec.inventory.push_back(std::move(c));
      }
    }
  } catch (const json::exception& e) {
    throw ParseError(std::string("synth spec: ") + e.what());
  }
  return spec;
}

std::string serialize_synth_spec(const SynthSpec& spec) {
  ordered_json j;
  j["n_recordings"] = spec.n_recordings;
  j["duration_s"] = spec.duration_s;
  j["sample_rate_hz"] = spec.sample_rate_hz;
  j["seed"] = spec.seed;
  ordered_json inv = ordered_json::array();
  for (const auto& c : spec.inventory) {
    ordered_json e;
    e["label"] = c.label;
    e["median_duration_s"] = c.median_duration_s;
    e["logp_rate"] = c.logp_rate;
    inv.push_back(std::move(e));
  }
  j["inventory"] = std::move(inv);
  j["sigma_log_duration"] = spec.sigma_log_duration;
  j["logp_noise"] = spec.logp_noise;
  j["silence_logp_rate"] = spec.silence_logp_rate;
  j["silence_median_s"] = spec.silence_median_s;
  j["sigma_log_silence"] = spec.sigma_log_silence;
  j["min_word_phones"] = spec.min_word_phones;
  j["max_word_phones"] = spec.max_word_phones;
  j["speech_amplitude"] = spec.speech_amplitude;
  j["silence_amplitude"] = spec.silence_amplitude;
  j["bunching_per_hour"] = spec.bunching_per_hour;
  j["silence_swap_per_hour"] = spec.silence_swap_per_hour;
  j["boundary_drift_per_hour"] = spec.boundary_drift_per_hour;
  j["logp_dip_per_hour"] = spec.logp_dip_per_hour;
  j["quiet_gap_per_hour"] = spec.quiet_gap_per_hour;
  j["loud_burst_per_hour"] = spec.loud_burst_per_hour;
  j["stretch_per_hour"] = spec.stretch_per_hour;
  j["coplant_per_hour"] = spec.coplant_per_hour;
  j["logp_dip_rate"] = spec.logp_dip_rate;
  j["stretch_factor"] = spec.stretch_factor;
  j["severity"] = spec.severity;
  return j.dump(2) + "\n";
}

}  // namespace aligncheck
