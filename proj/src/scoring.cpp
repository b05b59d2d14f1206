#include "aligncheck/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include "aligncheck/errors.hpp"

namespace aligncheck {

FileScoreRow file_scores(const RecordingAlignment& alignment,
                         const std::map<Feature, std::vector<SuspicionRegion>>& regions,
                         std::optional<double> rating) {
  FileScoreRow row;
  row.rec_id = alignment.rec_id;
  row.rating = rating;
  row.duration_s = alignment.total_duration_s;
  row.word_count = alignment.word_count;
  const double hours = alignment.total_duration_s / 3600.0;
  for (Feature f : kAllFeatures) {
    FeatureScores s;
    const auto it = regions.find(f);
    const std::size_t n = it != regions.end() ? it->second.size() : 0;
    double flagged = 0.0;
    if (it != regions.end()) {
      for (const auto& r : it->second) flagged += r.duration_s();
    }
    s.nd = hours > 0.0 ? static_cast<double>(n) / hours : 0.0;
    if (row.word_count > 0) {
      s.nw = static_cast<double>(n) /
             (static_cast<double>(row.word_count) / 1000.0);
    }
    s.dd = alignment.total_duration_s > 0.0
               ? flagged / alignment.total_duration_s
               : 0.0;
    row.scores[f] = s;
  }
  return row;
}

std::string score_family_name(ScoreFamily f) {
  switch (f) {
    case ScoreFamily::Nd: return "s_nd";
    case ScoreFamily::Nw: return "s_nw";
    case ScoreFamily::Dd: return "s_dd";
  }
  return "?";
}

HarnessResult regression_harness(const std::vector<FileScoreRow>& rows) {
  for (const auto& r : rows) {
    if (!r.rating) {
      throw Error("regression_harness: row '" + r.rec_id + "' has no rating");
    }
  }

  HarnessResult out;
  for (ScoreFamily family : {ScoreFamily::Nd, ScoreFamily::Nw, ScoreFamily::Dd}) {
    // Rows whose score is defined for this family (s_nw needs words).
    std::vector<const FileScoreRow*> usable;
    for (const auto& r : rows) {
      if (family == ScoreFamily::Nw && r.word_count == 0) continue;
      usable.push_back(&r);
    }
    if (usable.size() < rows.size()) {
      out.warnings.push_back(score_family_name(family) + ": dropped " +
                             std::to_string(rows.size() - usable.size()) +
                             " recording(s) without a word count");
    }
    if (usable.size() < 10) {
      throw TooFewObservationsError("regression_harness: " +
                                    score_family_name(family) + " has " +
                                    std::to_string(usable.size()) +
                                    " usable recordings, need 10");
    }

    auto raw_score = [&](const FileScoreRow& r, Feature f) {
      const auto& s = r.scores.at(f);
      switch (family) {
        case ScoreFamily::Nd: return s.nd;
        case ScoreFamily::Nw: return s.nw.value_or(0.0);
        case ScoreFamily::Dd: return s.dd;
      }
      return 0.0;
    };

    for (XTransform xt : {XTransform::Raw, XTransform::Power03}) {
      for (YTransform yt : {YTransform::Raw, YTransform::Squared}) {
        // Keep only non-constant columns; a detector that never fires
        // contributes nothing and would break the fit.
        std::vector<Feature> kept;
        std::vector<std::string> dropped;
        for (Feature f : kAllFeatures) {
          double lo = raw_score(*usable.front(), f), hi = lo;
          for (const auto* r : usable) {
            lo = std::min(lo, raw_score(*r, f));
            hi = std::max(hi, raw_score(*r, f));
          }
          if (hi > lo) {
            kept.push_back(f);
          } else {
            dropped.push_back(std::string(feature_name(f)));
          }
        }

        stats::Matrix design(usable.size(), kept.size());
        std::vector<double> y(usable.size());
        for (std::size_t i = 0; i < usable.size(); ++i) {
          for (std::size_t c = 0; c < kept.size(); ++c) {
            double v = raw_score(*usable[i], kept[c]);
            if (xt == XTransform::Power03) v = std::pow(v, 0.3);
            design.at(i, c) = v;
          }
          double r = *usable[i]->rating;
          if (yt == YTransform::Squared) r *= r;
          y[i] = r;
        }
        std::vector<std::string> labels;
        labels.reserve(kept.size());
        for (Feature f : kept) labels.emplace_back(feature_name(f));

        LabeledFit lf;
        lf.family = family;
        lf.x_transform = xt;
        lf.y_transform = yt;
        lf.label = score_family_name(family) +
                   (xt == XTransform::Power03 ? ".pow03_x" : ".raw_x") +
                   (yt == YTransform::Squared ? ".sq_y" : ".raw_y");
        lf.fit = stats::ols_fit(design, y, std::move(labels), /*intercept=*/true);
        lf.dropped_features = dropped;
        if (!dropped.empty()) {
          std::string msg = lf.label + ": dropped constant feature(s):";
          for (const auto& d : dropped) msg += " " + d;
          out.warnings.push_back(msg);
        }
        out.fits.push_back(std::move(lf));
      }
    }
  }

  if (out.fits.size() >= kRegressionCount) {
    out.warnings.push_back(
        std::to_string(out.fits.size()) +
        " regressions fitted; with this many tests some nominally "
        "significant coefficients are expected by chance (no "
        "multiple-comparison correction is applied)");
  }
  return out;
}

namespace {

double interval_gap(const SuspicionRegion& a, const SuspicionRegion& b) {
  return std::max({b.start_s - a.end_s, a.start_s - b.end_s, 0.0});
}

}  // namespace

std::uint64_t count_close_pairs(std::span<const SuspicionRegion> a,
                                std::span<const SuspicionRegion> b,
                                double window_s) {
  // Both lists are sorted with increasing start and (being disjoint)
  // increasing end, so the candidate window in b advances monotonically.
  std::uint64_t count = 0;
  std::size_t lo = 0;
  for (const auto& ra : a) {
    while (lo < b.size() && b[lo].end_s < ra.start_s - window_s) ++lo;
    for (std::size_t j = lo; j < b.size() && b[j].start_s <= ra.end_s + window_s;
         ++j) {
      if (interval_gap(ra, b[j]) <= window_s) ++count;
    }
  }
  return count;
}

namespace {

CoincidenceCell make_cell(Feature fa, Feature fb,
                          const std::vector<SuspicionRegion>& ra,
                          const std::vector<SuspicionRegion>& rb,
                          double total_duration_s,
                          const CoincidenceOptions& opt) {
  CoincidenceCell cell;
  cell.a = fa;
  cell.b = fb;
  if (ra.empty() || rb.empty() || total_duration_s <= 0.0) {
    return cell;  // observed 0, expected 0, ratio/p absent
  }
  cell.observed = count_close_pairs(ra, rb, opt.window_s);
  double mean_len_a = 0.0, mean_len_b = 0.0;
  for (const auto& r : ra) mean_len_a += r.duration_s();
  for (const auto& r : rb) mean_len_b += r.duration_s();
  mean_len_a /= static_cast<double>(ra.size());
  mean_len_b /= static_cast<double>(rb.size());
  const double window = opt.point_chance_model
                            ? 2.0 * opt.window_s
                            : 2.0 * opt.window_s + mean_len_a + mean_len_b;
  cell.expected = static_cast<double>(ra.size()) *
                  static_cast<double>(rb.size()) * window / total_duration_s;
  if (cell.expected > 0.0) {
    cell.ratio = static_cast<double>(cell.observed) / cell.expected;
    cell.p_value = stats::poisson_upper_tail(cell.observed, cell.expected);
  }
  return cell;
}

const std::vector<SuspicionRegion>& regions_or_empty(
    const std::map<Feature, std::vector<SuspicionRegion>>& regions, Feature f) {
  static const std::vector<SuspicionRegion> empty;
  const auto it = regions.find(f);
  return it != regions.end() ? it->second : empty;
}

}  // namespace

const CoincidenceCell* CoincidenceTable::find(Feature a, Feature b) const {
  for (const auto& c : cells) {
    if ((c.a == a && c.b == b) || (c.a == b && c.b == a)) return &c;
  }
  return nullptr;
}

CoincidenceTable coincidence_analysis(
    const std::map<Feature, std::vector<SuspicionRegion>>& regions,
    double total_duration_s, const CoincidenceOptions& opt) {
  CoincidenceTable table;
  for (std::size_t i = 0; i < kAllFeatures.size(); ++i) {
    for (std::size_t j = i + 1; j < kAllFeatures.size(); ++j) {
      table.cells.push_back(make_cell(
          kAllFeatures[i], kAllFeatures[j],
          regions_or_empty(regions, kAllFeatures[i]),
          regions_or_empty(regions, kAllFeatures[j]), total_duration_s, opt));
    }
  }
  return table;
}

CoincidenceTable corpus_coincidence(std::span<const RecordingRegions> recs,
                                    const CoincidenceOptions& opt) {
  CoincidenceTable table;
  for (std::size_t i = 0; i < kAllFeatures.size(); ++i) {
    for (std::size_t j = i + 1; j < kAllFeatures.size(); ++j) {
      CoincidenceCell sum;
      sum.a = kAllFeatures[i];
      sum.b = kAllFeatures[j];
      for (const auto& rec : recs) {
        const auto cell =
            make_cell(sum.a, sum.b, regions_or_empty(*rec.regions, sum.a),
                      regions_or_empty(*rec.regions, sum.b),
                      rec.total_duration_s, opt);
        sum.observed += cell.observed;
        sum.expected += cell.expected;
      }
      if (sum.expected > 0.0) {
        sum.ratio = static_cast<double>(sum.observed) / sum.expected;
        sum.p_value = stats::poisson_upper_tail(sum.observed, sum.expected);
      }
      table.cells.push_back(sum);
    }
  }
  return table;
}

double permutation_expected_pairs(std::span<const SuspicionRegion> a,
                                  std::span<const SuspicionRegion> b,
                                  double total_duration_s, double window_s,
                                  int draws, std::uint64_t seed) {
  if (a.empty() || b.empty() || draws <= 0) return 0.0;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unif(0.0, 1.0);
  std::uint64_t total = 0;
  std::vector<SuspicionRegion> pa(a.begin(), a.end());
  std::vector<SuspicionRegion> pb(b.begin(), b.end());
  for (int d = 0; d < draws; ++d) {
    for (auto& r : pa) {
      const double len = r.duration_s();
      const double start = unif(rng) * std::max(0.0, total_duration_s - len);
      r.start_s = start;
      r.end_s = start + len;
    }
    for (auto& r : pb) {
      const double len = r.duration_s();
      const double start = unif(rng) * std::max(0.0, total_duration_s - len);
      r.start_s = start;
      r.end_s = start + len;
    }
    // Re-placement breaks the sortedness the sweep needs; count directly.
    for (const auto& ra : pa) {
      for (const auto& rb : pb) {
        if (interval_gap(ra, rb) <= window_s) ++total;
      }
    }
  }
  return static_cast<double>(total) / draws;
}

}  // namespace aligncheck
